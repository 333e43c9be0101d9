use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ecwm::bootstrap::BootstrapConfig;
use ecwm::estimation::expected_bias;
use ecwm::io::{read_survey, write_survey, SurveyFile, SurveyRow};
use ecwm::pipeline::{bootstrap_ladder, prepare, run_ladder, GammaSource, LadderSettings};
use ecwm::simulator::simulate;
use ecwm::timeweights::sensitivity_grid;
use ecwm::{Execution, ModelSpec, Respondent};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::report::{Provenance, Report, SensitivityReport};

fn open_survey(path: &Path) -> CliResult<SurveyFile> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open survey {}: {e}", path.display())))?;
    Ok(read_survey(file)?)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::Config(e.to_string()))
}

/// Column checks that depend on the requested analysis.
fn check_columns(survey: &SurveyFile, config: &RunConfig, needs_time: bool) -> CliResult<()> {
    if config.needs_control() && !survey.has_control {
        return Err(CliError::Config(format!(
            "gamma method {} needs the missing column `control_answer`",
            config.gamma_method
        )));
    }
    if needs_time && !survey.has_time {
        return Err(CliError::Config("weighting needs the missing column `time_minutes`".into()));
    }
    Ok(())
}

/// Rows kept by the time filter must carry what the analysis reads.
fn check_rows(records: &[Respondent], config: &RunConfig, needs_time: bool) -> CliResult<()> {
    if let Some(i) = records.iter().position(|r| needs_time && r.time_minutes.is_none()) {
        return Err(CliError::Data(format!("respondent {} has no completion time but weighting is on", i + 1)));
    }
    if config.needs_control() && records.iter().all(|r| r.control.is_none()) {
        return Err(CliError::Data("no respondent answered the control statement".into()));
    }
    Ok(())
}

fn load(survey_path: &Path, config: &RunConfig, needs_time: bool) -> CliResult<(Vec<Respondent>, ecwm::pipeline::Attrition)> {
    let survey = open_survey(survey_path)?;
    check_columns(&survey, config, needs_time)?;
    let (kept, attrition) = prepare(&survey.respondents(), config.time_cutoff)?;
    check_rows(&kept, config, needs_time)?;
    Ok((kept, attrition))
}

pub fn fit(survey_path: &Path, config: &RunConfig) -> CliResult<Report> {
    let settings = config.ladder_settings()?;
    let (records, attrition) = load(survey_path, config, config.weighting)?;
    let ladder = run_ladder(&records, &settings)?;
    let intervals = if config.bootstrap > 0 {
        let boot = BootstrapConfig {
            n_resamples: config.bootstrap,
            level: config.level,
            seed: config.seed,
            stratified: config.stratified,
        };
        boot.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Some(bootstrap_ladder(&records, &settings, &boot, Execution::default())?)
    } else {
        None
    };
    let provenance = Provenance::new("fit", Some(&survey_path.display().to_string()), config);
    let report = Report::build(&ladder, intervals.as_deref(), attrition, provenance);
    if let Some(out) = &config.out {
        write_json(Path::new(out), &report)?;
    }
    Ok(report)
}

pub fn sensitivity(survey_path: &Path, config: &RunConfig) -> CliResult<SensitivityReport> {
    let settings = LadderSettings { weighting: None, ..config.ladder_settings()? };
    let (records, attrition) = load(survey_path, config, true)?;
    let ladder = run_ladder(&records, &settings)?;
    let gamma_hat = ladder.calibration.gamma_hat;
    let base = match config.base_model {
        crate::config::BaseModel::Ecwm => ModelSpec::ecwm(),
        crate::config::BaseModel::OneSayers => ModelSpec::one_sayers(),
    };
    // Same model as the +weights row of `fit`.
    let spec = if settings.gamma_source == GammaSource::None { base } else { base.with_random_answering(gamma_hat)? };
    let grid = sensitivity_grid(&records, &settings.design, &spec, Execution::default());
    let provenance = Provenance::new("sensitivity", Some(&survey_path.display().to_string()), config);
    let report = SensitivityReport::build(&grid, gamma_hat, attrition, provenance);
    if let Some(out) = &config.out {
        write_json(Path::new(out), &report)?;
    }
    Ok(report)
}

/// Writes the simulated survey and returns the number of rows.
pub fn simulate_survey(config: &RunConfig, out: &mut dyn Write) -> CliResult<usize> {
    let spec = config.population()?;
    let rows: Vec<SurveyRow> = simulate(&spec, config.seed)?
        .iter()
        .enumerate()
        .map(|(i, r)| SurveyRow { respondent_id: (i + 1).to_string(), respondent: r.to_respondent() })
        .collect();
    write_survey(out, &rows)?;
    Ok(rows.len())
}

pub const BIAS_THETAS: [f64; 4] = [0.0, 0.1, 0.2, 0.3];

/// `E(pi_hat)` of the uncorrected ECWM estimator over `pi` and `gamma` in
/// steps of 1/20 and the one-sayer shares in [`BIAS_THETAS`].
pub fn bias_surface(out: &mut dyn Write) -> CliResult<usize> {
    let io = |e: std::io::Error| CliError::Config(e.to_string());
    writeln!(out, "pi,theta,gamma,expected_pi_hat,bias").map_err(io)?;
    let mut rows = 0;
    for theta in BIAS_THETAS {
        for g in 0..=20 {
            let gamma = g as f64 / 20.0;
            if theta + gamma > 1.0 + 1e-12 {
                continue;
            }
            for i in 0..=20 {
                let pi = i as f64 / 20.0;
                let e = expected_bias(pi, theta, gamma);
                writeln!(out, "{pi},{theta},{gamma},{},{}", e.expected_pi_hat, e.bias).map_err(io)?;
                rows += 1;
            }
        }
    }
    out.flush().map_err(io)?;
    Ok(rows)
}

/// Opens `path`, or standard output when it is absent.
pub fn output(path: Option<&str>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(Path::new(p))?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}
