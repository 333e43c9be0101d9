//! `ecwm`: prevalence estimation for extended crosswise surveys.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{GammaMethod, RunConfig, WeightsFlag};
use error::CliResult;

#[derive(Parser)]
#[command(name = "ecwm", version, about = "Extended crosswise model estimation with one-saying and random-answer corrections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate gamma and fit the model ladder to a survey.
    Fit {
        #[command(flatten)]
        analysis: Analysis,
        /// Bootstrap resamples for percentile intervals (0 turns them off).
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Weighted estimates over the 3 x 3 grid of anchor weights.
    Sensitivity {
        #[command(flatten)]
        analysis: Analysis,
    },
    /// Write a simulated survey CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Write the expected uncorrected ECWM estimate over a parameter grid as CSV.
    BiasSurface {
        /// Output CSV (standard output when omitted).
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Analysis {
    /// Survey CSV.
    #[arg(long)]
    survey: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Drop respondents slower than this many minutes.
    #[arg(long)]
    time_cutoff: Option<f64>,
    /// naive_2ec, delta_pi, none or fixed:<value>.
    #[arg(long)]
    gamma_method: Option<GammaMethod>,
    /// Anchor weights `w0,w50`, or `off`.
    #[arg(long)]
    weights: Option<WeightsFlag>,
}

impl Common {
    fn config(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

impl Analysis {
    fn config(&self) -> CliResult<RunConfig> {
        let mut cfg = self.common.config()?;
        if let Some(t) = self.time_cutoff {
            cfg.time_cutoff = t;
        }
        if let Some(m) = self.gamma_method {
            cfg.gamma_method = m;
        }
        match self.weights {
            Some(WeightsFlag::Off) => cfg.weighting = false,
            Some(WeightsFlag::On(w0, w50)) => {
                cfg.weighting = true;
                cfg.w0 = w0;
                cfg.w50 = w50;
            }
            None => {}
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit { analysis, bootstrap } => {
            let mut cfg = analysis.config()?;
            if let Some(b) = bootstrap {
                cfg.bootstrap = b;
            }
            print!("{}", commands::fit(&analysis.survey, &cfg)?.render());
        }
        Command::Sensitivity { analysis } => {
            let cfg = analysis.config()?;
            print!("{}", commands::sensitivity(&analysis.survey, &cfg)?.render());
        }
        Command::Simulate { common } => {
            let cfg = common.config()?;
            let mut out = commands::output(cfg.out.as_deref())?;
            let n = commands::simulate_survey(&cfg, &mut out)?;
            drop(out);
            eprintln!("simulated {n} respondents with seed {}", cfg.seed);
        }
        Command::BiasSurface { out } => {
            let mut w = commands::output(out.as_deref())?;
            commands::bias_surface(&mut w)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ecwm: {e}");
            e.exit_code()
        }
    }
}
