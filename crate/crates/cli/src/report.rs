//! Report documents and their plain-text rendering.

use std::fmt::Write as _;

use ecwm::bootstrap::IntervalEstimate;
use ecwm::calibration::GammaFlags;
use ecwm::pipeline::{Attrition, Ladder, Rung};
use ecwm::timeweights::SensitivityGrid;
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub survey: Option<String>,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(command: &str, survey: Option<&str>, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            survey: survey.map(str::to_string),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationBlock {
    pub gamma_method: String,
    /// Twice the control-statement error rate.
    pub two_e_c: Option<f64>,
    pub pi_in: Option<f64>,
    pub pi_out: Option<f64>,
    pub delta_pi: Option<f64>,
    pub pi_ra_target: Option<f64>,
    pub theta_hat: Option<f64>,
    pub gamma_hat: f64,
    pub gamma_ci: Option<[f64; 2]>,
    pub flags: Option<GammaFlags>,
    pub t0: Option<f64>,
    pub t50: Option<f64>,
    pub beta0: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderEntry {
    pub model: String,
    pub rung: Rung,
    pub pi_hat: f64,
    pub pi_ci: Option<[f64; 2]>,
    /// `100 * pi_hat / pi_hat(ECWM)`, one decimal.
    pub pct_of_ecwm: Option<f64>,
    pub theta_hat: Option<f64>,
    pub theta_ci: Option<[f64; 2]>,
    pub g2: f64,
    pub df: usize,
    pub p_value: f64,
    pub clipped: bool,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapBlock {
    pub resamples: usize,
    pub level: f64,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub calibration: CalibrationBlock,
    pub ladder: Vec<LadderEntry>,
    pub bootstrap: Option<BootstrapBlock>,
    pub attrition: Attrition,
    pub provenance: Provenance,
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn ci(iv: &IntervalEstimate) -> [f64; 2] {
    [iv.lower, iv.upper]
}

impl Report {
    /// `intervals` follows the layout of [`Ladder::statistics`].
    pub fn build(
        ladder: &Ladder,
        intervals: Option<&[IntervalEstimate]>,
        attrition: Attrition,
        provenance: Provenance,
    ) -> Self {
        let cal = &ladder.calibration;
        let gamma = cal.gamma.as_ref();
        let delta = gamma.and_then(|g| g.delta.as_ref());
        let weights = cal.weights.as_ref();
        let mut next = intervals.map(|v| v.iter());
        let mut take = || next.as_mut().and_then(|it| it.next()).map(ci);

        let ecwm_pi = ladder.row(Rung::Ecwm).map(|f| f.pi_hat);
        let mut rows = Vec::new();
        for row in &ladder.rows {
            let f = &row.fit;
            let pi_ci = take();
            let theta_ci = if f.theta_hat.is_some() { take() } else { None };
            rows.push(LadderEntry {
                model: row.rung.label().to_string(),
                rung: row.rung,
                pi_hat: f.pi_hat,
                pi_ci,
                pct_of_ecwm: ecwm_pi.filter(|&e| e > 0.0).map(|e| round1(100.0 * f.pi_hat / e)),
                theta_hat: f.theta_hat,
                theta_ci,
                g2: f.g2,
                df: f.df,
                p_value: f.p_value,
                clipped: f.clipped,
                boundary: f.boundary,
            });
        }
        let gamma_ci = take();

        let calibration = CalibrationBlock {
            gamma_method: provenance.config.gamma_method.to_string(),
            two_e_c: gamma.map(|g| 2.0 * g.e_c),
            pi_in: delta.map(|d| d.pi_in),
            pi_out: delta.map(|d| d.pi_out),
            delta_pi: delta.map(|d| d.delta_pi),
            pi_ra_target: delta.map(|d| d.pi_ra_target),
            theta_hat: delta.and_then(|d| d.theta_hat),
            gamma_hat: cal.gamma_hat,
            gamma_ci,
            flags: gamma.map(|g| g.flags),
            t0: weights.map(|w| w.t0),
            t50: weights.map(|w| w.t50),
            beta0: weights.map(|w| w.beta0),
            beta: weights.map(|w| w.beta),
        };
        let bootstrap = intervals.map(|v| BootstrapBlock {
            resamples: provenance.config.bootstrap,
            level: provenance.config.level,
            failed: v.first().map_or(0, |i| i.n_failed),
        });
        Self { calibration, ladder: rows, bootstrap, attrition, provenance }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let c = &self.calibration;
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
        let a = &self.attrition;
        let _ = writeln!(
            s,
            "Respondents: {} read, {} over the time cutoff, {} analysed ({} failed the control item)",
            a.n_input, a.time_excluded, a.n_analyzed, a.control_excluded
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "Calibration ({})", c.gamma_method);
        let _ = writeln!(
            s,
            "  {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>5} {:>5}  (beta0, beta)",
            "2e_c", "pi_in", "pi_out", "delta", "pi_ra", "theta", "gamma", "t0", "t50"
        );
        let weights = match (c.beta0, c.beta) {
            (Some(b0), Some(b)) => format!("({b0:.2}, {b:.2})"),
            _ => "-".to_string(),
        };
        let time = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"));
        let _ = writeln!(
            s,
            "  {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>5} {:>5}  {}",
            cell(c.two_e_c),
            cell(c.pi_in),
            cell(c.pi_out),
            cell(c.delta_pi),
            cell(c.pi_ra_target),
            cell(c.theta_hat),
            format!("{:.3}", c.gamma_hat),
            time(c.t0),
            time(c.t50),
            weights
        );
        let _ = writeln!(s);
        let interval = |v: Option<[f64; 2]>| v.map_or_else(String::new, |[l, u]| format!("({l:.3}, {u:.3})"));
        let _ = writeln!(
            s,
            "  {:<13} {:>6} {:<16} {:>6} {:>6} {:<16} {:>8} {:>3} {:>6}",
            "model", "pi", "CI", "%ECWM", "theta", "CI", "G2", "df", "p"
        );
        for r in &self.ladder {
            let pct = r.pct_of_ecwm.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"));
            let (g2, p) = if r.df == 0 { ("0".to_string(), "-".to_string()) } else { (format!("{:.3}", r.g2), format!("{:.3}", r.p_value)) };
            let _ = writeln!(
                s,
                "  {:<13} {:>6.3} {:<16} {:>6} {:>6} {:<16} {:>8} {:>3} {:>6}",
                r.model,
                r.pi_hat,
                interval(r.pi_ci),
                pct,
                cell(r.theta_hat),
                interval(r.theta_ci),
                g2,
                r.df,
                p
            );
        }
        if let Some(b) = &self.bootstrap {
            let _ = writeln!(
                s,
                "\n{:.0}% percentile intervals from {} resamples ({} failed)",
                100.0 * b.level,
                b.resamples,
                b.failed
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub w0: f64,
    pub w50: f64,
    pub pi_hat: Option<f64>,
    pub theta_hat: Option<f64>,
    pub error: Option<String>,
    /// The anchors used by `fit`.
    pub default: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub gamma_hat: f64,
    pub w0: Vec<f64>,
    pub w50: Vec<f64>,
    pub cells: Vec<GridEntry>,
    /// Largest minus smallest estimate over the grid.
    pub spread: f64,
    pub attrition: Attrition,
    pub provenance: Provenance,
}

impl SensitivityReport {
    pub fn build(grid: &SensitivityGrid, gamma_hat: f64, attrition: Attrition, provenance: Provenance) -> Self {
        let (w0, w50) = (provenance.config.w0, provenance.config.w50);
        let cells = grid
            .cells
            .iter()
            .map(|c| GridEntry {
                w0: c.w0,
                w50: c.w50,
                pi_hat: c.pi_hat.as_ref().ok().copied(),
                theta_hat: c.theta_hat,
                error: c.pi_hat.as_ref().err().cloned(),
                default: c.w0 == w0 && c.w50 == w50,
            })
            .collect();
        Self {
            gamma_hat,
            w0: grid.w0.clone(),
            w50: grid.w50.clone(),
            cells,
            spread: grid.spread(),
            attrition,
            provenance,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Weighted pi by anchor weights (gamma = {:.3}; * marks the fit anchors)", self.gamma_hat);
        let _ = write!(s, "  {:>8}", "w0\\w50");
        for w in &self.w50 {
            let _ = write!(s, " {w:>8}");
        }
        let _ = writeln!(s);
        for (i, w0) in self.w0.iter().enumerate() {
            let _ = write!(s, "  {w0:>8}");
            for j in 0..self.w50.len() {
                let c = &self.cells[i * self.w50.len() + j];
                let mark = if c.default { "*" } else { " " };
                let v = c.pi_hat.map_or_else(|| "error".to_string(), |p| format!("{p:.3}"));
                let _ = write!(s, " {v:>7}{mark}");
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(s, "  spread {:.3}", self.spread);
        for c in self.cells.iter().filter(|c| c.error.is_some()) {
            let _ = writeln!(s, "  ({}, {}): {}", c.w0, c.w50, c.error.as_deref().unwrap_or_default());
        }
        s
    }
}
