//! Verification experiments and their reports.
//!
//! An [`ExperimentConfig`] selects weights, norms, degrees, test functions
//! and experiments. [`run`] evaluates every cell (weight, function, p, n) in
//! parallel, collects the rows in a fixed order and assembles a
//! [`VerifyReport`] whose groups carry the pass/fail verdicts.

pub mod battery;
mod experiments;
pub mod report;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use battery::TestFunction;
pub use experiments::{tail_battery, Context, WeightRun};
pub use report::{Criteria, GroupSummary, RowKind, Status, VerifyReport, VerifyRow, WeightHeader};

use crate::approx::Norm;
use crate::error::{Error, Result};
use crate::orthopoly::MAX_DEGREE;
use crate::weights::WeightConfig;

/// `git describe` of the build, or `unknown`.
pub const CODE_VERSION: &str = env!("EXPWEIGHT_GIT_DESCRIBE");

/// Experiments selectable in a config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Derivative error of the best approximation against `T^{3/4}(a_n) E_{p,n-1}(f')`.
    Simultaneous,
    /// Eta scaling with deliberately perturbed polynomials, plus Markov-Bernstein rows.
    Perturbed,
    /// Orders `1..=derivative_order`, with relaxed rows.
    HigherDerivatives,
    /// `E_{1,2n-1}` of step functions.
    StepL1,
    /// Derivative, decay and integration-by-parts checks of `I(h)`.
    TailOperator,
    Favard,
    VpNearBest,
    VpPrimitive,
    /// MRS, zero spacing, Christoffel and recurrence-coefficient relations.
    Asymptotics,
    /// `T(a_n) / (n/a_n)^{2/3}` over `n = 2^k`.
    MrsGrowth,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Simultaneous,
        Experiment::Perturbed,
        Experiment::HigherDerivatives,
        Experiment::StepL1,
        Experiment::TailOperator,
        Experiment::Favard,
        Experiment::VpNearBest,
        Experiment::VpPrimitive,
        Experiment::Asymptotics,
        Experiment::MrsGrowth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Simultaneous => "simultaneous",
            Experiment::Perturbed => "perturbed",
            Experiment::HigherDerivatives => "higher_derivatives",
            Experiment::StepL1 => "step_l1",
            Experiment::TailOperator => "tail_operator",
            Experiment::Favard => "favard",
            Experiment::VpNearBest => "vp_near_best",
            Experiment::VpPrimitive => "vp_primitive",
            Experiment::Asymptotics => "asymptotics",
            Experiment::MrsGrowth => "mrs_growth",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.as_str()).collect();
                Error::Config(format!("unknown experiment `{s}` (known: {})", names.join(", ")))
            })
    }
}

/// JSON configuration of a `verify` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub weights: Vec<WeightConfig>,
    pub experiments: Vec<Experiment>,
    pub p: Vec<Norm>,
    pub n_min: usize,
    pub n_max: usize,
    pub functions: Vec<String>,
    /// Ratios must lie in `[1/band, band]` (upper end only for inequalities).
    pub band: f64,
    /// Limit for `max/median` (inequalities) or `max/min` (two-sided relations).
    pub stability: f64,
    /// Relative spread allowed for the eta-scaling constant.
    pub eta_spread: f64,
    /// `eta / E_{p,n}(f)` values for the perturbed runs.
    pub eta_factors: Vec<f64>,
    /// Highest derivative order for the higher-derivative runs.
    pub derivative_order: usize,
    /// Degrees for the step-function runs (approximating degree `2n - 1`).
    pub step_n: Vec<usize>,
    /// Jump locations as multiples of `a_n`.
    pub step_x: Vec<f64>,
    /// Output directory for `verify`; `None` keeps the report in memory.
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            weights: vec![WeightConfig { family: "erdos".into(), alpha: Some(2.0), u: Some(0.0), l: Some(1), terms: None }],
            experiments: vec![Experiment::Simultaneous],
            p: vec![Norm::L2, Norm::Linf],
            n_min: 4,
            n_max: 16,
            functions: vec!["sin".into(), "xgauss".into(), "arctan".into()],
            band: 20.0,
            stability: 10.0,
            eta_spread: 0.2,
            eta_factors: vec![1.0, 10.0, 20.0, 40.0],
            derivative_order: 2,
            step_n: vec![2, 4, 6, 8],
            step_x: vec![0.0, 0.5, 1.0, 1.5],
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn criteria(&self) -> Criteria {
        Criteria { band: self.band, stability: self.stability, eta_spread: self.eta_spread }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.weights.is_empty() {
            return bad("no weights given".into());
        }
        for w in &self.weights {
            w.build()?;
        }
        if self.experiments.is_empty() {
            return bad("no experiments given".into());
        }
        if self.n_min < 1 || self.n_min > self.n_max {
            return bad(format!("need 1 <= n_min <= n_max, got {}..{}", self.n_min, self.n_max));
        }
        // v_n has degree 2n - 1 and the perturbed runs use p_{n+3}
        if 2 * self.n_max > MAX_DEGREE {
            return bad(format!("n_max {} exceeds {} (degree 2n must stay <= {MAX_DEGREE})", self.n_max, MAX_DEGREE / 2));
        }
        if !(self.band > 1.0) || !(self.stability >= 1.0) || !(self.eta_spread > 0.0) {
            return bad("band must exceed 1, stability must be >= 1, eta_spread positive".into());
        }
        if self.p.is_empty() {
            return bad("no norms given".into());
        }
        if self.eta_factors.iter().any(|&e| !(e >= 1.0)) {
            return bad("eta factors must be >= 1".into());
        }
        if self.derivative_order == 0 || self.derivative_order > battery::MAX_DERIVATIVE {
            return bad(format!("derivative_order must be in 1..={}", battery::MAX_DERIVATIVE));
        }
        if self.step_n.iter().any(|&n| n == 0 || 2 * n > MAX_DEGREE) {
            return bad(format!("step_n entries must be in 1..={}", MAX_DEGREE / 2));
        }
        if self.step_x.iter().any(|x| !x.is_finite()) {
            return bad("step_x entries must be finite".into());
        }
        for f in &self.functions {
            if !battery::NAMES.contains(&f.as_str()) {
                return bad(format!("unknown test function `{f}` (known: {})", battery::NAMES.join(", ")));
            }
        }
        Ok(())
    }
}

/// Runs every configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let ctx = Context::new(cfg)?;
    ctx.run()
}

/// Runs and writes the artifacts to `cfg.output_dir` when set.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(VerifyReport, Vec<PathBuf>)> {
    let rep = run(cfg)?;
    let files = match &cfg.output_dir {
        Some(dir) => rep.write(dir)?,
        None => Vec::new(),
    };
    Ok((rep, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
        let partial = ExperimentConfig::from_json(r#"{"n_max": 8, "p": ["1"]}"#).unwrap();
        assert_eq!(partial.n_max, 8);
        assert_eq!(partial.p, vec![Norm::L1]);
        for bad in [
            r#"{"n_max": 21}"#,
            r#"{"n_min": 0}"#,
            r#"{"functions": ["cosh"]}"#,
            r#"{"weights": [{"family": "gauss"}]}"#,
            r#"{"experiments": ["nothing"]}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"band": 0.5}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
        assert_eq!("step_l1".parse::<Experiment>().unwrap(), Experiment::StepL1);
        assert!("theorem".parse::<Experiment>().is_err());
    }
}
