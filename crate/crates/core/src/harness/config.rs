//! Experiment configuration as loaded from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::testfn::TestFunction;

use super::analytic::CompactRect;

/// Largest modulus for which characters are enumerated in full.
pub const MAX_ENUMERATED_MODULUS: u64 = 20_000;
pub const MIN_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    QmConvergence,
    FixedMLaw,
    M1m2Equivalence,
    AnalyticConvergence,
    CovarianceCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::QmConvergence => "qm-convergence",
            ExperimentKind::FixedMLaw => "fixed-m-law",
            ExperimentKind::M1m2Equivalence => "m1m2-equivalence",
            ExperimentKind::AnalyticConvergence => "analytic-convergence",
            ExperimentKind::CovarianceCheck => "covariance-check",
        }
    }
}

/// Numerical tolerances and the thresholds the experiment checks use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Quadrature tolerance for cached `f̂` values.
    pub fourier: f64,
    /// Panel-doubling tolerance for integrals against `f`.
    pub quadrature: f64,
    /// Target accuracy of pointwise `L(s, χ)`.
    pub pointwise: f64,
    /// Allowed relative change of a sup-norm under grid refinement.
    pub refinement: f64,
    /// Allowed relative gap between the Cauchy-ring and direct sup-norms.
    pub cauchy: f64,
    /// Monte Carlo agreement in standard errors.
    pub standard_errors: f64,
    /// Relative agreement of the kernel and enumeration routes.
    pub two_route: f64,
    /// Allowed ratio between `E_{q,M}` and the coefficient tail.
    pub tail_factor: f64,
    /// Final distance must be below this multiple of the split-half floor.
    pub floor_factor: f64,
    /// Absolute agreement of the corrected prime sum with `log ζ(1+iu)`.
    pub kernel: f64,
    /// Largest modulus for which the enumeration route is also run.
    pub enumeration_max_q: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fourier: 1e-12,
            quadrature: 1e-10,
            pointwise: 1e-8,
            refinement: 0.01,
            cauchy: 0.05,
            standard_errors: 5.0,
            two_route: 1e-6,
            tail_factor: 2.0,
            floor_factor: 3.0,
            kernel: 1e-3,
            enumeration_max_q: 211,
        }
    }
}

/// One experiment. Grids unused by the chosen experiment may stay empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<u64>,
    /// Truncation lengths `M`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<u64>,
    /// Paired with `m2` entry by entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m1: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m2: Vec<u64>,
    /// Prime cutoffs `N`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigma: Vec<f64>,
    /// Points `x` on the critical line.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<f64>,
    /// Offsets `u` for the kernel comparison against `log ζ(1+iu)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub u: Vec<f64>,
    #[serde(default)]
    pub test_function: TestFunction,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Complete periods summed by the variance kernel.
    #[serde(default = "default_blocks")]
    pub blocks: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect: Option<CompactRect>,
    /// Number of compacts in the Fréchet metric.
    #[serde(default = "default_frechet_terms")]
    pub frechet_terms: u32,
    /// Prime cutoff for the kernel comparison against `log ζ(1+iu)`.
    #[serde(default = "default_kernel_cutoff")]
    pub kernel_cutoff: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_samples() -> usize {
    10_000
}

fn default_blocks() -> u64 {
    3
}

fn default_frechet_terms() -> u32 {
    4
}

fn default_kernel_cutoff() -> u64 {
    1_000_000
}

fn increasing<T: PartialOrd + Copy + std::fmt::Debug>(name: &str, grid: &[T], required: bool) -> Result<()> {
    if required && grid.is_empty() {
        return Err(Error::InvalidArgument(format!("grid `{name}` must not be empty")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(format!("grid `{name}` must be strictly increasing: {grid:?}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// A configuration with the given kind and every grid empty.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            q: Vec::new(),
            m: Vec::new(),
            m1: Vec::new(),
            m2: Vec::new(),
            n: Vec::new(),
            sigma: Vec::new(),
            t: Vec::new(),
            u: Vec::new(),
            test_function: TestFunction::default(),
            seed: 0,
            samples: default_samples(),
            blocks: default_blocks(),
            rect: None,
            frechet_terms: default_frechet_terms(),
            kernel_cutoff: default_kernel_cutoff(),
            output: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        let kind = self.experiment;
        increasing("q", &self.q, matches!(kind, QmConvergence | FixedMLaw | AnalyticConvergence))?;
        increasing("m", &self.m, matches!(kind, QmConvergence | FixedMLaw | AnalyticConvergence))?;
        increasing("m1", &self.m1, kind == M1m2Equivalence)?;
        increasing("m2", &self.m2, kind == M1m2Equivalence)?;
        increasing("n", &self.n, kind == CovarianceCheck)?;
        increasing("sigma", &self.sigma, false)?;
        increasing("t", &self.t, kind == CovarianceCheck)?;
        increasing("u", &self.u, false)?;
        if self.u.iter().any(|&u| u.abs() < 1e-3) {
            return Err(Error::InvalidArgument("kernel offsets must stay away from u = 0".into()));
        }
        if self.m1.len() != self.m2.len() {
            return Err(Error::InvalidArgument(format!(
                "m1 and m2 are paired and must have equal length ({} vs {})",
                self.m1.len(),
                self.m2.len()
            )));
        }
        if self.q.iter().any(|&q| q < 2) {
            return Err(Error::InvalidArgument("every modulus must be at least 2".into()));
        }
        if let Some(&q) = self.q.iter().find(|&&q| q > MAX_ENUMERATED_MODULUS) {
            return Err(Error::Infeasible(format!(
                "q = {q} exceeds the enumeration limit {MAX_ENUMERATED_MODULUS}"
            )));
        }
        if self.m.contains(&0) || self.m1.contains(&0) || self.m2.contains(&0) {
            return Err(Error::InvalidArgument("truncation lengths start at 1".into()));
        }
        if self.n.iter().any(|&n| n < 2) || self.kernel_cutoff < 2 {
            return Err(Error::InvalidArgument("prime cutoffs must be at least 2".into()));
        }
        let sampled = matches!(kind, FixedMLaw | M1m2Equivalence | CovarianceCheck | AnalyticConvergence);
        if sampled && self.samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "at least {MIN_SAMPLES} samples are required, got {}",
                self.samples
            )));
        }
        if self.blocks == 0 {
            return Err(Error::InvalidArgument("blocks must be at least 1".into()));
        }
        if self.sigma.iter().any(|&s| s <= 0.5) {
            return Err(Error::InvalidArgument("sigma values must exceed 1/2".into()));
        }
        if let Some(rect) = &self.rect {
            rect.validate()?;
        }
        TestFunction::bump(
            self.test_function.center,
            self.test_function.half_width,
            self.test_function.amplitude,
        )?;
        Ok(())
    }

    /// Parses a configuration, or the `config` field of an emitted JSON report.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let inner = match value.get("config") {
            Some(c) if value.get("records").is_some() => c.clone(),
            _ => value,
        };
        let cfg: Self = serde_json::from_value(inner)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rules() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::QmConvergence);
        assert!(cfg.validate().is_err());
        cfg.q = vec![101, 211];
        cfg.m = vec![5, 20];
        cfg.validate().unwrap();
        cfg.m = vec![20, 5];
        assert!(cfg.validate().is_err());
        cfg.m = vec![5];
        cfg.q = vec![101, 50_021];
        assert!(matches!(cfg.validate(), Err(Error::Infeasible(_))));
        let mut law = ExperimentConfig::new(ExperimentKind::FixedMLaw);
        law.q = vec![101];
        law.m = vec![30];
        law.samples = 50;
        assert!(law.validate().is_err());
    }

    #[test]
    fn parses_minimal_json_and_rejects_unknown_fields() {
        let cfg = ExperimentConfig::from_json_str(r#"{"experiment":"m1m2-equivalence","m1":[1,8],"m2":[1,2]}"#).unwrap();
        assert_eq!(cfg.samples, 10_000);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert!(ExperimentConfig::from_json_str(r#"{"experiment":"m1m2-equivalence","m1":[1],"m2":[1],"bogus":1}"#).is_err());
    }
}
