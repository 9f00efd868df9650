use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::iterate::IterationConfig;
use crate::mapping::OracleConfig;

/// Random affine family for the boundedness/fixed-point equivalence:
/// `T x = A x + b` on the orthant with `A = ρ M / ‖M‖`, `M` entrywise
/// non-negative, plus identity-plus-translation maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    pub dims: Vec<usize>,
    pub radii: Vec<f64>,
    pub trials_per_cell: usize,
    /// Identity maps; every fourth one has `b = 0`, the rest `b != 0`.
    pub identity_trials: usize,
    /// Range of the entries of `b`.
    pub b_range: (f64, f64),
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            dims: vec![2, 5, 20],
            radii: vec![0.5, 0.8, 0.95, 1.0],
            trials_per_cell: 10,
            identity_trials: 12,
            b_range: (0.1, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    /// Exponent of the ℓp norm used by every scenario that does not set its own.
    pub p: f64,
    /// Pairs drawn by the sampled hypothesis verifiers.
    pub samples: usize,
    pub iteration: IterationConfig,
    pub oracle: OracleConfig,
    /// `‖Tz - z‖` bound for computed centers and limits.
    pub fixed_tol: f64,
    /// Distance to a closed-form fixed point.
    pub exact_tol: f64,
    /// Constraint slack of the asymptotic center.
    pub feasibility_tol: f64,
    /// `‖x_n - z‖` at termination for the strong-convergence checks.
    pub strong_tol: f64,
    /// Allowed decrease between consecutive norms.
    pub norm_monotone_tol: f64,
    /// Starting points `x <= Tx` drawn per scenario for the domination check.
    pub corollary_samples: usize,
    pub include_corpus: bool,
    pub family: FamilyConfig,
    pub scenarios: Vec<Scenario>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            p: 2.0,
            samples: 1000,
            iteration: IterationConfig {
                bound_threshold: 1e4,
                ..IterationConfig::default()
            },
            oracle: OracleConfig::default(),
            fixed_tol: 1e-6,
            exact_tol: 1e-5,
            feasibility_tol: 1e-9,
            strong_tol: 1e-8,
            norm_monotone_tol: 1e-12,
            corollary_samples: 5,
            include_corpus: true,
            family: FamilyConfig::default(),
            scenarios: Vec::new(),
        }
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidExponent(self.p));
        }
        self.iteration.validate()?;
        for (name, t) in [
            ("fixed_tol", self.fixed_tol),
            ("exact_tol", self.exact_tol),
            ("feasibility_tol", self.feasibility_tol),
            ("strong_tol", self.strong_tol),
            ("norm_monotone_tol", self.norm_monotone_tol),
        ] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be a non-negative number")));
            }
        }
        let f = &self.family;
        if f.dims.contains(&0) {
            return Err(Error::InvalidParameter("family dimensions must be positive".into()));
        }
        if f.radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return Err(Error::InvalidParameter("family radii must lie in (0, 1]".into()));
        }
        if !(f.b_range.0 > 0.0 && f.b_range.0 <= f.b_range.1) {
            return Err(Error::InvalidParameter("b_range must be 0 < lo <= hi".into()));
        }
        let mut ids: Vec<&str> = self.scenarios.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("scenario ids must be unique".into()));
        }
        Ok(())
    }
}
