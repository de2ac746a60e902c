//! Conjugate likelihood families: sufficient statistics, posterior updates
//! and log-domain predictive densities used by the collapsed sampler.
//!
//! Two families are supported: Gamma-Poisson for counts and
//! Normal-Gamma-Normal for real vectors with isotropic precision. Both
//! expose the same three predictive quantities:
//!
//! * the marginal likelihood of a set of observations,
//! * the single-observation predictive (customer level),
//! * the block predictive for a whole table (table level),
//!
//! where conditioning on existing observations happens by evaluating the
//! predictive at the posterior parameters. Everything stays in log domain;
//! mixture weights are normalized via max-shifted exp sums.

mod gamma_poisson;
mod normal_gamma;
mod stats;

pub use gamma_poisson::GammaPoissonParams;
pub use normal_gamma::NormalGammaParams;
pub use stats::{CountStats, SuffStats, VectorStats};

use crate::data::{ObsKind, Observation};
use crate::error::{Error, Result};

/// Prior of whichever conjugate family the model runs with.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyPrior {
    GammaPoisson(GammaPoissonParams),
    NormalGamma(NormalGammaParams),
}

impl FamilyPrior {
    /// The observation kind this family models.
    pub fn obs_kind(&self) -> ObsKind {
        match self {
            FamilyPrior::GammaPoisson(_) => ObsKind::Count,
            FamilyPrior::NormalGamma(p) => ObsKind::RealVector { dim: p.dim() },
        }
    }

    pub fn empty_stats(&self) -> SuffStats {
        SuffStats::empty(self.obs_kind())
    }

    /// Log marginal likelihood of `stats` under this prior; 0 when empty.
    pub fn log_marginal(&self, stats: &SuffStats) -> f64 {
        match self {
            FamilyPrior::GammaPoisson(p) => p.log_marginal(stats.as_count()),
            FamilyPrior::NormalGamma(p) => p.log_marginal(stats.as_vector()),
        }
    }

    /// Log predictive density of one observation given the observations
    /// summarized by `conditioning` (empty stats give the prior predictive,
    /// i.e. the new-dish case).
    pub fn log_pred_one(&self, conditioning: &SuffStats, x: &Observation) -> f64 {
        match (self, x) {
            (FamilyPrior::GammaPoisson(p), Observation::Count(v)) => {
                p.posterior(conditioning.as_count()).log_pred_one(*v)
            }
            (FamilyPrior::NormalGamma(p), Observation::Vector(v)) => {
                p.posterior(conditioning.as_vector()).log_pred_one(v)
            }
            _ => panic!("observation kind does not match the model family"),
        }
    }

    /// Log predictive density of a whole block given `conditioning`.
    pub fn log_pred_block(&self, conditioning: &SuffStats, block: &SuffStats) -> f64 {
        match self {
            FamilyPrior::GammaPoisson(p) => p
                .posterior(conditioning.as_count())
                .log_pred_block(block.as_count()),
            FamilyPrior::NormalGamma(p) => p
                .posterior(conditioning.as_vector())
                .log_pred_block(block.as_vector()),
        }
    }
}

/// Model hyperparameters: both concentration parameters and the family
/// prior over dish parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HdpHyper {
    pub gamma: f64,
    pub alpha0: f64,
    pub prior: FamilyPrior,
}

impl HdpHyper {
    pub fn new(gamma: f64, alpha0: f64, prior: FamilyPrior) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("alpha0", alpha0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidHyper(format!(
                    "concentration {name}={v} must be positive and finite"
                )));
            }
        }
        Ok(Self {
            gamma,
            alpha0,
            prior,
        })
    }
}
