//! Gamma prior over a Poisson rate: Negative-Binomial predictives and the
//! closed-form marginal likelihood, all in log domain.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::conjugate::stats::CountStats;
use crate::error::{Error, Result};
use crate::util::ln_factorial;

/// Shape/rate parameters of a Gamma distribution over a Poisson rate. The
/// same type carries the prior and any posterior derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoissonParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaPoissonParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidHyper(format!(
                "Gamma(alpha={alpha}, beta={beta}) requires positive finite parameters"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Posterior after folding in `stats`: (α + Σx, β + n). Empty stats
    /// return the prior unchanged (the new-dish case).
    pub fn posterior(&self, stats: &CountStats) -> Self {
        Self {
            alpha: self.alpha + stats.sum() as f64,
            beta: self.beta + stats.n() as f64,
        }
    }

    /// Log marginal likelihood of the observations summarized by `stats`
    /// under these parameters:
    ///
    /// log [ (Π x!)⁻¹ · βᵃ Γ(α + Σx) / (Γ(α) (β + n)^(α+Σx)) ]
    ///
    /// Empty stats give 0.
    pub fn log_marginal(&self, stats: &CountStats) -> f64 {
        if stats.is_empty() {
            return 0.0;
        }
        let a_post = self.alpha + stats.sum() as f64;
        -stats.sum_log_fact() + self.alpha * self.beta.ln() - ln_gamma(self.alpha)
            + ln_gamma(a_post)
            - a_post * (self.beta + stats.n() as f64).ln()
    }

    /// Log pmf at `x` of the Negative Binomial predictive
    /// NB(r = α, p = β/(β+1)):
    ///
    /// log [ Γ(x+α) / (Γ(α) x!) · βᵃ / (β+1)^(x+α) ]
    ///
    /// Call on the posterior parameters to condition on data.
    pub fn log_pred_one(&self, x: u64) -> f64 {
        let xf = x as f64;
        ln_gamma(xf + self.alpha) - ln_gamma(self.alpha) - ln_factorial(x)
            + self.alpha * self.beta.ln()
            - (xf + self.alpha) * (self.beta + 1.0).ln()
    }

    /// Log density of a whole block of observations (a table) under these
    /// parameters:
    ///
    /// log [ Γ(Σ_T x + α) / (Γ(α) Π_T x!) · βᵃ / (β+|T|)^(Σ_T x+α) ]
    ///
    /// Equals the marginal-likelihood ratio of adding the block, and reduces
    /// to [`log_pred_one`](Self::log_pred_one) for singleton blocks.
    pub fn log_pred_block(&self, block: &CountStats) -> f64 {
        assert!(!block.is_empty(), "block predictive of an empty block");
        self.log_marginal(block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> GammaPoissonParams {
        GammaPoissonParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(GammaPoissonParams::new(0.0, 1.0).is_err());
        assert!(GammaPoissonParams::new(1.0, -2.0).is_err());
        assert!(GammaPoissonParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn posterior_update() {
        let post = params(2.0, 3.0).posterior(&CountStats::from_values(&[1, 2]));
        assert_eq!(post, params(5.0, 5.0));
        // new-dish case: empty stats leave the prior untouched
        let post = params(1.0, 1.0).posterior(&CountStats::new());
        assert_eq!(post, params(1.0, 1.0));
        let post = params(1.0, 1.0).posterior(&CountStats::from_values(&[0, 0]));
        assert_eq!(post, params(1.0, 3.0));
    }

    #[test]
    fn pred_one_geometric_cases() {
        let p = params(1.0, 1.0);
        assert!((p.log_pred_one(0) - 0.5f64.ln()).abs() < 1e-14);
        assert!((p.log_pred_one(1) - 0.25f64.ln()).abs() < 1e-14);
        let p = params(3.0, 2.0);
        assert!((p.log_pred_one(0) - (8.0f64 / 27.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn log_marginal_small_cases() {
        let p = params(1.0, 1.0);
        assert_eq!(p.log_marginal(&CountStats::new()), 0.0);
        assert!((p.log_marginal(&CountStats::from_values(&[0])) - 0.5f64.ln()).abs() < 1e-14);
        // {2}: Γ(3) / (2! · 2³) = 2/16 = 1/8
        assert!((p.log_marginal(&CountStats::from_values(&[2])) - 0.125f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn pred_block_small_cases() {
        let p = params(1.0, 1.0);
        let b0 = CountStats::from_values(&[0]);
        assert!((p.log_pred_block(&b0) - 0.5f64.ln()).abs() < 1e-14);
        assert!((p.log_pred_block(&b0) - p.log_pred_one(0)).abs() < 1e-14);
        let b00 = CountStats::from_values(&[0, 0]);
        assert!((p.log_pred_block(&b00) - (1.0f64 / 3.0).ln()).abs() < 1e-14);
        let b11 = CountStats::from_values(&[1, 1]);
        assert!((p.log_pred_block(&b11) - (2.0f64 / 27.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn block_equals_marginal_ratio() {
        let prior = params(2.0, 0.5);
        let cond = CountStats::from_values(&[3, 0, 5]);
        let block = CountStats::from_values(&[1, 4]);
        let mut all = cond.clone();
        all.merge(&block);
        let ratio = prior.log_marginal(&all) - prior.log_marginal(&cond);
        let direct = prior.posterior(&cond).log_pred_block(&block);
        assert!((ratio - direct).abs() < 1e-12, "{ratio} vs {direct}");
    }
}
