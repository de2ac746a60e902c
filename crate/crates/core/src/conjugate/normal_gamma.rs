//! Normal-Gamma prior over the mean and isotropic precision of a Gaussian:
//! Student-t predictives and the closed-form marginal likelihood.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::conjugate::stats::VectorStats;
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;

/// Parameters (μ, κ, α, β) of a Normal-Gamma distribution over the mean and
/// isotropic precision λ of a d-dimensional Gaussian: λ ~ Gamma(α, β),
/// μ | λ ~ N(μ₀, (κλ)⁻¹ I). Carries both prior and posterior forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalGammaParams {
    pub mu: Vec<f64>,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl NormalGammaParams {
    pub fn new(mu: Vec<f64>, kappa: f64, alpha: f64, beta: f64) -> Result<Self> {
        if mu.is_empty() || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidHyper(
                "location vector must be nonempty and finite".into(),
            ));
        }
        for (name, v) in [("kappa", kappa), ("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidHyper(format!(
                    "NormalGamma {name}={v} must be positive and finite"
                )));
            }
        }
        Ok(Self {
            mu,
            kappa,
            alpha,
            beta,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Posterior after folding in `stats`:
    ///
    ///   κₙ = κ + n,  μₙ = (κμ + Σx)/κₙ,  αₙ = α + dn/2,
    ///   βₙ = β + S/2 + κn‖x̄ − μ‖²/(2κₙ)
    ///
    /// with S the centered sum of squares. Empty stats return the prior.
    pub fn posterior(&self, stats: &VectorStats) -> Self {
        assert_eq!(stats.dim(), self.dim(), "statistics dimension mismatch");
        if stats.is_empty() {
            return self.clone();
        }
        let n = stats.n() as f64;
        let d = self.dim() as f64;
        let kappa_n = self.kappa + n;
        let mu_n: Vec<f64> = self
            .mu
            .iter()
            .zip(stats.sum())
            .map(|(m, s)| (self.kappa * m + s) / kappa_n)
            .collect();
        let mean = stats.mean();
        let dev_sq: f64 = mean
            .iter()
            .zip(&self.mu)
            .map(|(xb, m)| (xb - m) * (xb - m))
            .sum();
        Self {
            mu: mu_n,
            kappa: kappa_n,
            alpha: self.alpha + 0.5 * d * n,
            beta: self.beta
                + 0.5 * stats.centered_sum_sq()
                + 0.5 * self.kappa * n / kappa_n * dev_sq,
        }
    }

    /// Log marginal likelihood of the observations summarized by `stats`:
    ///
    ///   (d/2)(log κ − log κₙ) + α log β − αₙ log βₙ
    ///     + log Γ(αₙ) − log Γ(α) − (nd/2) log 2π
    ///
    /// Empty stats give 0.
    pub fn log_marginal(&self, stats: &VectorStats) -> f64 {
        if stats.is_empty() {
            return 0.0;
        }
        let post = self.posterior(stats);
        let n = stats.n() as f64;
        let d = self.dim() as f64;
        0.5 * d * (self.kappa.ln() - post.kappa.ln()) + self.alpha * self.beta.ln()
            - post.alpha * post.beta.ln()
            + ln_gamma(post.alpha)
            - ln_gamma(self.alpha)
            - 0.5 * n * d * LN_2PI
    }

    /// Log density at `x` of the predictive multivariate Student-t
    /// t_{2α}(x | μ, σ²I) with σ² = β(κ+1)/(ακ):
    ///
    ///   log Γ((ν+d)/2) − log Γ(ν/2) − (d/2) log(νπσ²)
    ///     − ((ν+d)/2) log(1 + ‖x−μ‖²/(νσ²))
    ///
    /// where ν = 2α. Call on the posterior parameters to condition on data.
    pub fn log_pred_one(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "query dimension mismatch");
        assert!(x.iter().all(|v| v.is_finite()), "non-finite query");
        let d = self.dim() as f64;
        let nu = 2.0 * self.alpha;
        let sigma_sq = self.beta * (self.kappa + 1.0) / (self.alpha * self.kappa);
        let dev_sq: f64 = x
            .iter()
            .zip(&self.mu)
            .map(|(xi, m)| (xi - m) * (xi - m))
            .sum();
        ln_gamma(0.5 * (nu + d))
            - ln_gamma(0.5 * nu)
            - 0.5 * d * (nu * std::f64::consts::PI * sigma_sq).ln()
            - 0.5 * (nu + d) * (1.0 + dev_sq / (nu * sigma_sq)).ln()
    }

    /// Log density of a whole block of observations under these parameters,
    /// defined as the marginal-likelihood ratio of adding the block; with
    /// posterior parameters this is exactly ∫ Π p(x|φ) g(φ) dφ / ∫ g(φ) dφ.
    /// Reduces to [`log_pred_one`](Self::log_pred_one) for singleton blocks.
    pub fn log_pred_block(&self, block: &VectorStats) -> f64 {
        assert!(!block.is_empty(), "block predictive of an empty block");
        self.log_marginal(block)
    }
}
