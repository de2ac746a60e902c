//! Numerical quadrature oracles for the closed-form predictives.
//!
//! The integrands are evaluated as raw likelihood-times-prior products in
//! shifted log domain; no conjugate update is reused on this path, so
//! agreement with the closed forms is an independent check. Rules are
//! generated with the Golub-Welsch construction (eigen-decomposition of the
//! Jacobi matrix); the half-line rules are generalized Gauss-Laguerre with
//! the weight fitted to the integrand's observed envelope, and every result
//! must survive a node-doubling convergence test.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::conjugate::{GammaPoissonParams, NormalGammaParams};
use crate::error::{Error, Result};
use crate::util::{ln_factorial, log_sum_exp};

/// Quadrature settings: starting node count (>= 32), the cap for the
/// node-doubling convergence loop, and the relative tolerance the doubling
/// must reach.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    pub base_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            base_nodes: 64,
            max_nodes: 1024,
            rel_tol: 1e-9,
        }
    }
}

impl QuadSpec {
    fn validate(&self) {
        assert!(self.base_nodes >= 32, "node count must be >= 32");
        assert!(self.max_nodes >= self.base_nodes);
        assert!(self.rel_tol > 0.0);
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix and the first component of
/// each normalized eigenvector, by the implicit-shift QL algorithm. Input:
/// `diag` of length n, `offdiag` of length n-1. Output sorted ascending.
fn tridiag_eigen_first(diag: Vec<f64>, offdiag: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    assert_eq!(offdiag.len() + 1, n);
    let mut d = diag;
    let mut e = offdiag;
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 64, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    (
        idx.iter().map(|&i| d[i]).collect(),
        idx.iter().map(|&i| z[i]).collect(),
    )
}

/// Nodes and weights integrating ∫₀^∞ y^a e^{-y} f(y) dy exactly for
/// polynomial f up to degree 2n-1. Requires a > -1.
fn gauss_gen_laguerre(n: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(a > -1.0, "Laguerre weight parameter must be > -1, got {a}");
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + a + 1.0).collect();
    let offdiag: Vec<f64> = (1..n).map(|i| (i as f64 * (i as f64 + a)).sqrt()).collect();
    let (nodes, first) = tridiag_eigen_first(diag, offdiag);
    let mu0 = ln_gamma(a + 1.0).exp();
    let weights = first.iter().map(|z| mu0 * z * z).collect();
    (nodes, weights)
}

/// Nodes and weights integrating ∫ e^{-t²} f(t) dt.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n).map(|i| (i as f64 / 2.0).sqrt()).collect();
    let (nodes, first) = tridiag_eigen_first(diag, offdiag);
    let mu0 = PI.sqrt();
    let weights = first.iter().map(|z| mu0 * z * z).collect();
    (nodes, weights)
}

/// Nodes and weights integrating ∫₋₁¹ f(t) dt.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    let (nodes, first) = tridiag_eigen_first(diag, offdiag);
    let weights = first.iter().map(|z| 2.0 * z * z).collect();
    (nodes, weights)
}

fn hermite_32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(32))
}

/// log ∫₀^∞ f(λ) dλ by generalized Gauss-Laguerre after substituting
/// λ = y/b against the envelope y^a e^{-y}.
fn log_integral_half_line(log_f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_gen_laguerre(n, a);
    let terms: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&y, &w)| w.ln() + y - a * y.ln() + log_f(y / b))
        .collect();
    log_sum_exp(&terms) - b.ln()
}

/// Fits the envelope y^a e^{-b y} to `log_f` from its numeric mode and
/// curvature (probing local power and tail slope when the mode sits against
/// zero). Only steers the quadrature transform; node doubling still
/// validates the result.
fn fit_half_line_envelope(log_f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut best_t = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut t = -34.0f64;
    while t <= 34.0 {
        let v = log_f(t.exp());
        if v > best {
            best = v;
            best_t = t;
        }
        t += 0.25;
    }
    if !best.is_finite() {
        return (0.0, 1.0);
    }
    // golden-section refinement of the mode in log space
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best_t - 0.25, best_t + 0.25);
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if log_f(m1.exp()) >= log_f(m2.exp()) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let mode = (0.5 * (lo + hi)).exp();
    let h = mode * 1e-4;
    let c2 = (log_f(mode + h) - 2.0 * log_f(mode) + log_f(mode - h)) / (h * h);
    let (a, b) = if best_t > -33.0 && c2 < 0.0 {
        let a = (-c2 * mode * mode).max(0.0);
        (a, (a / mode).max(1e-300))
    } else {
        // monotone toward zero: local power near the origin, decay from the tail
        let eps = 1e-9;
        let p = (log_f(2.0 * eps) - log_f(eps)) / 2f64.ln();
        let mut tail = mode.max(1.0);
        while log_f(tail).is_finite() && log_f(tail) > best - 60.0 && tail < 1e12 {
            tail *= 2.0;
        }
        let slope = (log_f(tail / 2.0) - log_f(tail)) / (tail / 2.0);
        (p, slope.max(1e-300))
    };
    (a.clamp(-0.95, 1e7), b.clamp(1e-12, 1e12))
}

/// Runs the node-doubling convergence loop, returning the log integral at
/// the finest level.
fn converge_half_line(log_f: &dyn Fn(f64) -> f64, a: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    spec.validate();
    let mut n = spec.base_nodes;
    let mut prev = log_integral_half_line(log_f, a, b, n);
    loop {
        n *= 2;
        let cur = log_integral_half_line(log_f, a, b, n);
        let rel = (cur - prev).exp_m1().abs();
        if rel <= spec.rel_tol {
            return Ok(cur);
        }
        if n >= spec.max_nodes {
            return Err(Error::QuadratureNonConvergence { rel, nodes: n });
        }
        prev = cur;
    }
}

fn log_poisson(x: u64, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::NEG_INFINITY;
    }
    x as f64 * rate.ln() - rate - ln_factorial(x)
}

fn log_gamma_pdf(v: f64, shape: f64, rate: f64) -> f64 {
    if v <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * v.ln() - rate * v
}

fn log_normal_pdf(x: f64, mean: f64, precision: f64) -> f64 {
    0.5 * (precision.ln() - (2.0 * PI).ln()) - 0.5 * precision * (x - mean) * (x - mean)
}

/// Customer-level Gamma-Poisson predictive density by quadrature:
/// ∫ Poisson(x|φ) Π_i Poisson(c_i|φ) Gamma(φ|α,β) dφ over the same product
/// without the query factor. The envelope exponents are read directly off
/// the factor list (each Poisson term contributes one unit of decay and its
/// count to the polynomial power).
pub fn quad_pred_gp(
    prior: &GammaPoissonParams,
    conditioning: &[u64],
    x: u64,
    spec: &QuadSpec,
) -> Result<f64> {
    let n = conditioning.len() as f64;
    let sum: u64 = conditioning.iter().sum();
    let log_g = |phi: f64| {
        log_gamma_pdf(phi, prior.alpha, prior.beta)
            + conditioning
                .iter()
                .map(|&c| log_poisson(c, phi))
                .sum::<f64>()
    };
    let log_den = converge_half_line(&log_g, prior.alpha + sum as f64 - 1.0, prior.beta + n, spec)?;
    let log_num_f = |phi: f64| log_poisson(x, phi) + log_g(phi);
    let log_num = converge_half_line(
        &log_num_f,
        prior.alpha + (sum + x) as f64 - 1.0,
        prior.beta + n + 1.0,
        spec,
    )?;
    Ok((log_num - log_den).exp())
}

/// log ∫ N(q₁|μ,λ⁻¹)…N(q_m|μ,λ⁻¹) N(μ|μ₀,(κ₀λ)⁻¹) dμ for fixed λ, by
/// Gauss-Hermite centered on the integrand's mode. The mode and curvature
/// come from one Newton step on the integrand's own log-derivative (exact,
/// since the log-integrand is quadratic in μ).
fn log_inner_mu_integral(points: &[f64], lambda: f64, mu0: f64, kappa0: f64) -> f64 {
    let log_f = |mu: f64| {
        points
            .iter()
            .map(|&q| log_normal_pdf(q, mu, lambda))
            .sum::<f64>()
            + log_normal_pdf(mu, mu0, kappa0 * lambda)
    };
    // d/dμ log f = λ Σ (q − μ) + κ₀λ (μ₀ − μ); d²/dμ² = −λ(m + κ₀)
    let second = -lambda * (points.len() as f64 + kappa0);
    let grad_at = |mu: f64| {
        lambda * points.iter().map(|&q| q - mu).sum::<f64>() + kappa0 * lambda * (mu0 - mu)
    };
    let center = mu0 - grad_at(mu0) / second;
    let scale = (-1.0 / second).sqrt();
    let (nodes, weights) = hermite_32();
    let step = std::f64::consts::SQRT_2 * scale;
    let terms: Vec<f64> = nodes
        .iter()
        .zip(weights)
        .map(|(&t, &w)| w.ln() + t * t + log_f(center + step * t))
        .collect();
    log_sum_exp(&terms) + step.ln()
}

/// Customer-level Normal-Gamma predictive density (d = 1 only) by 2-D
/// quadrature: a Gauss-Hermite pass over μ inside a generalized
/// Gauss-Laguerre pass over λ, with the λ envelope fitted numerically.
pub fn quad_pred_ng1(
    prior: &NormalGammaParams,
    conditioning: &[f64],
    x: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    assert_eq!(prior.dim(), 1, "the quadrature oracle covers d = 1 only");
    let mu0 = prior.mu[0];
    let log_den_f = |lambda: f64| {
        log_gamma_pdf(lambda, prior.alpha, prior.beta)
            + log_inner_mu_integral(conditioning, lambda, mu0, prior.kappa)
    };
    let with_query: Vec<f64> = conditioning
        .iter()
        .copied()
        .chain(std::iter::once(x))
        .collect();
    let log_num_f = |lambda: f64| {
        log_gamma_pdf(lambda, prior.alpha, prior.beta)
            + log_inner_mu_integral(&with_query, lambda, mu0, prior.kappa)
    };
    let (a_den, b_den) = fit_half_line_envelope(&log_den_f);
    let log_den = converge_half_line(&log_den_f, a_den, b_den, spec)?;
    let (a_num, b_num) = fit_half_line_envelope(&log_num_f);
    let log_num = converge_half_line(&log_num_f, a_num, b_num, spec)?;
    Ok((log_num - log_den).exp())
}

/// Σ_x exp(log_pred_one(x)) with the summation cut once a geometric bound
/// on the remaining Negative-Binomial tail drops below 1e-12.
pub fn nb_normalization_sum(params: &GammaPoissonParams) -> f64 {
    let mut total = 0.0;
    let mut x = 0u64;
    loop {
        let pmf = params.log_pred_one(x).exp();
        total += pmf;
        // pmf(x+1)/pmf(x) = (x+α)/(x+1) / (β+1), eventually below 1
        let xf = x as f64;
        let ratio_sup = ((xf + params.alpha) / (xf + 1.0)).max(1.0) / (params.beta + 1.0);
        if ratio_sup < 1.0 {
            let tail_bound = pmf * ratio_sup / (1.0 - ratio_sup);
            if tail_bound < 1e-12 {
                return total;
            }
        }
        x += 1;
        assert!(x < 10_000_000, "NB normalization sum failed to terminate");
    }
}

/// ∫ exp(log_pred_one(x)) dx for the d = 1 Student-t predictive, by
/// Gauss-Legendre on the compactifying substitution x = μ + s·tan θ with
/// node doubling until the change is below 1e-12.
pub fn t_normalization_1d(params: &NormalGammaParams) -> f64 {
    assert_eq!(params.dim(), 1);
    let mu = params.mu[0];
    let s = (params.beta * (params.kappa + 1.0) / (params.alpha * params.kappa)).sqrt();
    let integral = |n: usize| {
        let (nodes, weights) = gauss_legendre(n);
        nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| {
                let theta = t * PI / 2.0;
                let x = mu + s * theta.tan();
                let jac = s * (PI / 2.0) / (theta.cos() * theta.cos());
                w * params.log_pred_one(&[x]).exp() * jac
            })
            .sum::<f64>()
    };
    let mut n = 64;
    let mut prev = integral(n);
    loop {
        n *= 2;
        let cur = integral(n);
        if (cur - prev).abs() < 1e-12 || n >= 4096 {
            return cur;
        }
        prev = cur;
    }
}
