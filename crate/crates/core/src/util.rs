//! Small numeric helpers shared across the crate.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

/// log(Σ exp(x_i)) with the usual max shift. Empty input is -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        if v > max {
            max = v;
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// log(x!) via the log-gamma function.
pub fn ln_factorial(x: u64) -> f64 {
    ln_gamma(x as f64 + 1.0)
}

/// log of the rising factorial a(a+1)...(a+n-1).
pub fn ln_rising_factorial(a: f64, n: u64) -> f64 {
    ln_gamma(a + n as f64) - ln_gamma(a)
}

/// Draws an index proportional to exp(log_weights[i]).
///
/// Single uniform draw, inverse CDF over the max-shifted exponentiated
/// weights; if the draw lands past the accumulated mass (possible only
/// through rounding) the last index is returned.
///
/// Panics if all weights are -inf: a proper mixture always has at least one
/// component with positive mass.
pub fn sample_categorical_log<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> usize {
    assert!(!log_weights.is_empty(), "no weights to sample from");
    let mut max = f64::NEG_INFINITY;
    for &w in log_weights {
        if w > max {
            max = w;
        }
    }
    assert!(
        max > f64::NEG_INFINITY,
        "all categorical weights are zero; improper predictive"
    );
    let weights: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    log_weights.len() - 1
}

/// Mean and (unbiased) variance of a sample.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
