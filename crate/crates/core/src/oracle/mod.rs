//! Independent verification machinery: quadrature oracles for the
//! closed-form predictives, exhaustive posterior enumeration for tiny
//! instances, a joint-distribution (Geweke-style) sampler check, and the
//! pass/fail suite the `validate` command runs.

mod enumerate;
mod geweke;
mod quad;
mod report;
mod suite;

pub use enumerate::{
    crf_prior_total_mass, enumerate_crf_prior, enumerate_exact_posterior, CanonicalConfig,
    ExactPosterior, MAX_ENUM_CUSTOMERS,
};
pub use geweke::{geweke_check, GewekeReport, GewekeStat};
pub use quad::{nb_normalization_sum, quad_pred_gp, quad_pred_ng1, t_normalization_1d, QuadSpec};
pub use report::{Check, ValidationReport};
pub use suite::{
    check_block_three_way, check_chain_vs_enumeration, check_determinism, check_enumeration,
    check_forward_marginals, check_geweke, check_gp_closed_vs_quad, check_nb_normalization,
    check_ng_closed_vs_quad, check_t_normalization, run_validation, Grid,
};

/// Fraction of observations whose inferred dish matches the ground truth
/// under the best injective mapping of inferred labels onto true labels.
pub fn label_agreement(truth: &[Vec<usize>], inferred: &[Vec<usize>]) -> f64 {
    assert_eq!(truth.len(), inferred.len(), "group count mismatch");
    let total: usize = truth.iter().map(|g| g.len()).sum();
    if total == 0 {
        return 1.0;
    }
    let k_true = truth.iter().flatten().max().map_or(0, |m| m + 1);
    let k_inf = inferred.iter().flatten().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; k_true]; k_inf];
    for (tg, ig) in truth.iter().zip(inferred) {
        assert_eq!(tg.len(), ig.len(), "group size mismatch");
        for (&t, &i) in tg.iter().zip(ig) {
            counts[i][t] += 1;
        }
    }
    // best injective map from inferred to true labels, by bitmask DP over
    // true labels (cluster counts are small here)
    assert!(k_true <= 16, "too many true labels for exact matching");
    let mut dp = vec![0usize; 1 << k_true];
    for row in &counts {
        let mut next = dp.clone(); // leaving this inferred label unmatched
        for (mask, &base) in dp.iter().enumerate() {
            for (t, &hits) in row.iter().enumerate() {
                if mask & (1 << t) == 0 {
                    let m2 = mask | (1 << t);
                    next[m2] = next[m2].max(base + hits);
                }
            }
        }
        dp = next;
    }
    let best = dp.iter().max().copied().unwrap_or(0);
    best as f64 / total as f64
}
