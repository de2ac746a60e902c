//! The verification suite behind `validate`: closed forms against
//! quadrature, predictive normalization, block-predictive route agreement,
//! exact enumeration against hand values and against long Gibbs runs, the
//! joint-distribution check, and forward-sampler seating marginals.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::conjugate::{
    CountStats, FamilyPrior, GammaPoissonParams, HdpHyper, NormalGammaParams, VectorStats,
};
use crate::data::GroupedDataset;
use crate::error::Result;
use crate::oracle::enumerate::{
    crf_prior_total_mass, enumerate_crf_prior, enumerate_exact_posterior, CanonicalConfig,
};
use crate::oracle::geweke::geweke_check;
use crate::oracle::quad::{
    nb_normalization_sum, quad_pred_gp, quad_pred_ng1, t_normalization_1d, QuadSpec,
};
use crate::oracle::report::{Check, ValidationReport};
use crate::sampler::{gibbs_sweep, Corruption, SamplerConfig, ScanOrder};
use crate::state::{InitMode, SeatingState};
use crate::synth::forward_sample;

/// How much of the grid to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// Closed-form and enumeration checks on a reduced grid; a few seconds.
    Quick,
    /// The full grids plus the long statistical checks (chain vs
    /// enumeration, joint-distribution test, forward marginals).
    Full,
}

fn gp_hyper(gamma: f64, alpha0: f64, a: f64, b: f64) -> HdpHyper {
    HdpHyper::new(
        gamma,
        alpha0,
        FamilyPrior::GammaPoisson(GammaPoissonParams::new(a, b).unwrap()),
    )
    .unwrap()
}

/// Gamma-Poisson closed-form predictive against the quadrature oracle.
pub fn check_gp_closed_vs_quad(grid: Grid) -> Result<Vec<Check>> {
    #[allow(clippy::type_complexity)]
    let (alphas, betas, sets, queries): (&[f64], &[f64], &[&[u64]], &[u64]) = match grid {
        Grid::Full => (
            &[0.5, 1.0, 2.0, 5.0],
            &[0.5, 1.0, 3.0],
            &[
                &[],
                &[0],
                &[3],
                &[1, 2],
                &[6, 6],
                &[0, 0, 6],
                &[2, 4, 6, 1],
                &[5, 3, 0, 1, 6],
            ],
            &[0, 1, 2, 3, 5, 7, 10],
        ),
        Grid::Quick => (
            &[0.5, 2.0],
            &[1.0],
            &[&[], &[0], &[1, 2], &[2, 4, 6, 1]],
            &[0, 2, 7],
        ),
    };
    let spec = QuadSpec::default();
    let mut checks = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            let prior = GammaPoissonParams::new(alpha, beta)?;
            for set in sets {
                let stats = CountStats::from_values(set);
                let post = prior.posterior(&stats);
                for &x in queries {
                    let closed = post.log_pred_one(x).exp();
                    let quad = quad_pred_gp(&prior, set, x, &spec)?;
                    checks.push(Check::relative(
                        format!("gp/closed-vs-quad a={alpha} b={beta} cond={set:?} x={x}"),
                        quad,
                        closed,
                        1e-8,
                    ));
                }
            }
        }
    }
    Ok(checks)
}

/// Normal-Gamma (d = 1) closed-form predictive against the 2-D quadrature
/// oracle.
pub fn check_ng_closed_vs_quad(grid: Grid) -> Result<Vec<Check>> {
    #[allow(clippy::type_complexity)]
    let (kappas, alphas, betas, sets, queries): (&[f64], &[f64], &[f64], &[&[f64]], &[f64]) =
        match grid {
            Grid::Full => (
                &[0.1, 1.0, 10.0],
                &[0.5, 1.0, 3.0],
                &[0.5, 2.0],
                &[
                    &[],
                    &[0.5],
                    &[-1.0, 1.0],
                    &[2.0, 2.0, 2.0],
                    &[-3.0, 0.0, 3.0, 1.0],
                ],
                &[0.0, 1.5, -2.7],
            ),
            Grid::Quick => (
                &[1.0],
                &[1.0, 3.0],
                &[2.0],
                &[&[], &[0.5], &[-1.0, 1.0]],
                &[0.0, 1.5],
            ),
        };
    let spec = QuadSpec::default();
    let mu0 = 0.3;
    let mut checks = Vec::new();
    for &kappa in kappas {
        for &alpha in alphas {
            for &beta in betas {
                let prior = NormalGammaParams::new(vec![mu0], kappa, alpha, beta)?;
                for set in sets {
                    let values: Vec<Vec<f64>> = set.iter().map(|&v| vec![v]).collect();
                    let stats = VectorStats::from_values(1, &values);
                    let post = prior.posterior(&stats);
                    for &x in queries {
                        let closed = post.log_pred_one(&[x]).exp();
                        let quad = quad_pred_ng1(&prior, set, x, &spec)?;
                        checks.push(Check::relative(
                            format!(
                                "ng/closed-vs-quad k={kappa} a={alpha} b={beta} cond={set:?} x={x}"
                            ),
                            quad,
                            closed,
                            1e-6,
                        ));
                    }
                }
            }
        }
    }
    Ok(checks)
}

/// The Negative-Binomial predictive exponentiates to a pmf.
pub fn check_nb_normalization() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for alpha in [0.5, 1.0, 2.0, 5.0, 35.0] {
        for beta in [0.5, 1.0, 3.0, 8.0] {
            let p = GammaPoissonParams::new(alpha, beta)?;
            checks.push(Check::absolute(
                format!("gp/nb-normalization a={alpha} b={beta}"),
                1.0,
                nb_normalization_sum(&p),
                1e-8,
            ));
        }
    }
    Ok(checks)
}

/// The Student-t predictive integrates to 1 (d = 1).
pub fn check_t_normalization() -> Result<Vec<Check>> {
    let settings = [
        (0.0, 0.5, 0.7, 0.5),
        (0.0, 2.0, 3.0, 2.0),
        (2.0, 0.5, 1.0, 0.5),
        (2.0, 2.0, 0.7, 2.0),
        (-1.5, 1.0, 2.0, 1.0),
        (0.7, 0.1, 1.5, 0.9),
        (3.0, 11.0, 3.5, 6.0),
        (-0.3, 4.0, 0.6, 0.4),
        (1.0, 1.0, 1.0, 1.0),
        (5.0, 0.5, 2.5, 3.0),
    ];
    let mut checks = Vec::new();
    for (mu, kappa, alpha, beta) in settings {
        let p = NormalGammaParams::new(vec![mu], kappa, alpha, beta)?;
        checks.push(Check::absolute(
            format!("ng/t-normalization mu={mu} k={kappa} a={alpha} b={beta}"),
            1.0,
            t_normalization_1d(&p),
            1e-8,
        ));
    }
    Ok(checks)
}

/// Block predictives: the implementation, the marginal-likelihood ratio and
/// the sequential chain of one-step predictives must agree to 1e-10 in log
/// domain, for blocks of size 1 through 4 in both families.
pub fn check_block_three_way() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let gp_blocks: [&[u64]; 4] = [&[1], &[0, 3], &[2, 2, 5], &[4, 0, 1, 3]];
    let gp_conds: [&[u64]; 2] = [&[], &[2, 0]];
    for (pa, pb) in [(1.3, 0.8), (0.5, 2.0)] {
        let prior = GammaPoissonParams::new(pa, pb)?;
        for cond in gp_conds {
            let cond_stats = CountStats::from_values(cond);
            let post = prior.posterior(&cond_stats);
            for block in gp_blocks {
                let block_stats = CountStats::from_values(block);
                let direct = post.log_pred_block(&block_stats);
                let mut all = cond_stats.clone();
                all.merge(&block_stats);
                let ratio = prior.log_marginal(&all) - prior.log_marginal(&cond_stats);
                let mut chain = 0.0;
                let mut seen = cond_stats.clone();
                for &x in block {
                    chain += prior.posterior(&seen).log_pred_one(x);
                    seen.add(x);
                }
                let spread = direct.max(ratio).max(chain) - direct.min(ratio).min(chain);
                checks.push(Check::below(
                    format!("gp/block-three-way prior=({pa},{pb}) cond={cond:?} block={block:?}"),
                    1e-10,
                    spread,
                ));
            }
        }
    }

    let ng_blocks: [&[f64]; 4] = [
        &[0.4],
        &[-1.0, 2.2],
        &[0.0, 0.0, 1.5],
        &[2.0, -0.7, 0.1, 1.1],
    ];
    let ng_conds: [&[f64]; 2] = [&[], &[1.0, -0.5]];
    for (kappa, alpha, beta) in [(1.0, 1.0, 1.0), (0.3, 2.5, 0.7)] {
        let prior = NormalGammaParams::new(vec![0.2], kappa, alpha, beta)?;
        for cond in ng_conds {
            let cond_vals: Vec<Vec<f64>> = cond.iter().map(|&v| vec![v]).collect();
            let cond_stats = VectorStats::from_values(1, &cond_vals);
            let post = prior.posterior(&cond_stats);
            for block in ng_blocks {
                let block_vals: Vec<Vec<f64>> = block.iter().map(|&v| vec![v]).collect();
                let block_stats = VectorStats::from_values(1, &block_vals);
                let direct = post.log_pred_block(&block_stats);
                let mut all = cond_stats.clone();
                all.merge(&block_stats);
                let ratio = prior.log_marginal(&all) - prior.log_marginal(&cond_stats);
                let mut chain = 0.0;
                let mut seen = cond_stats.clone();
                for &x in block {
                    chain += prior.posterior(&seen).log_pred_one(&[x]);
                    seen.add(&[x]);
                }
                let spread = direct.max(ratio).max(chain) - direct.min(ratio).min(chain);
                checks.push(Check::below(
                    format!(
                        "ng/block-three-way prior=({kappa},{alpha},{beta}) cond={cond:?} block={block:?}"
                    ),
                    1e-10,
                    spread,
                ));
            }
        }
    }
    Ok(checks)
}

/// Exact enumeration reproduces the hand-derived two-customer posterior and
/// normalizes; the franchise prior sums to 1 over exhaustive enumerations.
pub fn check_enumeration() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let data = GroupedDataset::from_counts(vec![vec![0, 0]])?;
    let hyper = gp_hyper(1.0, 1.0, 1.0, 1.0);
    let post = enumerate_exact_posterior(&data, &hyper)?;
    let expected: [(CanonicalConfig, f64); 3] = [
        (vec![(0, 0), (0, 0)], 8.0 / 15.0),
        (vec![(0, 0), (1, 0)], 4.0 / 15.0),
        (vec![(0, 0), (1, 1)], 3.0 / 15.0),
    ];
    for (config, p) in expected {
        checks.push(Check::absolute(
            format!("enum/two-customer p{config:?}"),
            p,
            post.prob(&config),
            1e-12,
        ));
    }
    checks.push(Check::absolute(
        "enum/two-customer total mass",
        1.0,
        post.probs.values().sum::<f64>(),
        1e-12,
    ));

    for (shape, gamma, alpha0) in [
        (vec![vec![0u64, 0, 0]], 1.0, 1.0),
        (vec![vec![0, 0], vec![0, 0]], 0.5, 2.0),
        (vec![vec![0, 0, 0, 0]], 2.0, 0.3),
    ] {
        let data = GroupedDataset::from_counts(shape.clone())?;
        let mass = crf_prior_total_mass(&data, &gp_hyper(gamma, alpha0, 1.0, 1.0))?;
        checks.push(Check::absolute(
            format!(
                "enum/crf-prior-mass shape={:?} gamma={gamma} alpha0={alpha0}",
                shape.iter().map(|g| g.len()).collect::<Vec<_>>()
            ),
            1.0,
            mass,
            1e-10,
        ));
    }
    Ok(checks)
}

/// Empirical distribution of canonical configurations from a long Gibbs run.
fn gibbs_empirical(
    data: &GroupedDataset,
    hyper: &HdpHyper,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> BTreeMap<CanonicalConfig, f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut state = SeatingState::init(data, InitMode::AllTogether);
    let mut counts: BTreeMap<CanonicalConfig, usize> = BTreeMap::new();
    for sweep in 0..sweeps + burn_in {
        gibbs_sweep(
            &mut state,
            data,
            hyper,
            ScanOrder::ShuffledPerSweep,
            &mut rng,
        );
        if sweep >= burn_in {
            *counts.entry(state.canonical_assignment()).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / sweeps as f64))
        .collect()
}

/// Long Gibbs runs against the exactly enumerated posterior on tiny
/// instances (total-variation distance at most 0.02).
pub fn check_chain_vs_enumeration(grid: Grid) -> Result<Vec<Check>> {
    let sweeps = 200_000;
    let instances: Vec<(Vec<Vec<u64>>, f64, f64)> = match grid {
        Grid::Full => vec![
            (vec![vec![0, 0]], 1.0, 1.0),
            (vec![vec![0, 1, 1]], 1.0, 1.0),
            (vec![vec![0, 1], vec![1]], 0.7, 1.4),
        ],
        Grid::Quick => vec![(vec![vec![0, 0]], 1.0, 1.0)],
    };
    let mut checks = Vec::new();
    for (shape, gamma, alpha0) in instances {
        let data = GroupedDataset::from_counts(shape.clone())?;
        let hyper = gp_hyper(gamma, alpha0, 1.0, 1.0);
        let exact = enumerate_exact_posterior(&data, &hyper)?;
        let empirical = gibbs_empirical(&data, &hyper, sweeps, 1000, 0x5eed);
        let tv = exact.tv_distance(&empirical);
        checks.push(Check::below(
            format!(
                "sampler/chain-vs-enum shape={:?} gamma={gamma} alpha0={alpha0}",
                shape.iter().map(|g| g.len()).collect::<Vec<_>>()
            ),
            0.02,
            tv,
        ));
    }
    Ok(checks)
}

/// Joint-distribution (Geweke-style) check: all |z| < 4 for the correct
/// sweep, and the deliberately corrupted sweep must trip the same gate.
pub fn check_geweke(grid: Grid) -> Result<Vec<Check>> {
    let iterations = match grid {
        Grid::Full => 100_000,
        Grid::Quick => 20_000,
    };
    let hyper = gp_hyper(1.0, 1.0, 1.0, 1.0);
    let mut checks = Vec::new();
    let report = geweke_check(&hyper, &[3, 3], iterations, 0x93e3, Corruption::None)?;
    for s in &report.stats {
        checks.push(Check::below(
            format!("geweke/correct {}", s.name),
            4.0,
            s.z.abs(),
        ));
    }
    let corrupted = geweke_check(&hyper, &[3, 3], iterations, 0xbad, Corruption::SkipDetach)?;
    checks.push(Check::above(
        "geweke/corrupted-control max |z|",
        4.0,
        corrupted.max_abs_z(),
    ));
    Ok(checks)
}

/// Forward-sampled seating frequencies against exp(crf_log_prior) on a tiny
/// shape.
pub fn check_forward_marginals(grid: Grid) -> Result<Vec<Check>> {
    let draws = match grid {
        Grid::Full => 200_000,
        Grid::Quick => 50_000,
    };
    let mut checks = Vec::new();
    for (sizes, gamma, alpha0) in [(vec![3usize], 1.0, 1.0), (vec![2, 1], 0.5, 2.0)] {
        let hyper = gp_hyper(gamma, alpha0, 1.0, 1.0);
        let dummy = GroupedDataset::from_counts(sizes.iter().map(|&n| vec![0u64; n]).collect())?;
        let exact = enumerate_crf_prior(&dummy, &hyper)?;
        let mut rng = ChaCha20Rng::seed_from_u64(0xf02ed);
        let mut counts: BTreeMap<CanonicalConfig, usize> = BTreeMap::new();
        for _ in 0..draws {
            let fs = forward_sample(&hyper, &sizes, &mut rng)?;
            *counts.entry(fs.state().canonical_assignment()).or_insert(0) += 1;
        }
        let empirical: BTreeMap<CanonicalConfig, f64> = counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / draws as f64))
            .collect();
        let tv = exact.tv_distance(&empirical);
        checks.push(Check::below(
            format!("synth/forward-marginals sizes={sizes:?} gamma={gamma} alpha0={alpha0}"),
            0.02,
            tv,
        ));
    }
    Ok(checks)
}

/// Determinism: the same seed yields bitwise-identical traces.
pub fn check_determinism() -> Result<Vec<Check>> {
    let data = GroupedDataset::from_counts(vec![vec![0, 5, 1, 7], vec![2, 2, 9]])?;
    let hyper = gp_hyper(1.0, 1.0, 1.0, 1.0);
    let cfg = SamplerConfig::new(50, 10, 1234);
    let (t1, _) = crate::sampler::run_chain(&data, &hyper, &cfg)?;
    let (t2, _) = crate::sampler::run_chain(&data, &hyper, &cfg)?;
    let identical = t1.sweeps.iter().zip(&t2.sweeps).all(|(a, b)| {
        a.num_dishes == b.num_dishes && a.log_joint.to_bits() == b.log_joint.to_bits()
    });
    Ok(vec![Check {
        name: "sampler/determinism".into(),
        expected: "bitwise-identical traces".into(),
        got: if identical { "identical" } else { "diverged" }.into(),
        tolerance: "exact".into(),
        pass: identical,
    }])
}

/// Runs the whole suite at the requested grid size.
pub fn run_validation(grid: Grid) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    report.extend(check_gp_closed_vs_quad(grid)?);
    report.extend(check_ng_closed_vs_quad(grid)?);
    report.extend(check_nb_normalization()?);
    report.extend(check_t_normalization()?);
    report.extend(check_block_three_way()?);
    report.extend(check_enumeration()?);
    report.extend(check_determinism()?);
    if grid == Grid::Full {
        report.extend(check_chain_vs_enumeration(grid)?);
        report.extend(check_geweke(grid)?);
        report.extend(check_forward_marginals(grid)?);
    }
    Ok(report)
}
