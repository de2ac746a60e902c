//! Joint-distribution test of the sampler: samples of (seating, data) drawn
//! forward from the generative process must match samples produced by
//! alternating "resample data given seating" with one Gibbs sweep. A
//! mismatch in any test statistic flags a wrong conditional.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::conjugate::{FamilyPrior, HdpHyper, SuffStats};
use crate::data::{GroupedDataset, Observation};
use crate::error::Result;
use crate::sampler::{gibbs_sweep_with, Corruption, ScanOrder};
use crate::state::SeatingState;
use crate::synth::{draw_observation, forward_sample, DishParam};
use crate::util::mean_var;

/// One test statistic compared between the two legs.
#[derive(Debug, Clone)]
pub struct GewekeStat {
    pub name: &'static str,
    pub forward_mean: f64,
    pub successive_mean: f64,
    pub z: f64,
}

#[derive(Debug, Clone)]
pub struct GewekeReport {
    pub stats: Vec<GewekeStat>,
    pub iterations: usize,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.stats.iter().map(|s| s.z.abs()).fold(0.0, f64::max)
    }
}

/// Draws a dish parameter from its conditional given the statistics of the
/// observations currently assigned to it.
fn draw_dish_param_posterior<R: Rng + ?Sized>(
    prior: &FamilyPrior,
    stats: &SuffStats,
    rng: &mut R,
) -> DishParam {
    match prior {
        FamilyPrior::GammaPoisson(p) => {
            let post = p.posterior(stats.as_count());
            let g = Gamma::new(post.alpha, 1.0 / post.beta).expect("valid posterior");
            DishParam::Rate(g.sample(rng))
        }
        FamilyPrior::NormalGamma(p) => {
            let post = p.posterior(stats.as_vector());
            let g = Gamma::new(post.alpha, 1.0 / post.beta).expect("valid posterior");
            let precision: f64 = g.sample(rng);
            let sd = (post.kappa * precision).sqrt().recip();
            let mean = post
                .mu
                .iter()
                .map(|&m| Normal::new(m, sd).expect("finite location").sample(rng))
                .collect();
            DishParam::MeanPrecision { mean, precision }
        }
    }
}

fn scalar_of(obs: &Observation) -> f64 {
    match obs {
        Observation::Count(x) => *x as f64,
        Observation::Vector(v) => v[0],
    }
}

fn measure(state: &SeatingState, groups: &[Vec<Observation>]) -> [f64; 3] {
    let total: usize = groups.iter().map(|g| g.len()).sum();
    let mean = groups.iter().flatten().map(scalar_of).sum::<f64>() / total as f64;
    [state.num_dishes() as f64, state.total_tables() as f64, mean]
}

/// Standard error of a correlated series via non-overlapping batch means.
fn batch_means_se(series: &[f64]) -> f64 {
    let batches = 50.min(series.len() / 4).max(2);
    let len = series.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| series[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let (_, var) = mean_var(&means);
    (var / batches as f64).sqrt()
}

/// Runs the joint-distribution check on the given group shape for
/// `iterations` rounds per leg and reports a z-score per statistic
/// (dish count, table count, grand data mean). Pass a corruption mode to
/// confirm the check catches a broken sweep.
pub fn geweke_check(
    hyper: &HdpHyper,
    group_sizes: &[usize],
    iterations: usize,
    seed: u64,
    corruption: Corruption,
) -> Result<GewekeReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    // forward leg: independent draws from the joint
    let mut forward: Vec<[f64; 3]> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let fs = forward_sample(hyper, group_sizes, &mut rng)?;
        let groups: Vec<Vec<Observation>> = (0..fs.data.num_groups())
            .map(|j| fs.data.group(j).to_vec())
            .collect();
        forward.push(measure(&fs.state(), &groups));
    }

    // successive-conditional leg: data step then seating step, repeatedly
    let fs = forward_sample(hyper, group_sizes, &mut rng)?;
    let mut groups: Vec<Vec<Observation>> = (0..fs.data.num_groups())
        .map(|j| fs.data.group(j).to_vec())
        .collect();
    let mut state = fs.state();
    let warmup = (iterations / 10).max(10).min(iterations / 2);
    let mut successive: Vec<[f64; 3]> = Vec::with_capacity(iterations);
    for it in 0..iterations + warmup {
        // resample each observation from its predictive given the seating
        for (j, group) in groups.iter_mut().enumerate() {
            for (i, slot) in group.iter_mut().enumerate() {
                let k = state
                    .dish_of_customer(j, i)
                    .expect("all customers seated between sweeps");
                let mut loo = state.dish_stats(k).clone();
                loo.remove(slot);
                let param = draw_dish_param_posterior(&hyper.prior, &loo, &mut rng);
                let new = draw_observation(&param, &mut rng);
                state.swap_observation(j, i, slot, &new);
                *slot = new;
            }
        }
        let data = GroupedDataset::new(hyper.prior.obs_kind(), groups.clone())?;
        gibbs_sweep_with(
            &mut state,
            &data,
            hyper,
            ScanOrder::ShuffledPerSweep,
            &mut rng,
            corruption,
            false,
        );
        if it >= warmup {
            successive.push(measure(&state, &groups));
        }
    }

    let names = ["num_dishes", "num_tables", "data_mean"];
    let stats = (0..3)
        .map(|s| {
            let f: Vec<f64> = forward.iter().map(|m| m[s]).collect();
            let c: Vec<f64> = successive.iter().map(|m| m[s]).collect();
            let (mf, vf) = mean_var(&f);
            let (mc, _) = mean_var(&c);
            let se_f = (vf / f.len() as f64).sqrt();
            let se_c = batch_means_se(&c);
            let z = (mf - mc) / se_f.hypot(se_c).max(1e-300);
            GewekeStat {
                name: names[s],
                forward_mean: mf,
                successive_mean: mc,
                z,
            }
        })
        .collect();
    Ok(GewekeReport { stats, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::GammaPoissonParams;

    fn gp_hyper() -> HdpHyper {
        HdpHyper::new(
            1.0,
            1.0,
            FamilyPrior::GammaPoisson(GammaPoissonParams::new(1.0, 1.0).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn report_has_finite_statistics() {
        let report = geweke_check(&gp_hyper(), &[2, 2], 2000, 3, Corruption::None).unwrap();
        assert_eq!(report.stats.len(), 3);
        for s in &report.stats {
            assert!(s.z.is_finite(), "{}: z = {}", s.name, s.z);
        }
    }

    #[test]
    fn short_correct_run_stays_sane() {
        // full-strength runs live in the validation suite; this is a smoke
        // check that a modest run does not blow past the gate
        let report = geweke_check(&gp_hyper(), &[3, 3], 20_000, 11, Corruption::None).unwrap();
        assert!(
            report.max_abs_z() < 6.0,
            "max |z| = {} on a correct sampler",
            report.max_abs_z()
        );
    }

    #[test]
    fn corrupted_sampler_is_detected() {
        let report =
            geweke_check(&gp_hyper(), &[3, 3], 20_000, 11, Corruption::SkipDetach).unwrap();
        assert!(
            report.max_abs_z() > 4.0,
            "corruption went unnoticed: max |z| = {}",
            report.max_abs_z()
        );
    }
}
