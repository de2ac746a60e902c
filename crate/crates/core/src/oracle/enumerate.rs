//! Exhaustive posterior enumeration for tiny instances: every assignment of
//! customers to tables (one set partition per group) crossed with every
//! assignment of tables to dishes (a set partition of all tables), scored
//! exactly. Partitions are generated as restricted growth strings, so each
//! configuration comes out already in first-appearance canonical form.

use std::collections::BTreeMap;

use crate::conjugate::HdpHyper;
use crate::data::GroupedDataset;
use crate::error::{Error, Result};
use crate::state::SeatingState;
use crate::util::log_sum_exp;

/// Largest instance (total customers) the enumerator accepts.
pub const MAX_ENUM_CUSTOMERS: usize = 8;

/// Canonical per-customer (table, dish) labels; see
/// [`SeatingState::canonical_assignment`].
pub type CanonicalConfig = Vec<(usize, usize)>;

/// A normalized distribution over canonical seating configurations.
#[derive(Debug, Clone)]
pub struct ExactPosterior {
    pub probs: BTreeMap<CanonicalConfig, f64>,
}

impl ExactPosterior {
    pub fn prob(&self, config: &CanonicalConfig) -> f64 {
        self.probs.get(config).copied().unwrap_or(0.0)
    }

    /// Total-variation distance to an empirical distribution over canonical
    /// configurations.
    pub fn tv_distance(&self, empirical: &BTreeMap<CanonicalConfig, f64>) -> f64 {
        let mut keys: Vec<&CanonicalConfig> = self.probs.keys().collect();
        for k in empirical.keys() {
            if !self.probs.contains_key(k) {
                keys.push(k);
            }
        }
        0.5 * keys
            .into_iter()
            .map(|k| (self.prob(k) - empirical.get(k).copied().unwrap_or(0.0)).abs())
            .sum::<f64>()
    }
}

/// All restricted growth strings of length n: rgs[0] = 0 and
/// rgs[i] <= max(rgs[..i]) + 1. One string per set partition, labels in
/// first-appearance order.
fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    fn rec(current: &mut Vec<usize>, i: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == current.len() {
            out.push(current.clone());
            return;
        }
        for v in 0..=max + 1 {
            current[i] = v;
            rec(current, i + 1, max.max(v), out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    rec(&mut vec![0usize; n], 1, 0, &mut out);
    out
}

/// Visits every (tables, dishes) configuration of the instance exactly once.
fn walk_configs(data: &GroupedDataset, mut visit: impl FnMut(&SeatingState)) -> Result<()> {
    let total = data.total_observations();
    if total > MAX_ENUM_CUSTOMERS {
        return Err(Error::InstanceTooLarge {
            customers: total,
            max: MAX_ENUM_CUSTOMERS,
        });
    }
    let group_partitions: Vec<Vec<Vec<usize>>> = (0..data.num_groups())
        .map(|j| restricted_growth_strings(data.group_size(j)))
        .collect();
    let mut choice = vec![0usize; data.num_groups()];
    loop {
        let tables: Vec<Vec<usize>> = choice
            .iter()
            .enumerate()
            .map(|(j, &c)| group_partitions[j][c].clone())
            .collect();
        let table_counts: Vec<usize> = tables
            .iter()
            .map(|t| t.iter().max().map_or(0, |m| m + 1))
            .collect();
        let total_tables: usize = table_counts.iter().sum();
        for dish_rgs in restricted_growth_strings(total_tables) {
            let mut table_dishes: Vec<Vec<usize>> = Vec::with_capacity(data.num_groups());
            let mut offset = 0;
            for &count in &table_counts {
                table_dishes.push(dish_rgs[offset..offset + count].to_vec());
                offset += count;
            }
            let state = SeatingState::from_assignment(data, &tables, &table_dishes)?;
            visit(&state);
        }
        // advance the mixed-radix counter over per-group partitions
        let mut j = 0;
        loop {
            if j == choice.len() {
                return Ok(());
            }
            choice[j] += 1;
            if choice[j] < group_partitions[j].len() {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
}

fn enumerate_scored(
    data: &GroupedDataset,
    score: impl Fn(&SeatingState) -> f64,
) -> Result<ExactPosterior> {
    let mut configs: Vec<(CanonicalConfig, f64)> = Vec::new();
    walk_configs(data, |state| {
        configs.push((state.canonical_assignment(), score(state)));
    })?;
    let log_norm = log_sum_exp(&configs.iter().map(|(_, s)| *s).collect::<Vec<f64>>());
    let probs = configs
        .into_iter()
        .map(|(key, s)| (key, (s - log_norm).exp()))
        .collect();
    Ok(ExactPosterior { probs })
}

/// Exact posterior over seatings: prior times the product of per-dish
/// marginal likelihoods, normalized over every configuration.
pub fn enumerate_exact_posterior(
    data: &GroupedDataset,
    hyper: &HdpHyper,
) -> Result<ExactPosterior> {
    enumerate_scored(data, |s| s.log_joint(hyper))
}

/// Exact franchise prior over seatings (no likelihood terms), for checking
/// the prior against forward-sampling frequencies.
pub fn enumerate_crf_prior(data: &GroupedDataset, hyper: &HdpHyper) -> Result<ExactPosterior> {
    enumerate_scored(data, |s| s.crf_log_prior(hyper))
}

/// Sum of unnormalized prior probabilities over all configurations; equals
/// 1 exactly when the franchise prior is correctly normalized.
pub fn crf_prior_total_mass(data: &GroupedDataset, hyper: &HdpHyper) -> Result<f64> {
    let mut log_terms = Vec::new();
    walk_configs(data, |state| log_terms.push(state.crf_log_prior(hyper)))?;
    Ok(log_sum_exp(&log_terms).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::{FamilyPrior, GammaPoissonParams};

    fn gp_hyper(gamma: f64, alpha0: f64) -> HdpHyper {
        HdpHyper::new(
            gamma,
            alpha0,
            FamilyPrior::GammaPoisson(GammaPoissonParams::new(1.0, 1.0).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn rgs_counts_match_bell_numbers() {
        assert_eq!(restricted_growth_strings(1).len(), 1);
        assert_eq!(restricted_growth_strings(2).len(), 2);
        assert_eq!(restricted_growth_strings(3).len(), 5);
        assert_eq!(restricted_growth_strings(4).len(), 15);
        assert_eq!(restricted_growth_strings(5).len(), 52);
    }

    #[test]
    fn single_customer_is_certain() {
        let data = GroupedDataset::from_counts(vec![vec![0]]).unwrap();
        let post = enumerate_exact_posterior(&data, &gp_hyper(1.0, 1.0)).unwrap();
        assert_eq!(post.probs.len(), 1);
        let p = post.prob(&vec![(0, 0)]);
        assert!((p - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_customer_hand_enumeration() {
        // {0,0} under GP(1,1), α₀ = γ = 1: weights 1/6, 1/12, 1/16
        // normalize to 8/15, 4/15, 3/15
        let data = GroupedDataset::from_counts(vec![vec![0, 0]]).unwrap();
        let post = enumerate_exact_posterior(&data, &gp_hyper(1.0, 1.0)).unwrap();
        assert_eq!(post.probs.len(), 3);
        assert!((post.prob(&vec![(0, 0), (0, 0)]) - 8.0 / 15.0).abs() < 1e-13);
        assert!((post.prob(&vec![(0, 0), (1, 0)]) - 4.0 / 15.0).abs() < 1e-13);
        assert!((post.prob(&vec![(0, 0), (1, 1)]) - 3.0 / 15.0).abs() < 1e-13);
        let total: f64 = post.probs.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_invariant_to_observation_order() {
        let a = GroupedDataset::from_counts(vec![vec![0, 1, 1]]).unwrap();
        let b = GroupedDataset::from_counts(vec![vec![1, 1, 0]]).unwrap();
        let hyper = gp_hyper(1.3, 0.7);
        let pa = enumerate_exact_posterior(&a, &hyper).unwrap();
        let pb = enumerate_exact_posterior(&b, &hyper).unwrap();
        // compare marginals over statistics that ignore customer identity:
        // the dish-count distribution must match exactly
        let k_marginal = |p: &ExactPosterior| {
            let mut m = BTreeMap::new();
            for (key, pr) in &p.probs {
                let k = key.iter().map(|&(_, d)| d).max().unwrap() + 1;
                *m.entry(k).or_insert(0.0) += pr;
            }
            m
        };
        let ma = k_marginal(&pa);
        let mb = k_marginal(&pb);
        assert_eq!(ma.len(), mb.len());
        for (k, v) in ma {
            assert!((v - mb[&k]).abs() < 1e-12);
        }
    }

    #[test]
    fn prior_mass_sums_to_one() {
        for (shape, gamma, alpha0) in [
            (vec![vec![0u64, 0, 0]], 1.0, 1.0),
            (vec![vec![0, 0], vec![0, 0]], 0.5, 2.0),
            (vec![vec![0, 0, 0, 0]], 2.0, 0.3),
        ] {
            let data = GroupedDataset::from_counts(shape).unwrap();
            let mass = crf_prior_total_mass(&data, &gp_hyper(gamma, alpha0)).unwrap();
            assert!(
                (mass - 1.0).abs() < 1e-10,
                "prior mass {mass} for γ={gamma}, α₀={alpha0}"
            );
        }
    }

    #[test]
    fn rejects_large_instances() {
        let data = GroupedDataset::from_counts(vec![vec![0; 9]]).unwrap();
        assert!(matches!(
            enumerate_exact_posterior(&data, &gp_hyper(1.0, 1.0)),
            Err(Error::InstanceTooLarge { .. })
        ));
    }
}
