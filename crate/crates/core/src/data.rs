//! Grouped observations: the immutable input to the sampler.

use crate::error::{Error, Result};

/// What the observations are.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsKind {
    /// Non-negative integer counts.
    Count,
    /// Real vectors of a fixed dimension `d >= 1`.
    RealVector { dim: usize },
}

/// A single observation, either a count or a real vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Count(u64),
    Vector(Vec<f64>),
}

impl Observation {
    pub fn as_count(&self) -> Option<u64> {
        match self {
            Observation::Count(x) => Some(*x),
            Observation::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Observation::Count(_) => None,
            Observation::Vector(v) => Some(v),
        }
    }
}

/// Immutable grouped observations. Groups are indexed contiguously from 0;
/// every group is nonempty and all observations share one kind.
#[derive(Debug, Clone)]
pub struct GroupedDataset {
    kind: ObsKind,
    groups: Vec<Vec<Observation>>,
    labels: Vec<String>,
}

impl GroupedDataset {
    /// Builds a dataset, validating shape: at least one group, no empty
    /// groups, homogeneous observation kind, finite vector entries of a
    /// single dimension.
    pub fn new(kind: ObsKind, groups: Vec<Vec<Observation>>) -> Result<Self> {
        let labels = (0..groups.len()).map(|j| format!("g{j}")).collect();
        Self::with_labels(kind, groups, labels)
    }

    /// Like [`GroupedDataset::new`] but with caller-provided group labels
    /// (one per group, used when reporting results).
    pub fn with_labels(
        kind: ObsKind,
        groups: Vec<Vec<Observation>>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != groups.len() {
            return Err(Error::FamilyMismatch(format!(
                "{} labels for {} groups",
                labels.len(),
                groups.len()
            )));
        }
        for (j, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::EmptyGroup(j));
            }
            for obs in group {
                match (kind, obs) {
                    (ObsKind::Count, Observation::Count(_)) => {}
                    (ObsKind::RealVector { dim }, Observation::Vector(v)) => {
                        if v.len() != dim {
                            return Err(Error::DimensionMismatch {
                                expected: dim,
                                got: v.len(),
                            });
                        }
                        if v.iter().any(|x| !x.is_finite()) {
                            return Err(Error::FamilyMismatch("non-finite vector entry".into()));
                        }
                    }
                    _ => {
                        return Err(Error::FamilyMismatch(format!(
                            "observation {obs:?} under kind {kind:?}"
                        )))
                    }
                }
            }
        }
        Ok(GroupedDataset {
            kind,
            groups,
            labels,
        })
    }

    /// Convenience constructor for count data.
    pub fn from_counts(groups: Vec<Vec<u64>>) -> Result<Self> {
        let groups = groups
            .into_iter()
            .map(|g| g.into_iter().map(Observation::Count).collect())
            .collect();
        Self::new(ObsKind::Count, groups)
    }

    /// Convenience constructor for vector data; the dimension is taken from
    /// the first observation.
    pub fn from_vectors(groups: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let dim = groups
            .first()
            .and_then(|g| g.first())
            .map(|v| v.len())
            .ok_or(Error::EmptyDataset)?;
        let groups = groups
            .into_iter()
            .map(|g| g.into_iter().map(Observation::Vector).collect())
            .collect();
        Self::new(ObsKind::RealVector { dim }, groups)
    }

    pub fn kind(&self) -> ObsKind {
        self.kind
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_size(&self, j: usize) -> usize {
        self.groups[j].len()
    }

    pub fn total_observations(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    pub fn get(&self, j: usize, i: usize) -> &Observation {
        &self.groups[j][i]
    }

    pub fn group(&self, j: usize) -> &[Observation] {
        &self.groups[j]
    }

    pub fn label(&self, j: usize) -> &str {
        &self.labels[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Iterates over all (group, index) customer coordinates in fixed order.
    pub fn customers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(j, g)| (0..g.len()).map(move |i| (j, i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_inputs() {
        assert!(matches!(
            GroupedDataset::from_counts(vec![]),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            GroupedDataset::from_counts(vec![vec![1], vec![]]),
            Err(Error::EmptyGroup(1))
        ));
    }

    #[test]
    fn rejects_ragged_vectors() {
        let err = GroupedDataset::from_vectors(vec![vec![vec![1.0, 2.0], vec![3.0]]]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_kind_mismatch() {
        let err = GroupedDataset::new(ObsKind::Count, vec![vec![Observation::Vector(vec![1.0])]]);
        assert!(matches!(err, Err(Error::FamilyMismatch(_))));
    }

    #[test]
    fn customer_iteration_order() {
        let d = GroupedDataset::from_counts(vec![vec![0, 1], vec![2]]).unwrap();
        let coords: Vec<_> = d.customers().collect();
        assert_eq!(coords, vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(d.total_observations(), 3);
        assert_eq!(d.label(1), "g1");
    }
}
