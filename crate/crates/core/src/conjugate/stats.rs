//! Additive sufficient statistics for both likelihood families.
//!
//! Count statistics keep an exact multiset histogram, so removing a
//! previously added value restores every field bit-for-bit and the
//! log-factorial sum is a canonical function of the multiset rather than a
//! drifting running total. Vector statistics are running sums; removal is
//! exact only up to float rounding.

use std::collections::BTreeMap;

use crate::data::{ObsKind, Observation};
use crate::util::ln_factorial;

/// Sufficient statistics for count observations: n, Σx and the value
/// histogram (from which Σ log x! is computed on demand).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountStats {
    n: u64,
    sum: u64,
    hist: BTreeMap<u64, u64>,
}

impl CountStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values(values: &[u64]) -> Self {
        let mut s = Self::new();
        for &x in values {
            s.add(x);
        }
        s
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sum(&self) -> u64 {
        self.sum
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Σ log(x!) over the multiset, folded in sorted value order so the
    /// result depends only on the multiset, never on insertion order.
    pub fn sum_log_fact(&self) -> f64 {
        self.hist
            .iter()
            .map(|(&x, &c)| c as f64 * ln_factorial(x))
            .sum()
    }

    pub fn add(&mut self, x: u64) {
        self.n += 1;
        self.sum += x;
        *self.hist.entry(x).or_insert(0) += 1;
    }

    /// Removes one occurrence of `x`. Panics if `x` was never added.
    pub fn remove(&mut self, x: u64) {
        let c = self
            .hist
            .get_mut(&x)
            .unwrap_or_else(|| panic!("removing count {x} not present in stats"));
        *c -= 1;
        if *c == 0 {
            self.hist.remove(&x);
        }
        self.n -= 1;
        self.sum -= x;
    }

    pub fn merge(&mut self, other: &CountStats) {
        self.n += other.n;
        self.sum += other.sum;
        for (&x, &c) in &other.hist {
            *self.hist.entry(x).or_insert(0) += c;
        }
    }

    /// Removes a previously merged block. Panics if `other` is not a
    /// sub-multiset of `self`.
    pub fn unmerge(&mut self, other: &CountStats) {
        for (&x, &c) in &other.hist {
            let cur = self
                .hist
                .get_mut(&x)
                .unwrap_or_else(|| panic!("unmerging count {x} not present in stats"));
            assert!(*cur >= c, "unmerging more copies of {x} than present");
            *cur -= c;
            if *cur == 0 {
                self.hist.remove(&x);
            }
        }
        self.n -= other.n;
        self.sum -= other.sum;
    }

    /// Iterates the stored values with multiplicity, in sorted order.
    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.hist
            .iter()
            .flat_map(|(&x, &c)| std::iter::repeat_n(x, c as usize))
    }
}

/// Sufficient statistics for d-dimensional vector observations: n, Σx and
/// Σ‖x‖².
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStats {
    n: u64,
    sum: Vec<f64>,
    sum_sq: f64,
}

impl VectorStats {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "vector statistics need dimension >= 1");
        Self {
            n: 0,
            sum: vec![0.0; dim],
            sum_sq: 0.0,
        }
    }

    pub fn from_values(dim: usize, values: &[Vec<f64>]) -> Self {
        let mut s = Self::new(dim);
        for v in values {
            s.add(v);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mean(&self) -> Vec<f64> {
        assert!(self.n > 0, "mean of empty stats");
        self.sum.iter().map(|s| s / self.n as f64).collect()
    }

    /// Centered sum of squares Σ‖x − x̄‖² = Σ‖x‖² − ‖Σx‖²/n, clamped at 0.
    /// Cancellation can push the difference slightly negative; anything
    /// below -1e-9 indicates corrupted statistics rather than rounding.
    pub fn centered_sum_sq(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let norm_sq: f64 = self.sum.iter().map(|s| s * s).sum();
        let s = self.sum_sq - norm_sq / self.n as f64;
        debug_assert!(
            s >= -1e-9,
            "centered sum of squares {s} below the rounding floor; stats are stale"
        );
        s.max(0.0)
    }

    pub fn add(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim(), "observation dimension mismatch");
        self.n += 1;
        for (s, xi) in self.sum.iter_mut().zip(x) {
            *s += xi;
        }
        self.sum_sq += x.iter().map(|xi| xi * xi).sum::<f64>();
    }

    pub fn remove(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim(), "observation dimension mismatch");
        assert!(self.n > 0, "removing from empty stats");
        self.n -= 1;
        for (s, xi) in self.sum.iter_mut().zip(x) {
            *s -= xi;
        }
        self.sum_sq -= x.iter().map(|xi| xi * xi).sum::<f64>();
        if self.n == 0 {
            // Snap exactly to the empty state so the new-dish path sees the
            // pure prior.
            self.sum.iter_mut().for_each(|s| *s = 0.0);
            self.sum_sq = 0.0;
        }
    }

    pub fn merge(&mut self, other: &VectorStats) {
        assert_eq!(other.dim(), self.dim());
        self.n += other.n;
        for (s, o) in self.sum.iter_mut().zip(&other.sum) {
            *s += o;
        }
        self.sum_sq += other.sum_sq;
    }

    pub fn unmerge(&mut self, other: &VectorStats) {
        assert_eq!(other.dim(), self.dim());
        assert!(
            self.n >= other.n,
            "unmerging more observations than present"
        );
        self.n -= other.n;
        for (s, o) in self.sum.iter_mut().zip(&other.sum) {
            *s -= o;
        }
        self.sum_sq -= other.sum_sq;
        if self.n == 0 {
            self.sum.iter_mut().for_each(|s| *s = 0.0);
            self.sum_sq = 0.0;
        }
    }
}

/// Family-tagged sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum SuffStats {
    Count(CountStats),
    Vector(VectorStats),
}

impl SuffStats {
    pub fn empty(kind: ObsKind) -> Self {
        match kind {
            ObsKind::Count => SuffStats::Count(CountStats::new()),
            ObsKind::RealVector { dim } => SuffStats::Vector(VectorStats::new(dim)),
        }
    }

    pub fn n(&self) -> u64 {
        match self {
            SuffStats::Count(s) => s.n(),
            SuffStats::Vector(s) => s.n(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }

    pub fn add(&mut self, x: &Observation) {
        match (self, x) {
            (SuffStats::Count(s), Observation::Count(v)) => s.add(*v),
            (SuffStats::Vector(s), Observation::Vector(v)) => s.add(v),
            _ => panic!("observation kind does not match statistics kind"),
        }
    }

    pub fn remove(&mut self, x: &Observation) {
        match (self, x) {
            (SuffStats::Count(s), Observation::Count(v)) => s.remove(*v),
            (SuffStats::Vector(s), Observation::Vector(v)) => s.remove(v),
            _ => panic!("observation kind does not match statistics kind"),
        }
    }

    pub fn merge(&mut self, other: &SuffStats) {
        match (self, other) {
            (SuffStats::Count(s), SuffStats::Count(o)) => s.merge(o),
            (SuffStats::Vector(s), SuffStats::Vector(o)) => s.merge(o),
            _ => panic!("cannot merge statistics of different kinds"),
        }
    }

    pub fn unmerge(&mut self, other: &SuffStats) {
        match (self, other) {
            (SuffStats::Count(s), SuffStats::Count(o)) => s.unmerge(o),
            (SuffStats::Vector(s), SuffStats::Vector(o)) => s.unmerge(o),
            _ => panic!("cannot unmerge statistics of different kinds"),
        }
    }

    pub fn as_count(&self) -> &CountStats {
        match self {
            SuffStats::Count(s) => s,
            SuffStats::Vector(_) => panic!("expected count statistics"),
        }
    }

    pub fn as_vector(&self) -> &VectorStats {
        match self {
            SuffStats::Vector(s) => s,
            SuffStats::Count(_) => panic!("expected vector statistics"),
        }
    }
}
