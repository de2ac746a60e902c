//! Seating state of the Chinese restaurant franchise: table assignments per
//! customer, dish assignments per table, all derived counts and per-table /
//! per-dish sufficient statistics, plus exact scoring of a configuration
//! under the franchise prior.
//!
//! Table ids are dense per group and dish ids are dense globally; removing a
//! table or dish swaps the last id into the hole so the arrays stay compact.
//! Every relabel is recorded so assignment snapshots taken across sweeps
//! remain interpretable.

use statrs::function::gamma::ln_gamma;

use crate::conjugate::{HdpHyper, SuffStats};
use crate::data::{GroupedDataset, ObsKind};
use crate::error::{Error, Result};
use crate::util::ln_rising_factorial;

/// How to seat customers before the first sweep.
///
/// `AllTogether` (one table per group, one shared dish) is the default: the
/// sampler then only has to split, which conjugate models handle more
/// reliably than merging a shattered initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    #[default]
    AllTogether,
    AllSingleton,
}

/// Choice of dish when (re)assigning a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DishChoice {
    Existing(usize),
    New,
}

/// An id compaction event: `from` was the last id and now lives at `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relabel {
    Table {
        group: usize,
        from: usize,
        to: usize,
    },
    Dish {
        from: usize,
        to: usize,
    },
}

/// A single inconsistency found by [`SeatingState::check_consistency`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    CustomerUnseated {
        group: usize,
        index: usize,
    },
    TableOutOfRange {
        group: usize,
        index: usize,
        table: usize,
    },
    TableSize {
        group: usize,
        table: usize,
        recorded: usize,
        actual: usize,
    },
    EmptyTable {
        group: usize,
        table: usize,
    },
    TableStats {
        group: usize,
        table: usize,
        detail: String,
    },
    DishMissing {
        group: usize,
        table: usize,
    },
    DishOutOfRange {
        group: usize,
        table: usize,
        dish: usize,
    },
    GroupDishTables {
        group: usize,
        dish: usize,
        recorded: usize,
        actual: usize,
    },
    DishTables {
        dish: usize,
        recorded: usize,
        actual: usize,
    },
    EmptyDish {
        dish: usize,
    },
    DishStats {
        dish: usize,
        detail: String,
    },
    Shape {
        detail: String,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::CustomerUnseated { group, index } => {
                write!(f, "customer ({group}, {index}) is not seated")
            }
            Violation::TableOutOfRange {
                group,
                index,
                table,
            } => {
                write!(
                    f,
                    "customer ({group}, {index}) sits at missing table ({group}, {table})"
                )
            }
            Violation::TableSize {
                group,
                table,
                recorded,
                actual,
            } => write!(
                f,
                "table ({group}, {table}) records {recorded} customers but seats {actual}"
            ),
            Violation::EmptyTable { group, table } => {
                write!(f, "table ({group}, {table}) is empty but still live")
            }
            Violation::TableStats {
                group,
                table,
                detail,
            } => {
                write!(f, "table ({group}, {table}) statistics are stale: {detail}")
            }
            Violation::DishMissing { group, table } => {
                write!(f, "table ({group}, {table}) has no dish assigned")
            }
            Violation::DishOutOfRange { group, table, dish } => {
                write!(f, "table ({group}, {table}) serves missing dish {dish}")
            }
            Violation::GroupDishTables {
                group,
                dish,
                recorded,
                actual,
            } => write!(
                f,
                "m[{group}][{dish}] records {recorded} tables but {actual} serve the dish"
            ),
            Violation::DishTables {
                dish,
                recorded,
                actual,
            } => write!(
                f,
                "dish {dish} records {recorded} tables overall but {actual} serve it"
            ),
            Violation::EmptyDish { dish } => {
                write!(f, "dish {dish} has no tables but is still live")
            }
            Violation::DishStats { dish, detail } => {
                write!(f, "dish {dish} statistics are stale: {detail}")
            }
            Violation::Shape { detail } => write!(f, "shape mismatch: {detail}"),
        }
    }
}

/// Outcome of a consistency check; collects every violation instead of
/// stopping at the first.
#[derive(Debug, Clone, Default)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Mutable franchise seating state. Single writer; owns all its storage so
/// independent chains can run on separate threads.
#[derive(Debug, Clone)]
pub struct SeatingState {
    kind: ObsKind,
    /// table of customer (j, i); `None` only while the customer is detached
    table_of: Vec<Vec<Option<usize>>>,
    /// dish of table (j, t); `None` only while the table's dish is resampled
    dish_of_table: Vec<Vec<Option<usize>>>,
    /// customers per table (j, t)
    table_size: Vec<Vec<usize>>,
    /// fold of the observations seated at table (j, t)
    table_stats: Vec<Vec<SuffStats>>,
    /// tables in group j serving dish k
    group_dish_tables: Vec<Vec<usize>>,
    /// tables serving dish k across all groups
    dish_tables: Vec<usize>,
    /// fold of the observations of all customers assigned to dish k
    dish_stats: Vec<SuffStats>,
    relabels: Vec<Relabel>,
}

impl SeatingState {
    /// Seats every customer per `mode` and returns a consistent state.
    pub fn init(data: &GroupedDataset, mode: InitMode) -> Self {
        let mut state = Self::empty(data);
        match mode {
            InitMode::AllTogether => {
                let dish = state.add_dish();
                for j in 0..data.num_groups() {
                    let t = state.add_table(j, DishChoice::Existing(dish));
                    for i in 0..data.group_size(j) {
                        state.seat_at_table(data, j, i, t);
                    }
                }
            }
            InitMode::AllSingleton => {
                for (j, i) in data.customers() {
                    state.seat_at_new_table(data, j, i, DishChoice::New);
                }
            }
        }
        state.relabels.clear();
        state
    }

    /// Builds a state from explicit assignments: `tables[j][i]` is the table
    /// of customer (j, i) and `table_dishes[j][t]` the dish of table (j, t).
    /// Ids must be dense, every table nonempty and every dish served.
    pub fn from_assignment(
        data: &GroupedDataset,
        tables: &[Vec<usize>],
        table_dishes: &[Vec<usize>],
    ) -> Result<Self> {
        if tables.len() != data.num_groups() || table_dishes.len() != data.num_groups() {
            return Err(Error::InconsistentState(
                "assignment group count does not match dataset".into(),
            ));
        }
        let num_dishes = table_dishes
            .iter()
            .flatten()
            .copied()
            .max()
            .map_or(0, |k| k + 1);
        let mut state = Self::empty(data);
        for _ in 0..num_dishes {
            state.add_dish();
        }
        for (j, dishes) in table_dishes.iter().enumerate() {
            for &k in dishes {
                if k >= num_dishes {
                    return Err(Error::InconsistentState(format!(
                        "dish id {k} out of range"
                    )));
                }
                state.add_table(j, DishChoice::Existing(k));
            }
        }
        for (j, group) in tables.iter().enumerate() {
            if group.len() != data.group_size(j) {
                return Err(Error::InconsistentState(format!(
                    "group {j} assignment length does not match data"
                )));
            }
            for (i, &t) in group.iter().enumerate() {
                if t >= state.num_tables(j) {
                    return Err(Error::InconsistentState(format!(
                        "table id {t} out of range in group {j}"
                    )));
                }
                state.seat_at_table(data, j, i, t);
            }
        }
        let report = state.check_consistency(data);
        if !report.is_ok() {
            return Err(Error::InconsistentState(report.to_string()));
        }
        state.relabels.clear();
        Ok(state)
    }

    fn empty(data: &GroupedDataset) -> Self {
        let num_groups = data.num_groups();
        SeatingState {
            kind: data.kind(),
            table_of: (0..num_groups)
                .map(|j| vec![None; data.group_size(j)])
                .collect(),
            dish_of_table: vec![Vec::new(); num_groups],
            table_size: vec![Vec::new(); num_groups],
            table_stats: vec![Vec::new(); num_groups],
            group_dish_tables: vec![Vec::new(); num_groups],
            dish_tables: Vec::new(),
            dish_stats: Vec::new(),
            relabels: Vec::new(),
        }
    }

    pub fn num_groups(&self) -> usize {
        self.table_of.len()
    }

    pub fn num_tables(&self, j: usize) -> usize {
        self.table_size[j].len()
    }

    pub fn total_tables(&self) -> usize {
        self.dish_tables.iter().sum()
    }

    pub fn num_dishes(&self) -> usize {
        self.dish_tables.len()
    }

    pub fn table_of(&self, j: usize, i: usize) -> Option<usize> {
        self.table_of[j][i]
    }

    pub fn dish_of_table(&self, j: usize, t: usize) -> Option<usize> {
        self.dish_of_table[j][t]
    }

    /// Dish of customer (j, i), i.e. the dish of their table.
    pub fn dish_of_customer(&self, j: usize, i: usize) -> Option<usize> {
        self.table_of[j][i].and_then(|t| self.dish_of_table[j][t])
    }

    pub fn table_size(&self, j: usize, t: usize) -> usize {
        self.table_size[j][t]
    }

    pub fn table_stats(&self, j: usize, t: usize) -> &SuffStats {
        &self.table_stats[j][t]
    }

    /// Tables serving dish k in group j.
    pub fn group_dish_tables(&self, j: usize, k: usize) -> usize {
        self.group_dish_tables[j][k]
    }

    /// Tables serving dish k across all groups.
    pub fn dish_tables(&self, k: usize) -> usize {
        self.dish_tables[k]
    }

    pub fn dish_stats(&self, k: usize) -> &SuffStats {
        &self.dish_stats[k]
    }

    /// Drains the relabel events accumulated since the last call.
    pub fn take_relabels(&mut self) -> Vec<Relabel> {
        std::mem::take(&mut self.relabels)
    }

    fn add_dish(&mut self) -> usize {
        let k = self.dish_tables.len();
        self.dish_tables.push(0);
        self.dish_stats.push(SuffStats::empty(self.kind));
        for group in &mut self.group_dish_tables {
            group.push(0);
        }
        k
    }

    fn remove_dish(&mut self, k: usize) {
        debug_assert_eq!(
            self.dish_tables[k], 0,
            "removing a dish that still has tables"
        );
        let last = self.dish_tables.len() - 1;
        self.dish_tables.swap_remove(k);
        self.dish_stats.swap_remove(k);
        for group in &mut self.group_dish_tables {
            group.swap_remove(k);
        }
        if k != last {
            for dishes in &mut self.dish_of_table {
                for slot in dishes.iter_mut() {
                    if *slot == Some(last) {
                        *slot = Some(k);
                    }
                }
            }
            self.relabels.push(Relabel::Dish { from: last, to: k });
        }
    }

    fn add_table(&mut self, j: usize, dish: DishChoice) -> usize {
        let k = match dish {
            DishChoice::Existing(k) => k,
            DishChoice::New => self.add_dish(),
        };
        let t = self.table_size[j].len();
        self.table_size[j].push(0);
        self.table_stats[j].push(SuffStats::empty(self.kind));
        self.dish_of_table[j].push(Some(k));
        self.group_dish_tables[j][k] += 1;
        self.dish_tables[k] += 1;
        t
    }

    fn remove_table(&mut self, j: usize, t: usize) {
        debug_assert_eq!(
            self.table_size[j][t], 0,
            "removing a table that still has customers"
        );
        let k = self.dish_of_table[j][t].expect("removed table must reference its dish");
        self.group_dish_tables[j][k] -= 1;
        self.dish_tables[k] -= 1;
        let last = self.table_size[j].len() - 1;
        self.table_size[j].swap_remove(t);
        self.table_stats[j].swap_remove(t);
        self.dish_of_table[j].swap_remove(t);
        if t != last {
            for slot in self.table_of[j].iter_mut() {
                if *slot == Some(last) {
                    *slot = Some(t);
                }
            }
            self.relabels.push(Relabel::Table {
                group: j,
                from: last,
                to: t,
            });
        }
        if self.dish_tables[k] == 0 {
            self.remove_dish(k);
        }
    }

    /// Removes customer (j, i) from their table and from the table's dish
    /// statistics. An emptied table is dropped, and a dish that loses its
    /// last table is dropped with it. Panics if the customer is detached.
    pub fn detach_customer(&mut self, data: &GroupedDataset, j: usize, i: usize) {
        let t = self.table_of[j][i].unwrap_or_else(|| panic!("customer ({j}, {i}) is not seated"));
        let k = self.dish_of_table[j][t].expect("live table must serve a dish");
        let x = data.get(j, i);
        self.table_of[j][i] = None;
        self.table_size[j][t] -= 1;
        self.table_stats[j][t].remove(x);
        self.dish_stats[k].remove(x);
        if self.table_size[j][t] == 0 {
            self.remove_table(j, t);
        }
    }

    /// Seats the detached customer (j, i) at the existing table t.
    pub fn seat_at_table(&mut self, data: &GroupedDataset, j: usize, i: usize, t: usize) {
        assert!(
            self.table_of[j][i].is_none(),
            "customer ({j}, {i}) is already seated"
        );
        let k = self.dish_of_table[j][t].expect("target table must serve a dish");
        let x = data.get(j, i);
        self.table_of[j][i] = Some(t);
        self.table_size[j][t] += 1;
        self.table_stats[j][t].add(x);
        self.dish_stats[k].add(x);
    }

    /// Seats the detached customer (j, i) at a fresh table serving `dish`.
    /// Returns the new table id.
    pub fn seat_at_new_table(
        &mut self,
        data: &GroupedDataset,
        j: usize,
        i: usize,
        dish: DishChoice,
    ) -> usize {
        let t = self.add_table(j, dish);
        self.seat_at_table(data, j, i, t);
        t
    }

    /// Detaches the whole block of table (j, t) from its dish: the dish
    /// loses the table's statistics and its m-counts; a dish left with no
    /// tables is dropped. The table keeps its customers; pair with
    /// [`set_table_dish`](Self::set_table_dish).
    pub fn detach_table_dish(&mut self, j: usize, t: usize) {
        let k = self.dish_of_table[j][t]
            .unwrap_or_else(|| panic!("table ({j}, {t}) has no dish to detach"));
        self.dish_of_table[j][t] = None;
        let block = self.table_stats[j][t].clone();
        self.dish_stats[k].unmerge(&block);
        self.group_dish_tables[j][k] -= 1;
        self.dish_tables[k] -= 1;
        if self.dish_tables[k] == 0 {
            self.remove_dish(k);
        }
    }

    /// Assigns table (j, t) — whose dish was detached — to `dish`, folding
    /// the table's block into the dish statistics.
    pub fn set_table_dish(&mut self, j: usize, t: usize, dish: DishChoice) {
        assert!(
            self.dish_of_table[j][t].is_none(),
            "table ({j}, {t}) still has a dish; detach first"
        );
        let k = match dish {
            DishChoice::Existing(k) => k,
            DishChoice::New => self.add_dish(),
        };
        self.dish_of_table[j][t] = Some(k);
        let block = self.table_stats[j][t].clone();
        self.dish_stats[k].merge(&block);
        self.group_dish_tables[j][k] += 1;
        self.dish_tables[k] += 1;
    }

    /// Replaces the observed value of seated customer (j, i) in the table
    /// and dish statistics, leaving the seating untouched. Used when data is
    /// re-simulated under a fixed seating.
    pub fn swap_observation(
        &mut self,
        j: usize,
        i: usize,
        old: &crate::data::Observation,
        new: &crate::data::Observation,
    ) {
        let t = self.table_of[j][i].unwrap_or_else(|| panic!("customer ({j}, {i}) is not seated"));
        let k = self.dish_of_table[j][t].expect("live table must serve a dish");
        self.table_stats[j][t].remove(old);
        self.table_stats[j][t].add(new);
        self.dish_stats[k].remove(old);
        self.dish_stats[k].add(new);
    }

    /// Log probability of this seating under the franchise prior: per group
    /// the CRP(α₀) probability of the table partition, times the CRP(γ)
    /// probability of the dish partition over all tables:
    ///
    ///   Π_j [ Π_t α₀ (n_jt − 1)! / Π_{i=1..n_j} (i − 1 + α₀) ]
    ///     · Π_k γ (m_k − 1)! / Π_{m=1..m_total} (m − 1 + γ)
    pub fn crf_log_prior(&self, hyper: &HdpHyper) -> f64 {
        let mut lp = 0.0;
        for j in 0..self.num_groups() {
            let n_j: usize = self.table_size[j].iter().sum();
            lp += self.num_tables(j) as f64 * hyper.alpha0.ln();
            for &n in &self.table_size[j] {
                debug_assert!(n >= 1);
                lp += ln_gamma(n as f64);
            }
            lp -= ln_rising_factorial(hyper.alpha0, n_j as u64);
        }
        lp += self.num_dishes() as f64 * hyper.gamma.ln();
        for &m in &self.dish_tables {
            debug_assert!(m >= 1);
            lp += ln_gamma(m as f64);
        }
        lp -= ln_rising_factorial(hyper.gamma, self.total_tables() as u64);
        lp
    }

    /// Joint log score: franchise prior plus the marginal likelihood of each
    /// dish's block of observations.
    pub fn log_joint(&self, hyper: &HdpHyper) -> f64 {
        debug_assert_eq!(hyper.prior.obs_kind(), self.kind);
        self.crf_log_prior(hyper)
            + self
                .dish_stats
                .iter()
                .map(|s| hyper.prior.log_marginal(s))
                .sum::<f64>()
    }

    /// Verifies every structural invariant, recomputing all counts and
    /// statistics from scratch, and reports what does not match.
    pub fn check_consistency(&self, data: &GroupedDataset) -> ConsistencyReport {
        let mut report = ConsistencyReport::default();
        if self.num_groups() != data.num_groups() {
            report.violations.push(Violation::Shape {
                detail: format!(
                    "state has {} groups, data has {}",
                    self.num_groups(),
                    data.num_groups()
                ),
            });
            return report;
        }
        let num_dishes = self.num_dishes();
        let mut dish_table_count = vec![0usize; num_dishes];
        let mut dish_refold: Vec<SuffStats> = (0..num_dishes)
            .map(|_| SuffStats::empty(self.kind))
            .collect();

        for j in 0..self.num_groups() {
            if self.table_of[j].len() != data.group_size(j) {
                report.violations.push(Violation::Shape {
                    detail: format!("group {j} customer count mismatch"),
                });
                continue;
            }
            let num_tables = self.num_tables(j);
            let mut sizes = vec![0usize; num_tables];
            let mut refold: Vec<SuffStats> = (0..num_tables)
                .map(|_| SuffStats::empty(self.kind))
                .collect();
            for i in 0..data.group_size(j) {
                match self.table_of[j][i] {
                    None => report
                        .violations
                        .push(Violation::CustomerUnseated { group: j, index: i }),
                    Some(t) if t >= num_tables => {
                        report.violations.push(Violation::TableOutOfRange {
                            group: j,
                            index: i,
                            table: t,
                        })
                    }
                    Some(t) => {
                        sizes[t] += 1;
                        refold[t].add(data.get(j, i));
                    }
                }
            }
            let mut group_dish_count = vec![0usize; num_dishes];
            for t in 0..num_tables {
                if sizes[t] != self.table_size[j][t] {
                    report.violations.push(Violation::TableSize {
                        group: j,
                        table: t,
                        recorded: self.table_size[j][t],
                        actual: sizes[t],
                    });
                }
                if sizes[t] == 0 {
                    report
                        .violations
                        .push(Violation::EmptyTable { group: j, table: t });
                }
                if let Some(detail) = stats_mismatch(&self.table_stats[j][t], &refold[t]) {
                    report.violations.push(Violation::TableStats {
                        group: j,
                        table: t,
                        detail,
                    });
                }
                match self.dish_of_table[j][t] {
                    None => report
                        .violations
                        .push(Violation::DishMissing { group: j, table: t }),
                    Some(k) if k >= num_dishes => {
                        report.violations.push(Violation::DishOutOfRange {
                            group: j,
                            table: t,
                            dish: k,
                        })
                    }
                    Some(k) => {
                        group_dish_count[k] += 1;
                        dish_table_count[k] += 1;
                        dish_refold[k].merge(&refold[t]);
                    }
                }
            }
            for (k, (&actual, &recorded)) in group_dish_count
                .iter()
                .zip(&self.group_dish_tables[j])
                .enumerate()
            {
                if actual != recorded {
                    report.violations.push(Violation::GroupDishTables {
                        group: j,
                        dish: k,
                        recorded,
                        actual,
                    });
                }
            }
        }
        for k in 0..num_dishes {
            if dish_table_count[k] != self.dish_tables[k] {
                report.violations.push(Violation::DishTables {
                    dish: k,
                    recorded: self.dish_tables[k],
                    actual: dish_table_count[k],
                });
            }
            if dish_table_count[k] == 0 {
                report.violations.push(Violation::EmptyDish { dish: k });
            }
            if let Some(detail) = stats_mismatch(&self.dish_stats[k], &dish_refold[k]) {
                report
                    .violations
                    .push(Violation::DishStats { dish: k, detail });
            }
        }
        report
    }

    /// Per-customer table assignments; panics if anyone is detached.
    pub fn assignment_tables(&self) -> Vec<Vec<usize>> {
        self.table_of
            .iter()
            .map(|g| g.iter().map(|t| t.expect("customer detached")).collect())
            .collect()
    }

    /// Per-customer dish assignments (z); panics if anyone is detached.
    pub fn assignment_dishes(&self) -> Vec<Vec<usize>> {
        (0..self.num_groups())
            .map(|j| {
                (0..self.table_of[j].len())
                    .map(|i| self.dish_of_customer(j, i).expect("customer detached"))
                    .collect()
            })
            .collect()
    }

    /// Canonical per-customer (table, dish) labels, relabeled by order of
    /// first appearance walking customers group-major. Two states describe
    /// the same partition structure iff their canonical forms are equal.
    pub fn canonical_assignment(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut dish_map: Vec<Option<usize>> = vec![None; self.num_dishes()];
        let mut next_dish = 0usize;
        for j in 0..self.num_groups() {
            let mut table_map: Vec<Option<usize>> = vec![None; self.num_tables(j)];
            let mut next_table = 0usize;
            for i in 0..self.table_of[j].len() {
                let t = self.table_of[j][i].expect("customer detached");
                let k = self.dish_of_table[j][t].expect("table without dish");
                let ct = *table_map[t].get_or_insert_with(|| {
                    let v = next_table;
                    next_table += 1;
                    v
                });
                let ck = *dish_map[k].get_or_insert_with(|| {
                    let v = next_dish;
                    next_dish += 1;
                    v
                });
                out.push((ct, ck));
            }
        }
        out
    }
}

/// Human-readable difference between recorded and recomputed statistics, or
/// `None` if they agree (exactly for counts, within rounding for vectors).
fn stats_mismatch(recorded: &SuffStats, refold: &SuffStats) -> Option<String> {
    match (recorded, refold) {
        (SuffStats::Count(a), SuffStats::Count(b)) => {
            (a != b).then(|| format!("recorded {a:?}, recomputed {b:?}"))
        }
        (SuffStats::Vector(a), SuffStats::Vector(b)) => {
            if a.n() != b.n() {
                return Some(format!("recorded n={}, recomputed n={}", a.n(), b.n()));
            }
            let scale = 1.0 + b.sum_sq().abs();
            let sum_off = a
                .sum()
                .iter()
                .zip(b.sum())
                .any(|(x, y)| (x - y).abs() > 1e-9 * scale);
            let sq_off = (a.sum_sq() - b.sum_sq()).abs() > 1e-9 * scale;
            (sum_off || sq_off).then(|| format!("recorded {a:?}, recomputed {b:?}"))
        }
        _ => Some("statistics kind mismatch".into()),
    }
}
