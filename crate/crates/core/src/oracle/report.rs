//! Pass/fail reporting for the verification suite: one line per check with
//! the expected value, the computed value and the tolerance it was held to.

/// A single verified quantity.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    /// Relative-error check: passes when |got/expected - 1| <= tol.
    pub fn relative(name: impl Into<String>, expected: f64, got: f64, tol: f64) -> Self {
        let rel = if expected == got {
            0.0
        } else {
            (got / expected - 1.0).abs()
        };
        Check {
            name: name.into(),
            expected: format!("{expected:.12e}"),
            got: format!("{got:.12e}"),
            tolerance: format!("rel {tol:.1e}"),
            pass: rel <= tol,
        }
    }

    /// Absolute-error check: passes when |got - expected| <= tol.
    pub fn absolute(name: impl Into<String>, expected: f64, got: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected: format!("{expected:.12e}"),
            got: format!("{got:.12e}"),
            tolerance: format!("abs {tol:.1e}"),
            pass: (got - expected).abs() <= tol,
        }
    }

    /// Upper-bound check: passes when got <= bound.
    pub fn below(name: impl Into<String>, bound: f64, got: f64) -> Self {
        Check {
            name: name.into(),
            expected: format!("<= {bound}"),
            got: format!("{got:.6}"),
            tolerance: format!("max {bound}"),
            pass: got <= bound,
        }
    }

    /// Lower-bound check: passes when got >= bound.
    pub fn above(name: impl Into<String>, bound: f64, got: f64) -> Self {
        Check {
            name: name.into(),
            expected: format!(">= {bound}"),
            got: format!("{got:.6}"),
            tolerance: format!("min {bound}"),
            pass: got >= bound,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} expected={} got={} tol={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.got,
            self.tolerance
        )
    }
}

/// All checks from one validation run.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn extend(&mut self, checks: Vec<Check>) {
        self.checks.extend(checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        writeln!(
            f,
            "{} checks, {} failed",
            self.checks.len(),
            self.failures()
        )
    }
}
