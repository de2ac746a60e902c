//! Python bindings: the conjugate families, dataset construction, chain
//! fitting and the verification suite, as a thin layer over the core crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hdpmix::conjugate::{
    CountStats, FamilyPrior, GammaPoissonParams, HdpHyper, NormalGammaParams, VectorStats,
};
use hdpmix::data::GroupedDataset;
use hdpmix::io::derive_seed;
use hdpmix::oracle::{label_agreement, run_validation, Grid};
use hdpmix::sampler::{run_chain, SamplerConfig, ScanOrder};
use hdpmix::state::InitMode;
use hdpmix::synth;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Gamma prior over a Poisson rate; predictives are Negative Binomial.
#[pyclass(name = "GammaPoisson", from_py_object)]
#[derive(Clone)]
struct PyGammaPoisson {
    params: GammaPoissonParams,
}

#[pymethods]
impl PyGammaPoisson {
    #[new]
    fn new(alpha: f64, beta: f64) -> PyResult<Self> {
        Ok(Self {
            params: GammaPoissonParams::new(alpha, beta).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.params.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.params.beta
    }

    /// Posterior parameters after observing `values`.
    fn posterior(&self, values: Vec<u64>) -> Self {
        Self {
            params: self.params.posterior(&CountStats::from_values(&values)),
        }
    }

    /// Log predictive density of one count under these parameters.
    fn log_pred_one(&self, x: u64) -> f64 {
        self.params.log_pred_one(x)
    }

    /// Log predictive density of a block of counts under these parameters.
    fn log_pred_block(&self, values: Vec<u64>) -> PyResult<f64> {
        if values.is_empty() {
            return Err(PyValueError::new_err("block must be nonempty"));
        }
        Ok(self
            .params
            .log_pred_block(&CountStats::from_values(&values)))
    }

    /// Log marginal likelihood of `values` under these parameters.
    fn log_marginal(&self, values: Vec<u64>) -> f64 {
        self.params.log_marginal(&CountStats::from_values(&values))
    }

    fn __repr__(&self) -> String {
        format!(
            "GammaPoisson(alpha={}, beta={})",
            self.params.alpha, self.params.beta
        )
    }
}

/// Normal-Gamma prior over the mean and isotropic precision of a Gaussian;
/// predictives are Student-t.
#[pyclass(name = "NormalGamma", from_py_object)]
#[derive(Clone)]
struct PyNormalGamma {
    params: NormalGammaParams,
}

impl PyNormalGamma {
    fn stats(&self, values: &[Vec<f64>]) -> PyResult<VectorStats> {
        for v in values {
            if v.len() != self.params.dim() {
                return Err(PyValueError::new_err(format!(
                    "expected dimension {}, got {}",
                    self.params.dim(),
                    v.len()
                )));
            }
        }
        Ok(VectorStats::from_values(self.params.dim(), values))
    }

    fn check_query(&self, x: &[f64]) -> PyResult<()> {
        if x.len() != self.params.dim() {
            return Err(PyValueError::new_err(format!(
                "expected dimension {}, got {}",
                self.params.dim(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(PyValueError::new_err("query must be finite"));
        }
        Ok(())
    }
}

#[pymethods]
impl PyNormalGamma {
    #[new]
    fn new(mu0: Vec<f64>, kappa0: f64, alpha0: f64, beta0: f64) -> PyResult<Self> {
        Ok(Self {
            params: NormalGammaParams::new(mu0, kappa0, alpha0, beta0).map_err(err)?,
        })
    }

    #[getter]
    fn mu(&self) -> Vec<f64> {
        self.params.mu.clone()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.params.kappa
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.params.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.params.beta
    }

    fn posterior(&self, values: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            params: self.params.posterior(&self.stats(&values)?),
        })
    }

    fn log_pred_one(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check_query(&x)?;
        Ok(self.params.log_pred_one(&x))
    }

    fn log_pred_block(&self, values: Vec<Vec<f64>>) -> PyResult<f64> {
        if values.is_empty() {
            return Err(PyValueError::new_err("block must be nonempty"));
        }
        Ok(self.params.log_pred_block(&self.stats(&values)?))
    }

    fn log_marginal(&self, values: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.params.log_marginal(&self.stats(&values)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "NormalGamma(mu0={:?}, kappa0={}, alpha0={}, beta0={})",
            self.params.mu, self.params.kappa, self.params.alpha, self.params.beta
        )
    }
}

/// Grouped observations (counts or fixed-dimension real vectors).
#[pyclass(name = "Dataset", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    data: GroupedDataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a count dataset from one list of values per group.
    #[staticmethod]
    fn from_counts(groups: Vec<Vec<u64>>) -> PyResult<Self> {
        Ok(Self {
            data: GroupedDataset::from_counts(groups).map_err(err)?,
        })
    }

    /// Builds a vector dataset from one list of vectors per group.
    #[staticmethod]
    fn from_vectors(groups: Vec<Vec<Vec<f64>>>) -> PyResult<Self> {
        Ok(Self {
            data: GroupedDataset::from_vectors(groups).map_err(err)?,
        })
    }

    #[getter]
    fn num_groups(&self) -> usize {
        self.data.num_groups()
    }

    #[getter]
    fn total_observations(&self) -> usize {
        self.data.total_observations()
    }

    fn group_size(&self, j: usize) -> PyResult<usize> {
        if j >= self.data.num_groups() {
            return Err(PyValueError::new_err(format!("no group {j}")));
        }
        Ok(self.data.group_size(j))
    }

    fn __len__(&self) -> usize {
        self.data.total_observations()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} groups, {} observations, {:?})",
            self.data.num_groups(),
            self.data.total_observations(),
            self.data.kind()
        )
    }
}

/// Result of one chain: traces, final assignments and dish count.
#[pyclass(name = "FitResult")]
struct PyFitResult {
    #[pyo3(get)]
    num_dishes: Vec<usize>,
    #[pyo3(get)]
    log_joint: Vec<f64>,
    #[pyo3(get)]
    modal_k: usize,
    /// Final dish of each observation, per group.
    #[pyo3(get)]
    dishes: Vec<Vec<usize>>,
    /// Final table of each observation, per group.
    #[pyo3(get)]
    tables: Vec<Vec<usize>>,
}

fn build_hyper(
    gamma: f64,
    alpha0: f64,
    gp: Option<PyGammaPoisson>,
    ng: Option<PyNormalGamma>,
) -> PyResult<HdpHyper> {
    let prior = match (gp, ng) {
        (Some(p), None) => FamilyPrior::GammaPoisson(p.params),
        (None, Some(p)) => FamilyPrior::NormalGamma(p.params),
        _ => {
            return Err(PyValueError::new_err(
                "pass exactly one of gamma_poisson= or normal_gamma=",
            ))
        }
    };
    HdpHyper::new(gamma, alpha0, prior).map_err(err)
}

/// Runs one collapsed Gibbs chain and returns its trace and final state.
#[pyfunction]
#[pyo3(signature = (dataset, gamma, alpha0, *, gamma_poisson=None, normal_gamma=None,
                    sweeps=1000, burn_in=500, seed=0, shuffled_scan=true,
                    init_all_together=true))]
#[allow(clippy::too_many_arguments)]
fn fit(
    dataset: &PyDataset,
    gamma: f64,
    alpha0: f64,
    gamma_poisson: Option<PyGammaPoisson>,
    normal_gamma: Option<PyNormalGamma>,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
    shuffled_scan: bool,
    init_all_together: bool,
) -> PyResult<PyFitResult> {
    let hyper = build_hyper(gamma, alpha0, gamma_poisson, normal_gamma)?;
    let config = SamplerConfig {
        sweeps,
        burn_in,
        snapshot_every: 0,
        seed,
        scan_order: if shuffled_scan {
            ScanOrder::ShuffledPerSweep
        } else {
            ScanOrder::Fixed
        },
        init_mode: if init_all_together {
            InitMode::AllTogether
        } else {
            InitMode::AllSingleton
        },
        paranoid: false,
    };
    let (trace, state) = run_chain(&dataset.data, &hyper, &config).map_err(err)?;
    Ok(PyFitResult {
        num_dishes: trace.sweeps.iter().map(|s| s.num_dishes).collect(),
        log_joint: trace.sweeps.iter().map(|s| s.log_joint).collect(),
        modal_k: trace.modal_num_dishes(burn_in).unwrap_or(0),
        dishes: state.assignment_dishes(),
        tables: state.assignment_tables(),
    })
}

/// Forward-samples a dataset; returns (dataset, dishes per observation).
#[pyfunction]
#[pyo3(signature = (group_sizes, gamma, alpha0, *, gamma_poisson=None, normal_gamma=None, seed=0))]
fn forward_sample(
    group_sizes: Vec<usize>,
    gamma: f64,
    alpha0: f64,
    gamma_poisson: Option<PyGammaPoisson>,
    normal_gamma: Option<PyNormalGamma>,
    seed: u64,
) -> PyResult<(PyDataset, Vec<Vec<usize>>)> {
    let hyper = build_hyper(gamma, alpha0, gamma_poisson, normal_gamma)?;
    let sample = synth::forward_sample_seeded(&hyper, &group_sizes, seed).map_err(err)?;
    let dishes = sample.dishes();
    Ok((PyDataset { data: sample.data }, dishes))
}

/// Returns a registered benchmark scenario: (dataset, true dishes).
#[pyfunction]
fn scenario(name: &str) -> PyResult<(PyDataset, Vec<Vec<usize>>)> {
    let s = synth::fixed_scenario(name).map_err(err)?;
    Ok((PyDataset { data: s.data }, s.truth))
}

/// Fraction of observations whose inferred dish matches the truth under the
/// best label matching.
#[pyfunction(name = "label_agreement")]
fn py_label_agreement(truth: Vec<Vec<usize>>, inferred: Vec<Vec<usize>>) -> PyResult<f64> {
    if truth.len() != inferred.len() || truth.iter().zip(&inferred).any(|(a, b)| a.len() != b.len())
    {
        return Err(PyValueError::new_err("shape mismatch between assignments"));
    }
    Ok(label_agreement(&truth, &inferred))
}

/// Runs the quick self-verification suite; returns (all_passed, report).
#[pyfunction]
#[pyo3(signature = (full=false))]
fn validate(full: bool) -> PyResult<(bool, String)> {
    let grid = if full { Grid::Full } else { Grid::Quick };
    let report = run_validation(grid).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((report.all_pass(), report.to_string()))
}

/// Deterministic per-chain seed derivation, exposed for reproducing CLI runs.
#[pyfunction(name = "derive_seed")]
fn py_derive_seed(seed: u64, chain: u64) -> u64 {
    derive_seed(seed, chain)
}

#[pymodule]
fn hdpmix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGammaPoisson>()?;
    m.add_class::<PyNormalGamma>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(forward_sample, m)?)?;
    m.add_function(wrap_pyfunction!(scenario, m)?)?;
    m.add_function(wrap_pyfunction!(py_label_agreement, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(py_derive_seed, m)?)?;
    Ok(())
}
