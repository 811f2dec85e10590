//! Python bindings for `powcap`.
//!
//! Indices passed in from Python are 0-based; assignment lists in TOML
//! files stay 1-based as on the command line.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use powcap::axioms::{check_all, CheckConfig};
use powcap::capacity::{compare_regions, sample_region as sample_cloud, Predicate, RegionSpec, Relation};
use powcap::cli::parse_function;
use powcap::config::{region_predicate, ScenarioConfig};
use powcap::engine::{contraction_modulus, solve as picard, SolveConfig};
use powcap::scenarios::{FixedAssignment, MacroDiversity, Model, SingleCell};
use powcap::{Error, FeasibilityReport, GainMatrix, NoiseVector, PowerVector, QosVector};

create_exception!(powcap, InfeasibleError, PyException, "No contraction certificate for the system.");
create_exception!(powcap, ConvergenceError, PyException, "Iteration stopped before converging.");

/// `(axiom, passed, witness)`.
type AxiomRow = (String, bool, Option<String>);
type Witness = Option<Vec<f64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Infeasible(r) => InfeasibleError::new_err(format!("not certified feasible (lambda = {})", r.lambda)),
        e @ Error::NonConvergence { .. } => ConvergenceError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

#[pyfunction]
fn sup_norm(x: Vec<f64>) -> PyResult<f64> {
    powcap::sup_norm(&x).map_err(to_py)
}

#[pyfunction]
fn remove_component(x: Vec<f64>, i: usize) -> PyResult<Vec<f64>> {
    powcap::remove_component(&x, i).map_err(to_py)
}

/// Baseline test `sum(alphas) < receivers`.
#[pyfunction]
fn hanly(alphas: Vec<f64>, receivers: usize) -> bool {
    powcap::hanly(&alphas, receivers)
}

#[pyclass(name = "Report", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyReport {
    lambda_: f64,
    feasible: bool,
    moduli: Vec<f64>,
    receivers: Vec<Option<usize>>,
    binding_terminal: Option<usize>,
    binding_receiver: Option<usize>,
}

impl From<FeasibilityReport> for PyReport {
    fn from(r: FeasibilityReport) -> Self {
        PyReport {
            lambda_: r.lambda,
            feasible: r.feasible,
            moduli: r.per_terminal_modulus,
            receivers: r.per_terminal_receiver,
            binding_terminal: r.binding.map(|b| b.terminal),
            binding_receiver: r.binding.and_then(|b| b.receiver),
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("Report(lambda_={}, feasible={})", self.lambda_, if self.feasible { "True" } else { "False" })
    }
}

#[pyclass(name = "Solution", frozen, get_all)]
struct PySolution {
    power: Vec<f64>,
    iterations: usize,
    certified: bool,
    deltas: Vec<f64>,
    report: PyReport,
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!("Solution(power={:?}, iterations={})", self.power, self.iterations)
    }
}

/// A scenario together with the update rules built from it.
#[pyclass(name = "System", frozen)]
struct PySystem {
    model: Model,
    inner: powcap::System,
}

impl PySystem {
    fn wrap(model: Model) -> PyResult<Self> {
        let inner = model.build().map_err(to_py)?;
        Ok(PySystem { model, inner })
    }
}

#[pymethods]
impl PySystem {
    /// Single cell; `coordinates` is "received", "transformed" or "transmit".
    #[staticmethod]
    #[pyo3(signature = (alphas, sigma, gains=None, coordinates="received"))]
    fn single_cell(alphas: Vec<f64>, sigma: f64, gains: Option<Vec<f64>>, coordinates: &str) -> PyResult<Self> {
        let q = QosVector::new(alphas).map_err(to_py)?;
        let sc = match gains {
            Some(h) => SingleCell::new(q, h, sigma),
            None => SingleCell::unit_gains(q, sigma),
        }
        .map_err(to_py)?;
        let model = match coordinates {
            "received" => Model::SingleCellReceived(sc),
            "transformed" => Model::SingleCellTransformed(sc),
            "transmit" => Model::SingleCellTransmit(sc),
            other => return Err(PyValueError::new_err(format!("unknown coordinates {other:?}"))),
        };
        Self::wrap(model)
    }

    /// Macro-diversity with one gain row per terminal; `transformed=False`
    /// iterates on transmit powers.
    #[staticmethod]
    #[pyo3(signature = (alphas, gains, sigma, transformed=true))]
    fn macro_diversity(alphas: Vec<f64>, gains: Vec<Vec<f64>>, sigma: Vec<f64>, transformed: bool) -> PyResult<Self> {
        let md = MacroDiversity::new(
            QosVector::new(alphas).map_err(to_py)?,
            GainMatrix::new(gains).map_err(to_py)?,
            NoiseVector::new(sigma).map_err(to_py)?,
        )
        .map_err(to_py)?;
        Self::wrap(if transformed { Model::MacroDiversityTransformed(md) } else { Model::MacroDiversity(md) })
    }

    #[staticmethod]
    fn fixed_assignment(
        alphas: Vec<f64>,
        gains: Vec<Vec<f64>>,
        assignment: Vec<usize>,
        sigma: Vec<f64>,
    ) -> PyResult<Self> {
        let fa = FixedAssignment::new(
            QosVector::new(alphas).map_err(to_py)?,
            GainMatrix::new(gains).map_err(to_py)?,
            assignment,
            NoiseVector::new(sigma).map_err(to_py)?,
        )
        .map_err(to_py)?;
        Self::wrap(Model::FixedAssignment(fa))
    }

    /// Any scenario from the TOML config format.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let cfg = ScenarioConfig::from_toml(text).map_err(to_py)?;
        Self::wrap(cfg.to_model().map_err(to_py)?)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("System(n={}, coordinates={:?})", self.inner.len(), self.model.coordinates())
    }

    #[getter]
    fn alphas(&self) -> Vec<f64> {
        self.model.alphas().as_slice().to_vec()
    }

    #[getter]
    fn coordinates(&self) -> &'static str {
        self.model.coordinates()
    }

    /// One synchronous update of every terminal.
    fn apply(&self, p: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.apply(&p).map_err(to_py)
    }

    fn contraction_modulus(&self) -> PyResult<PyReport> {
        contraction_modulus(&self.inner).map(Into::into).map_err(to_py)
    }

    #[pyo3(signature = (tolerance=None, max_iter=None, initial=None, force=false))]
    fn solve(
        &self,
        py: Python<'_>,
        tolerance: Option<f64>,
        max_iter: Option<usize>,
        initial: Option<Vec<f64>>,
        force: bool,
    ) -> PyResult<PySolution> {
        let mut cfg = SolveConfig { force, ..SolveConfig::default() };
        if let Some(t) = tolerance {
            cfg.tolerance = t;
        }
        if let Some(m) = max_iter {
            cfg.max_iter = m;
        }
        if let Some(p) = initial {
            cfg.initial = Some(PowerVector::new(p).map_err(to_py)?);
        }
        let sol = py.detach(|| picard(&self.inner, &cfg)).map_err(to_py)?;
        Ok(PySolution {
            power: sol.power,
            iterations: sol.trace.iterations_used,
            certified: sol.trace.certified,
            deltas: sol.trace.deltas,
            report: sol.report.into(),
        })
    }
}

/// Runs the axiom suite on a function spec such as "holder:2" or
/// "weighted:1,0.5". Returns `(all_passed, [(axiom, passed, witness)])`.
#[pyfunction]
#[pyo3(signature = (function, dim=None, seed=0, samples=2000))]
fn check_axioms(function: &str, dim: Option<usize>, seed: u64, samples: usize) -> PyResult<(bool, Vec<AxiomRow>)> {
    let f = parse_function(function, dim).map_err(to_py)?;
    let r = check_all(f.as_ref(), &CheckConfig::new(samples, seed).map_err(to_py)?).map_err(to_py)?;
    let rows = r
        .verdicts
        .iter()
        .map(|v| (v.axiom.name().to_string(), v.passed, v.counterexample.as_ref().map(|c| c.to_string())))
        .collect();
    Ok((r.all_passed(), rows))
}

fn spec_for(system: &PySystem, resolution: usize, alpha_max: Option<f64>, allow_large: bool) -> PyResult<RegionSpec> {
    let n = system.inner.len();
    let top = alpha_max.unwrap_or(system.model.receivers() as f64);
    let mut spec = RegionSpec::new(region_predicate(&system.model), n, top, resolution).map_err(to_py)?;
    spec.allow_large = allow_large;
    Ok(spec)
}

/// Grid sample of the scenario's feasible targets: `(points, feasible)`.
#[pyfunction]
#[pyo3(signature = (system, resolution=41, alpha_max=None, allow_large=false))]
fn sample_region(
    py: Python<'_>,
    system: &PySystem,
    resolution: usize,
    alpha_max: Option<f64>,
    allow_large: bool,
) -> PyResult<(Vec<Vec<f64>>, Vec<bool>)> {
    let spec = spec_for(system, resolution, alpha_max, allow_large)?;
    let cloud = py.detach(|| sample_cloud(&spec)).map_err(to_py)?;
    Ok(cloud.points().unzip())
}

/// Compares the scenario's region with the baseline `sum(alphas) < K` on
/// the same grid: `(relation, scenario_only_witness, baseline_only_witness)`.
#[pyfunction]
#[pyo3(signature = (system, resolution=41, receivers=None, alpha_max=None))]
fn compare_hanly(
    py: Python<'_>,
    system: &PySystem,
    resolution: usize,
    receivers: Option<usize>,
    alpha_max: Option<f64>,
) -> PyResult<(String, Witness, Witness)> {
    let spec = spec_for(system, resolution, alpha_max, false)?;
    let k = receivers.unwrap_or(system.model.receivers());
    let base = RegionSpec { predicate: Predicate::Hanly { receivers: k }, ..spec.clone() };
    let c = py
        .detach(|| {
            let a = sample_cloud(&spec)?;
            let b = sample_cloud(&base)?;
            compare_regions(&a, &b)
        })
        .map_err(to_py)?;
    let relation = match c.relation {
        Relation::Equal => "equal",
        Relation::ASubsetB => "scenario_subset",
        Relation::BSubsetA => "baseline_subset",
        Relation::Incomparable => "incomparable",
    };
    Ok((relation.to_string(), c.a_only, c.b_only))
}

#[pymodule(name = "powcap")]
fn powcap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(sup_norm, m)?)?;
    m.add_function(wrap_pyfunction!(remove_component, m)?)?;
    m.add_function(wrap_pyfunction!(hanly, m)?)?;
    m.add_function(wrap_pyfunction!(check_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(sample_region, m)?)?;
    m.add_function(wrap_pyfunction!(compare_hanly, m)?)?;
    Ok(())
}
