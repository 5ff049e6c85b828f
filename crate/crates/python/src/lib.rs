//! Python bindings. Scalar parameters are passed as plain floats; domain
//! errors raise `ValueError`, numerical engine failures raise `RuntimeError`.

use ::ab_rsa as core;
use core::analytic::{self, ModelParams as CoreParams};
use core::events::{self, EventIndex, Parity};
use core::lattice::{Boundary, SiteState};
use core::oracle::{self, OracleProblem};
use core::simulator::{self, LatticeConfig};
use core::verify::{self, ClosedForm, Tier};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    if e.is_invalid_input() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn params(alpha: f64, t: f64) -> PyResult<CoreParams> {
    CoreParams::new(alpha, t).map_err(err)
}

fn boundary(name: &str) -> PyResult<Boundary> {
    name.parse().map_err(err)
}

fn parity(label: &str) -> PyResult<Parity> {
    Parity::ALL
        .into_iter()
        .find(|p| p.label().eq_ignore_ascii_case(label))
        .ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown parity '{label}', expected ee, oe, eo or oo"
            ))
        })
}

/// Validated `(alpha, t)` pair.
#[pyclass(frozen, skip_from_py_object, module = "ab_rsa")]
#[derive(Clone, Copy)]
struct ModelParams(CoreParams);

#[pymethods]
impl ModelParams {
    #[new]
    fn new(alpha: f64, t: f64) -> PyResult<Self> {
        params(alpha, t).map(Self)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t()
    }

    /// `(gamma, theta)`; requires `0 < alpha < 1`.
    fn derived(&self) -> PyResult<(f64, f64)> {
        let d = self.0.derived().map_err(err)?;
        Ok((d.gamma, d.theta))
    }

    fn swapped(&self) -> Self {
        Self(self.0.swapped())
    }

    fn rho_a(&self) -> f64 {
        analytic::closed_form_rho_a(&self.0)
    }

    fn triple(&self) -> PyResult<DensityTriple> {
        analytic::density_triple(&self.0)
            .map(Into::into)
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(alpha={}, t={})", self.0.alpha(), self.0.t())
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "ab_rsa")]
#[derive(Clone, Copy)]
struct DensityTriple {
    rho_a: f64,
    rho_b: f64,
    rho_x: f64,
}

impl From<core::DensityTriple> for DensityTriple {
    fn from(d: core::DensityTriple) -> Self {
        Self {
            rho_a: d.rho_a,
            rho_b: d.rho_b,
            rho_x: d.rho_x,
        }
    }
}

#[pymethods]
impl DensityTriple {
    fn sum(&self) -> f64 {
        self.rho_a + self.rho_b + self.rho_x
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityTriple(rho_a={}, rho_b={}, rho_x={})",
            self.rho_a, self.rho_b, self.rho_x
        )
    }
}

#[pyfunction]
fn closed_form_rho_a(alpha: f64, t: f64) -> PyResult<f64> {
    Ok(analytic::closed_form_rho_a(&params(alpha, t)?))
}

#[pyfunction]
fn density_triple(alpha: f64, t: f64) -> PyResult<DensityTriple> {
    analytic::density_triple(&params(alpha, t)?)
        .map(Into::into)
        .map_err(err)
}

/// Returns `(value, error_estimate, evaluations)`.
#[pyfunction]
#[pyo3(signature = (alpha, t, abs_tol = 1e-12))]
fn integral_rho_a(alpha: f64, t: f64, abs_tol: f64) -> PyResult<(f64, f64, usize)> {
    let q = analytic::integral_rho_a(&params(alpha, t)?, abs_tol).map_err(err)?;
    Ok((q.value, q.error_estimate, q.evaluations))
}

#[pyfunction]
fn rho_a_rate(alpha: f64, t: f64) -> PyResult<f64> {
    Ok(analytic::rho_a_rate(&params(alpha, t)?))
}

#[pyfunction]
#[pyo3(signature = (alpha, t, order = 4))]
fn series_rho_a_small_t(alpha: f64, t: f64, order: u32) -> PyResult<f64> {
    analytic::series_rho_a_small_t(&params(alpha, t)?, order).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (alpha, order = 4))]
fn series_rho_a_t1_small_alpha(alpha: f64, order: u32) -> PyResult<f64> {
    analytic::series_rho_a_t1_small_alpha(alpha, order).map_err(err)
}

/// The `t` with `rho_A(t; alpha) = lam`, or `None` when the level is not reached by `t = 1`.
#[pyfunction]
fn contour_solve_t(alpha: f64, lam: f64) -> PyResult<Option<f64>> {
    analytic::contour_solve_t(alpha, lam).map_err(err)
}

#[pyfunction]
fn prob_main_event(j: usize, k: usize, parity_label: &str, alpha: f64, t: f64) -> PyResult<f64> {
    let idx = EventIndex::new(j, k, parity(parity_label)?);
    events::prob_main_event(&idx, &params(alpha, t)?).map_err(err)
}

#[pyfunction]
fn combined_term(j: usize, k: usize, alpha: f64, t: f64) -> PyResult<f64> {
    events::combined_term(j, k, &params(alpha, t)?).map_err(err)
}

/// Returns `(value, tail_bound)`.
#[pyfunction]
#[pyo3(signature = (alpha, t, max_index = 25))]
fn rho_a_event_sum(alpha: f64, t: f64, max_index: usize) -> PyResult<(f64, f64)> {
    let s = events::rho_a_event_sum(&params(alpha, t)?, max_index).map_err(err)?;
    Ok((s.value, s.tail_bound))
}

#[pyfunction]
fn hyperbolic_resummation_check(x: f64, n_terms: usize) -> PyResult<[f64; 4]> {
    events::hyperbolic_resummation_check(x, n_terms).map_err(err)
}

/// `event_list` holds `(j, k, parity)` triples; returns `(hits, trials, frequency, std_error)` per event.
#[pyfunction]
#[pyo3(signature = (event_list, alpha, t, trials, seed = core::rng::DEFAULT_SEED))]
fn event_frequencies(
    py: Python<'_>,
    event_list: Vec<(usize, usize, String)>,
    alpha: f64,
    t: f64,
    trials: u64,
    seed: u64,
) -> PyResult<Vec<(u64, u64, f64, f64)>> {
    let idx = event_list
        .iter()
        .map(|(j, k, p)| Ok(EventIndex::new(*j, *k, parity(p)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let p = params(alpha, t)?;
    let out = py
        .detach(|| events::event_frequencies(&idx, &p, trials, seed))
        .map_err(err)?;
    Ok(out
        .into_iter()
        .map(|f| (f.hits, f.trials, f.frequency, f.std_error))
        .collect())
}

#[pyclass(frozen, get_all, module = "ab_rsa")]
struct DensityEstimate {
    time: f64,
    mean: DensityTriple,
    std_error: DensityTriple,
    replicas: u64,
    n_sites: usize,
    sites_counted: usize,
}

#[pymethods]
impl DensityEstimate {
    fn __repr__(&self) -> String {
        format!(
            "DensityEstimate(time={}, rho_a={} +- {}, replicas={})",
            self.time, self.mean.rho_a, self.std_error.rho_a, self.replicas
        )
    }
}

fn lattice_config(
    n_sites: usize,
    alpha: f64,
    sample_times: Vec<f64>,
    replicas: u64,
    seed: u64,
    boundary_name: &str,
) -> PyResult<LatticeConfig> {
    Ok(LatticeConfig {
        n_sites,
        boundary: boundary(boundary_name)?,
        alpha,
        sample_times,
        master_seed: seed,
        replicas,
    })
}

#[pyfunction]
#[pyo3(signature = (n_sites, alpha, sample_times, replicas = 8, seed = core::rng::DEFAULT_SEED, boundary = "periodic", margin = 0))]
#[allow(clippy::too_many_arguments)]
fn estimate_density(
    py: Python<'_>,
    n_sites: usize,
    alpha: f64,
    sample_times: Vec<f64>,
    replicas: u64,
    seed: u64,
    boundary: &str,
    margin: usize,
) -> PyResult<Vec<DensityEstimate>> {
    let config = lattice_config(n_sites, alpha, sample_times, replicas, seed, boundary)?;
    let estimates = py
        .detach(|| simulator::estimate_bulk_density(&config, margin))
        .map_err(err)?;
    Ok(estimates
        .into_iter()
        .map(|e| DensityEstimate {
            time: e.time,
            mean: e.mean.into(),
            std_error: e.std_error.into(),
            replicas: e.replicas,
            n_sites: e.n_sites,
            sites_counted: e.sites_counted,
        })
        .collect())
}

/// One replica's lattice at each sample time, as strings over `A`, `B`, `X`.
#[pyfunction]
#[pyo3(signature = (n_sites, alpha, sample_times, seed = core::rng::DEFAULT_SEED, replica = 0, boundary = "periodic"))]
fn run_once(
    n_sites: usize,
    alpha: f64,
    sample_times: Vec<f64>,
    seed: u64,
    replica: u64,
    boundary: &str,
) -> PyResult<Vec<String>> {
    let config = lattice_config(n_sites, alpha, sample_times, 1, seed, boundary)?;
    let run = simulator::run_once(&config, replica).map_err(err)?;
    Ok(run
        .site_states
        .iter()
        .map(|states| states.iter().map(SiteState::to_string).collect())
        .collect())
}

fn problem(
    n_sites: usize,
    alpha: f64,
    t: f64,
    target: usize,
    boundary_name: &str,
) -> PyResult<OracleProblem> {
    Ok(OracleProblem {
        n_sites,
        boundary: boundary(boundary_name)?,
        alpha,
        t,
        target_site: target,
    })
}

#[pyfunction]
#[pyo3(signature = (n_sites, alpha, t, target = 0, boundary = "free"))]
fn exact_occupation(
    n_sites: usize,
    alpha: f64,
    t: f64,
    target: usize,
    boundary: &str,
) -> PyResult<DensityTriple> {
    oracle::exact_occupation(&problem(n_sites, alpha, t, target, boundary)?)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n_sites, alpha, t, boundary = "free"))]
fn exact_occupation_all(
    n_sites: usize,
    alpha: f64,
    t: f64,
    boundary: &str,
) -> PyResult<Vec<DensityTriple>> {
    let all =
        oracle::exact_occupation_all(&problem(n_sites, alpha, t, 0, boundary)?).map_err(err)?;
    Ok(all.into_iter().map(Into::into).collect())
}

#[pyclass(frozen, get_all, module = "ab_rsa")]
struct WindowDensity {
    value: f64,
    closed_form: f64,
    gap: f64,
    tail_bound: f64,
    max_index: usize,
}

#[pymethods]
impl WindowDensity {
    fn __repr__(&self) -> String {
        format!(
            "WindowDensity(value={}, closed_form={}, gap={})",
            self.value, self.closed_form, self.gap
        )
    }
}

#[pyfunction]
fn window_density(alpha: f64, t: f64, half_width: usize) -> PyResult<WindowDensity> {
    let w = oracle::window_density(alpha, t, half_width).map_err(err)?;
    Ok(WindowDensity {
        value: w.value,
        closed_form: w.closed_form,
        gap: w.gap(),
        tail_bound: w.truncation_note,
        max_index: w.max_index,
    })
}

/// Runs the verification suite; returns `(name, measured, tolerance, passed)` per check.
#[pyfunction]
#[pyo3(signature = (tier = "fast"))]
fn run_verification(py: Python<'_>, tier: &str) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let tier = match tier {
        "fast" => Tier::Fast,
        "full" => Tier::Full,
        other => return Err(PyValueError::new_err(format!("unknown tier '{other}'"))),
    };
    let report = py.detach(|| verify::run(tier, &ClosedForm)).map_err(err)?;
    Ok(report
        .checks
        .into_iter()
        .map(|c| (c.name.to_string(), c.measured, c.tolerance, c.passed))
        .collect())
}

#[pymodule]
fn ab_rsa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_SEED", core::rng::DEFAULT_SEED)?;
    m.add_class::<ModelParams>()?;
    m.add_class::<DensityTriple>()?;
    m.add_class::<DensityEstimate>()?;
    m.add_class::<WindowDensity>()?;
    m.add_function(wrap_pyfunction!(closed_form_rho_a, m)?)?;
    m.add_function(wrap_pyfunction!(density_triple, m)?)?;
    m.add_function(wrap_pyfunction!(integral_rho_a, m)?)?;
    m.add_function(wrap_pyfunction!(rho_a_rate, m)?)?;
    m.add_function(wrap_pyfunction!(series_rho_a_small_t, m)?)?;
    m.add_function(wrap_pyfunction!(series_rho_a_t1_small_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(contour_solve_t, m)?)?;
    m.add_function(wrap_pyfunction!(prob_main_event, m)?)?;
    m.add_function(wrap_pyfunction!(combined_term, m)?)?;
    m.add_function(wrap_pyfunction!(rho_a_event_sum, m)?)?;
    m.add_function(wrap_pyfunction!(hyperbolic_resummation_check, m)?)?;
    m.add_function(wrap_pyfunction!(event_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_density, m)?)?;
    m.add_function(wrap_pyfunction!(run_once, m)?)?;
    m.add_function(wrap_pyfunction!(exact_occupation, m)?)?;
    m.add_function(wrap_pyfunction!(exact_occupation_all, m)?)?;
    m.add_function(wrap_pyfunction!(window_density, m)?)?;
    m.add_function(wrap_pyfunction!(run_verification, m)?)?;
    Ok(())
}
