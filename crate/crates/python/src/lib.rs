//! Python bindings. Exact quantities come back as `"p/q"` strings, floats as
//! floats, and the criterion suite as a JSON string.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use solitonlab::catalog::{default_mode, soliton_by_name};
use solitonlab::flow::{log_grid, ricci_flow_integrate};
use solitonlab::krylov::GmresOptions;
use solitonlab::ode::Dopri5Options;
use solitonlab::resolvent::{self, CutoffData, Discretization, Grid};
use solitonlab::sampling::{sample_points, DEFAULT_SEED};
use solitonlab::scalar::parse_rational;
use solitonlab::stability::{optimal_omega, FormMode, StabilityContext};
use solitonlab::suite::{self, SuiteConfig};
use solitonlab::{Complex64, Mat, Rational, Scalar, SolitonStructure};

fn err(e: solitonlab::Error) -> PyErr {
    match e {
        solitonlab::Error::UnknownGeometry(name) => PyKeyError::new_err(format!("unknown geometry {name}")),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn lookup(name: &str, gamma: Option<&str>) -> PyResult<SolitonStructure> {
    let gamma = gamma.map(parse_rational).transpose().map_err(err)?;
    Ok(soliton_by_name(name, gamma, None).map_err(err)?.soliton)
}

fn rational_rows(m: &Mat<Rational>) -> Vec<Vec<String>> {
    m.row_vecs().into_iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect()
}

/// Ricci tensor and scalar curvature in the soliton frame, exactly.
#[pyfunction]
#[pyo3(signature = (name, gamma=None))]
fn curvature<'py>(py: Python<'py>, name: &str, gamma: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let s = lookup(name, gamma)?;
    let c = s.curvature().map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("ricci", rational_rows(&c.ricci))?;
    d.set_item("scalar", c.scalar.to_string())?;
    Ok(d)
}

/// Largest `|2Rc + αg + L_X g|` entry over random points in a box.
#[pyfunction]
#[pyo3(signature = (name, gamma=None, samples=100, radius=3.0, seed=DEFAULT_SEED))]
fn verify_soliton<'py>(
    py: Python<'py>,
    name: &str,
    gamma: Option<&str>,
    samples: usize,
    radius: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    if samples == 0 {
        return Err(PyValueError::new_err("samples must be positive"));
    }
    let s = lookup(name, gamma)?;
    let residual = s.residual_tensor().map_err(err)?;
    let pts = sample_points(s.dim(), samples - 1, radius, seed);
    let max = pts
        .iter()
        .flat_map(|p| residual.data().iter().map(move |f| f.eval(p).abs()))
        .fold(0.0, f64::max);
    let (_, nongradient) = s.nongradient_check().map_err(err)?;
    let div = s.covariant_gradient().map_err(err)?.divergence;
    let d = PyDict::new(py);
    d.set_item("residual_max", max)?;
    d.set_item("exact", s.is_exact_soliton().map_err(err)?)?;
    d.set_item("nongradient", nongradient)?;
    d.set_item("divergence", div.to_string())?;
    Ok(d)
}

/// Integrated quadratic form `(M, G)` and the optimal decay constant.
#[pyfunction]
#[pyo3(signature = (name, mode=None, gamma=None))]
fn stability<'py>(py: Python<'py>, name: &str, mode: Option<&str>, gamma: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let s = lookup(name, gamma)?;
    let mode: FormMode = match mode {
        Some(m) => m.parse().map_err(err)?,
        None => default_mode(&s.name),
    };
    let q = StabilityContext::new(&s).and_then(|c| c.integrated_form(mode)).map_err(err)?;
    let w = optimal_omega(&q).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("M", rational_rows(&q.m))?;
    d.set_item("G", rational_rows(&q.g))?;
    d.set_item("omega_optimal", w.omega)?;
    d.set_item("witness", w.witness)?;
    d.set_item("omega_claimed", solitonlab::catalog::omega_claimed(&s.name))?;
    Ok(d)
}

/// Homogeneous Ricci flow from `t0·α·g` sampled on a logarithmic grid.
/// Returns `(times, metrics)`.
#[pyfunction]
#[pyo3(signature = (name, t0=1.0, t1=1e6, rtol=1e-10, per_decade=10))]
fn ricci_flow(
    py: Python<'_>,
    name: &str,
    t0: f64,
    t1: f64,
    rtol: f64,
    per_decade: usize,
) -> PyResult<(Vec<f64>, Vec<Vec<Vec<f64>>>)> {
    if !(t0 > 0.0 && t1 > t0) {
        return Err(PyValueError::new_err("need 0 < t0 < t1"));
    }
    let s = lookup(name, None)?;
    let sc = s.geom.structure_constants.map(|c| c.to_f64());
    let g0 = s.geom.metric_f64().scaled(&(s.alpha.to_f64() * t0));
    let opts = Dopri5Options { rtol, ..Default::default() };
    py.detach(move || {
        let traj = ricci_flow_integrate(&sc, &g0, t0, t1, &opts)?;
        let times = log_grid(t0, t1, per_decade.max(1));
        let metrics = times.iter().map(|&t| traj.metric_at(t).map(|g| g.row_vecs())).collect::<solitonlab::Result<_>>()?;
        Ok((times, metrics))
    })
    .map_err(err)
}

/// Solves `(λ − L)u = f` for the default bump `f` and reports the energy
/// bounds. `omega` defaults to the geometry's decay constant.
#[pyfunction]
#[pyo3(signature = (name, lambda_re=1.0, lambda_im=0.0, grid=16, box_radius=6.0, omega=None, cutoff=None))]
#[allow(clippy::too_many_arguments)]
fn resolvent_bound<'py>(
    py: Python<'py>,
    name: &str,
    lambda_re: f64,
    lambda_im: f64,
    grid: usize,
    box_radius: f64,
    omega: Option<f64>,
    cutoff: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = lookup(name, None)?;
    let report = py
        .detach(|| {
            let g = Grid::new(s.dim(), grid, box_radius)?;
            let omega = match omega {
                Some(w) => w,
                None => resolvent::default_omega(&s)?,
            };
            let cut = cutoff.map(|k| CutoffData::for_soliton(&s, k, omega)).transpose()?;
            let disc = Discretization::new(&s, &g, cut)?;
            let f = resolvent::default_bump(&s, &g);
            resolvent::assemble_and_solve(&disc, Complex64::new(lambda_re, lambda_im), omega, &f, &GmresOptions::default())
        })
        .map_err(err)?
        .report;
    let d = PyDict::new(py);
    d.set_item("omega", report.omega)?;
    d.set_item("norm_f0", report.norm_f0)?;
    d.set_item("norm_u0", report.norm_u0)?;
    d.set_item("norm_u1", report.norm_u1)?;
    d.set_item("slack", report.slack)?;
    d.set_item("slack_u0", report.slack_u0)?;
    d.set_item("residual", report.residual)?;
    d.set_item("iterations", report.iterations)?;
    Ok(d)
}

/// Runs the numbered criteria (all when `criteria` is empty) and returns the
/// report as JSON.
#[pyfunction]
#[pyo3(signature = (criteria=Vec::new(), seed=DEFAULT_SEED, resolvent_grid=32, convergence_grid=24, semigroup_grid=24))]
fn run_criteria(
    py: Python<'_>,
    criteria: Vec<u32>,
    seed: u64,
    resolvent_grid: usize,
    convergence_grid: usize,
    semigroup_grid: usize,
) -> PyResult<String> {
    let cfg = SuiteConfig { seed, resolvent_grid, convergence_grid, semigroup_grid, ..Default::default() };
    let report = py.detach(|| if criteria.is_empty() { suite::run_all(&cfg) } else { suite::run_selected(&cfg, &criteria) });
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn solitonlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(curvature, m)?)?;
    m.add_function(wrap_pyfunction!(verify_soliton, m)?)?;
    m.add_function(wrap_pyfunction!(stability, m)?)?;
    m.add_function(wrap_pyfunction!(ricci_flow, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_criteria, m)?)?;
    Ok(())
}
