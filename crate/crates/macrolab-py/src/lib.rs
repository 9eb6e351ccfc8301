// SPDX-License-Identifier: Apache-2.0

//! Python bindings. Structured results are returned as JSON strings with the
//! same layout as the command-line reports.

use macrolab::adnverify::{run_pipeline_with, Transcription};
use macrolab::ellipticfem::{gen_mesh, EllipticSystem, Shape};
use macrolab::estimatelab::{estimate_run, simulate, Forcing, Preset, SimConfig};
use macrolab::kinetics;
use macrolab::MacrolabError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: MacrolabError) -> PyErr {
    match e {
        MacrolabError::Config(_) | MacrolabError::NonUnitNormal(_) | MacrolabError::Mesh(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(t: &T) -> PyResult<String> {
    serde_json::to_string(t).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Runs the complementing-condition pipeline, optionally with one sign flip
/// given as `"KEY:K"`, and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (mutation = None))]
fn verify_adn(mutation: Option<&str>) -> PyResult<String> {
    let base = Transcription::new();
    let t = match mutation {
        None => base,
        Some(m) => {
            let (key, k) = m
                .rsplit_once(':')
                .and_then(|(key, k)| k.parse::<usize>().ok().map(|k| (key, k)))
                .ok_or_else(|| PyValueError::new_err(format!("mutation `{m}` is not KEY:K")))?;
            base.flip_sign(key, k).map_err(py_err)?
        }
    };
    to_json(&run_pipeline_with(&t).map_err(py_err)?)
}

/// Runs the velocity identity suite and returns it as JSON.
#[pyfunction]
#[pyo3(signature = (grid = 16, seed = 1))]
fn check_moments(grid: usize, seed: u64) -> PyResult<String> {
    if grid < 2 {
        return Err(PyValueError::new_err("grid needs at least two points per axis"));
    }
    to_json(&kinetics::suite::run_suite(grid, seed).map_err(py_err)?)
}

/// `(χ₀, …, χ₄)` at a velocity.
#[pyfunction]
fn chi_basis(v: [f64; 3]) -> [f64; 5] {
    kinetics::chi_basis(v)
}

/// Specular reflection of `v` about the unit normal `n`.
#[pyfunction]
fn specular_reflect(v: [f64; 3], n: [f64; 3]) -> PyResult<[f64; 3]> {
    kinetics::specular_reflect(v, n).map_err(py_err)
}

/// Landau `σ(v)` as a nested 3×3 list.
#[pyfunction]
fn sigma_at(v: [f64; 3]) -> PyResult<[[f64; 3]; 3]> {
    kinetics::sigma_at(v).map_err(py_err)
}

/// Number of rigid modes, Korn constant and Poincaré ratio of a generated mesh.
#[pyfunction]
#[pyo3(signature = (shape = "ball", refine = 1))]
fn korn_constant(shape: &str, refine: usize) -> PyResult<(usize, f64, f64)> {
    let sys = EllipticSystem::new(gen_mesh(Shape::parse(shape).map_err(py_err)?, refine).map_err(py_err)?);
    let basis = sys.rigid_basis();
    let k = sys.korn_constant(&basis).map_err(py_err)?;
    let p = sys.poincare_ratio().map_err(py_err)?;
    Ok((basis.dim, k, p))
}

fn sim_config(shape: &str, refine: usize, grid: usize, seed: u64, preset: &str, forcing: &str) -> PyResult<SimConfig> {
    Ok(SimConfig {
        shape: Shape::parse(shape).map_err(py_err)?,
        refine,
        grid,
        seed,
        preset: Preset::parse(preset).map_err(py_err)?,
        forcing: Forcing::parse(forcing, 0.1, seed).map_err(py_err)?,
        ..SimConfig::default()
    })
}

/// Runs the simulator and returns the conservation trace as CSV.
#[pyfunction]
#[pyo3(signature = (shape = "ball", refine = 0, grid = 6, steps = 10, seed = 1, preset = "random_full", forcing = "zero"))]
fn simulate_trace(
    shape: &str,
    refine: usize,
    grid: usize,
    steps: usize,
    seed: u64,
    preset: &str,
    forcing: &str,
) -> PyResult<String> {
    let cfg = SimConfig { steps: Some(steps), ..sim_config(shape, refine, grid, seed, preset, forcing)? };
    Ok(simulate(&cfg).map_err(py_err)?.trace.to_csv())
}

/// Simulates to `horizon` and returns both estimate reports as JSON.
#[pyfunction]
#[pyo3(signature = (shape = "ball", refine = 0, grid = 6, horizon = 0.1, seed = 1, preset = "random_full", forcing = "zero", snapshots = 6))]
#[allow(clippy::too_many_arguments)]
fn estimate_report(
    shape: &str,
    refine: usize,
    grid: usize,
    horizon: f64,
    seed: u64,
    preset: &str,
    forcing: &str,
    snapshots: usize,
) -> PyResult<String> {
    if snapshots < 2 {
        return Err(PyValueError::new_err("at least two snapshots are needed"));
    }
    let cfg = SimConfig { horizon, ..sim_config(shape, refine, grid, seed, preset, forcing)? };
    to_json(&estimate_run(&cfg, snapshots).map_err(py_err)?)
}

#[pymodule]
#[pyo3(name = "macrolab")]
fn macrolab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA", macrolab::cli::SCHEMA)?;
    m.add_function(wrap_pyfunction!(verify_adn, m)?)?;
    m.add_function(wrap_pyfunction!(check_moments, m)?)?;
    m.add_function(wrap_pyfunction!(chi_basis, m)?)?;
    m.add_function(wrap_pyfunction!(specular_reflect, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_at, m)?)?;
    m.add_function(wrap_pyfunction!(korn_constant, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_trace, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_report, m)?)?;
    Ok(())
}
