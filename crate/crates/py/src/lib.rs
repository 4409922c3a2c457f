// SPDX-License-Identifier: Apache-2.0

//! Python bindings. Matrices cross the boundary as nested lists of `complex`;
//! reports come back as `dict`s decoded from the crate's JSON schemas.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qhe_core::crypto::{self, build_encryptor};
use qhe_core::evaluate::{self, circuit_to_unitary, reck_decompose, SpatialUnitary, View};
use qhe_core::fock::{self, plaintext_to_fock, DEFAULT_MAX_DIM};
use qhe_core::io::{from_json, to_json, RunReport, StateFile};
use qhe_core::linalg::CMatrix;
use qhe_core::pipeline::{run_pipeline, DEFAULT_FIDELITY_TOL};
use qhe_core::secinfo::{self, Caps, Prior, Tolerances};
use qhe_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Verification(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_rows(a: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..a.nrows()).map(|r| (0..a.ncols()).map(|c| a[(r, c)]).collect()).collect()
}

fn from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(CMatrix::from_fn(n, cols, |r, c| rows[r][c]))
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Secret key `κ`.
#[pyclass(module = "pyqhe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Key(crypto::Key);

#[pymethods]
impl Key {
    #[new]
    fn new(m: usize, d: usize, kappa: Vec<usize>) -> PyResult<Self> {
        crypto::Key::new(m, d, kappa).map(Key).map_err(py_err)
    }

    /// Draw a key from ChaCha20 seeded with `seed`.
    #[staticmethod]
    fn generate(m: usize, d: usize, seed: u64) -> PyResult<Self> {
        crypto::keygen(m, d, seed).map(Key).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_json(text).map(Key).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.0).map_err(py_err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn kappa(&self) -> Vec<usize> {
        self.0.kappa().to_vec()
    }

    /// Single-particle encryptor `E` as a `d × d` matrix.
    fn encryptor(&self) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(to_rows(build_encryptor(&self.0).map_err(py_err)?.matrix()))
    }

    fn combine(&self, other: &Key) -> PyResult<Key> {
        self.0.combine(&other.0).map(Key).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Key(m={}, d={}, kappa={:?})", self.0.m(), self.0.d(), self.0.kappa())
    }

    fn __eq__(&self, other: &Key) -> bool {
        self.0 == other.0
    }
}

/// Gate list over `m` spatial modes, first gate applied first.
#[pyclass(module = "pyqhe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Circuit(evaluate::Circuit);

#[pymethods]
impl Circuit {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_json(text).map(Circuit).map_err(py_err)
    }

    #[staticmethod]
    fn random(m: usize, depth: usize, seed: u64) -> Self {
        Circuit(evaluate::Circuit::random(m, depth, &mut ChaCha20Rng::seed_from_u64(seed)))
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.0).map_err(py_err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    fn __len__(&self) -> usize {
        self.0.gates().len()
    }

    fn beam_splitter_count(&self) -> usize {
        self.0.beam_splitter_count()
    }

    /// The `m × m` unitary the circuit implements.
    fn unitary(&self) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(to_rows(circuit_to_unitary(&self.0).map_err(py_err)?.matrix()))
    }

    fn inverse(&self) -> Circuit {
        Circuit(self.0.inverse())
    }

    fn __repr__(&self) -> String {
        format!("Circuit(m={}, gates={})", self.0.m(), self.0.gates().len())
    }
}

/// Encrypt → evaluate → decrypt next to plain evaluation; returns the run
/// report as a dict with `fidelity` and `passed`.
#[pyfunction]
#[pyo3(signature = (plaintext, circuit, key, tolerance = DEFAULT_FIDELITY_TOL))]
fn run<'py>(
    py: Python<'py>,
    plaintext: Vec<usize>,
    circuit: &Circuit,
    key: &Key,
    tolerance: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let alpha = plaintext.clone();
    let out = py
        .detach(|| run_pipeline(&alpha, &circuit.0, &key.0, DEFAULT_MAX_DIM))
        .map_err(py_err)?;
    let report = RunReport {
        m: key.0.m(),
        d: key.0.d(),
        plaintext,
        key: key.0.clone(),
        homomorphic: StateFile::from_state(&out.homomorphic).map_err(py_err)?,
        plain: StateFile::from_state(&out.plain).map_err(py_err)?,
        fidelity: out.fidelity,
        tolerance,
        passed: out.fidelity >= 1.0 - tolerance,
    };
    json_to_py(py, &to_json(&report).map_err(py_err)?)
}

/// Holevo analysis; `prior` is `None` (uniform) or a `{"a,b,..": p}` dict
/// passed as JSON text.
#[pyfunction]
#[pyo3(signature = (m, d, prior = None, max_site_dim = None))]
fn analyze<'py>(
    py: Python<'py>,
    m: usize,
    d: usize,
    prior: Option<&str>,
    max_site_dim: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let prior: Prior = match prior {
        Some(text) => from_json(text).map_err(py_err)?,
        None => Prior::Uniform,
    };
    let mut caps = Caps::default();
    if let Some(cap) = max_site_dim {
        caps.max_site_dim = cap;
    }
    let report = py
        .detach(|| secinfo::holevo(&prior, m, d, &caps, &Tolerances::default()))
        .map_err(py_err)?;
    json_to_py(py, &to_json(&report).map_err(py_err)?)
}

/// Reck decomposition of a unitary given as nested lists.
#[pyfunction]
fn reck(matrix: Vec<Vec<Complex64>>) -> PyResult<Circuit> {
    let u = SpatialUnitary::new(from_rows(matrix)?).map_err(py_err)?;
    reck_decompose(&u).map(Circuit).map_err(py_err)
}

#[pyfunction]
fn permanent(matrix: Vec<Vec<Complex64>>) -> PyResult<Complex64> {
    fock::permanent(&from_rows(matrix)?).map_err(py_err)
}

/// Sample measurement outcomes of a plaintext, optionally encrypted with
/// `key` and evaluated through `circuit`. Returns `{outcome tuple: count}`.
#[pyfunction]
#[pyo3(signature = (plaintext, d, shots, seed = 0, circuit = None, key = None, view = "joint"))]
#[allow(clippy::too_many_arguments)]
fn sample<'py>(
    py: Python<'py>,
    plaintext: Vec<usize>,
    d: usize,
    shots: u64,
    seed: u64,
    circuit: Option<&Circuit>,
    key: Option<&Key>,
    view: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let view = match view {
        "joint" => View::Joint,
        "spatial" | "spatial-marginal" => View::SpatialMarginal,
        other => return Err(PyValueError::new_err(format!("unknown view {other:?}"))),
    };
    let basis = evaluate::scheme_basis(plaintext.len(), d, DEFAULT_MAX_DIM).map_err(py_err)?;
    let mut state = plaintext_to_fock(&plaintext, &basis).map_err(py_err)?;
    if let Some(k) = key {
        state = crypto::encrypt(&state, &k.0).map_err(py_err)?;
    }
    if let Some(c) = circuit {
        let u = circuit_to_unitary(&c.0).map_err(py_err)?;
        state = evaluate::evaluate_fock(&state, &u, d).map_err(py_err)?;
    }
    let counts = evaluate::sample_output(&state, shots, seed, view).map_err(py_err)?;
    let out = PyDict::new(py);
    for (outcome, n) in counts {
        out.set_item(PyTuple::new(py, outcome)?, n)?;
    }
    Ok(out)
}

#[pymodule]
pub fn pyqhe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Key>()?;
    m.add_class::<Circuit>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(reck, m)?)?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    Ok(())
}
