//! Python bindings. Matrices cross the boundary as nested lists of Python
//! `complex`, Taylor functions as lists of such matrices, and reports as
//! dictionaries.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rcl_core::analytic::{self, SchurCheck};
use rcl_core::dataset::{self, Dims, Preset};
use rcl_core::{jmap, lifting, majorant, schurpair, ComplexMatrix, GammaOp};

type Rows = Vec<Vec<Complex64>>;

fn err(e: rcl_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Serializes a report through JSON into a Python dictionary.
fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Matrix-valued polynomial `sum_k T_k λ^k` with `T_k` of shape
/// `out_dim x in_dim`.
#[pyclass(name = "TaylorFn", module = "rcl", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTaylorFn {
    inner: analytic::TaylorFn,
}

impl PyTaylorFn {
    fn wrap(inner: analytic::TaylorFn) -> Self {
        PyTaylorFn { inner }
    }
}

#[pymethods]
impl PyTaylorFn {
    /// `coeffs` is a nonempty list of equally shaped matrices.
    #[new]
    #[pyo3(signature = (coeffs, out_dim=None, in_dim=None))]
    fn new(coeffs: Vec<Rows>, out_dim: Option<usize>, in_dim: Option<usize>) -> PyResult<Self> {
        let mats = coeffs.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        // empty rows cannot carry a column count, so allow explicit shapes
        let rows = out_dim.or(mats.first().map(|m| m.nrows())).unwrap_or(0);
        let cols = in_dim.or(mats.first().map(|m| m.ncols())).unwrap_or(0);
        let mats = mats
            .into_iter()
            .map(|m| if m.is_empty() { ComplexMatrix::zeros(rows, cols) } else { m })
            .collect();
        analytic::TaylorFn::new(rows, cols, mats).map(Self::wrap).map_err(err)
    }

    #[staticmethod]
    fn constant(m: Rows) -> PyResult<Self> {
        Ok(Self::wrap(analytic::TaylorFn::constant(to_matrix(&m)?)))
    }

    #[staticmethod]
    fn zeros(out_dim: usize, in_dim: usize, degree: usize) -> Self {
        Self::wrap(analytic::TaylorFn::zeros(out_dim, in_dim, degree))
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.out_dim(), self.inner.in_dim())
    }

    fn coeffs(&self) -> Vec<Rows> {
        self.inner.coeffs().iter().map(to_rows).collect()
    }

    fn coeff(&self, n: usize) -> Rows {
        to_rows(&self.inner.coeff(n))
    }

    fn __call__(&self, z: Complex64) -> PyResult<Rows> {
        self.inner.eval(z).map(|m| to_rows(&m)).map_err(err)
    }

    /// Largest coefficient difference through `degree`.
    fn distance(&self, other: PyRef<'_, PyTaylorFn>, degree: usize) -> f64 {
        self.inner.max_coeff_distance(&other.inner, degree)
    }

    fn __repr__(&self) -> String {
        format!(
            "TaylorFn(shape=({}, {}), degree={})",
            self.inner.out_dim(),
            self.inner.in_dim(),
            self.inner.degree()
        )
    }
}

/// `{A, T', R, Q}` with `T'AR = AQ`.
#[pyclass(name = "DataSet", module = "rcl", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataSet {
    inner: dataset::DataSet,
}

#[pymethods]
impl PyDataSet {
    #[new]
    fn new(a: Rows, tprime: Rows, r: Rows, q: Rows) -> PyResult<Self> {
        let inner = dataset::DataSet::new(to_matrix(&a)?, to_matrix(&tprime)?, to_matrix(&r)?, to_matrix(&q)?)
            .map_err(err)?;
        Ok(PyDataSet { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyDataSet { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// `(dim H_0, dim H, dim H')`
    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        let d = self.inner.dims();
        (d.h0, d.h, d.hp)
    }

    #[getter]
    fn a(&self) -> Rows {
        to_rows(self.inner.a())
    }

    #[getter]
    fn tprime(&self) -> Rows {
        to_rows(self.inner.tprime())
    }

    #[getter]
    fn r(&self) -> Rows {
        to_rows(self.inner.r())
    }

    #[getter]
    fn q(&self) -> Rows {
        to_rows(self.inner.q())
    }

    fn __repr__(&self) -> String {
        let (h0, h, hp) = self.dims();
        format!("DataSet(dims=({h0}, {h}, {hp}))")
    }
}

fn omega_data(ds: &PyDataSet, tol: f64) -> PyResult<dataset::OmegaData> {
    dataset::build_omega(&ds.inner, rcl_core::opcore::DEFAULT_RANK_TOL, tol).map_err(err)
}

/// Seeded random data set; `preset` is one of `generic`, `exact_equality`,
/// `treil_volberg`, `classical`.
#[pyfunction]
#[pyo3(signature = (seed, dims=(2, 3, 3), preset="generic"))]
fn random_dataset(seed: u64, dims: (usize, usize, usize), preset: &str) -> PyResult<PyDataSet> {
    let preset: Preset = preset.parse().map_err(err)?;
    dataset::random_dataset(seed, Dims::new(dims.0, dims.1, dims.2), preset)
        .map(|inner| PyDataSet { inner })
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (ds, tol=1e-9))]
fn validate<'py>(py: Python<'py>, ds: PyRef<'_, PyDataSet>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &dataset::validate(&ds.inner, tol).map_err(err)?)
}

/// Summary of the coupling contraction of a data set.
#[pyfunction]
#[pyo3(signature = (ds, tol=1e-9))]
fn omega<'py>(py: Python<'py>, ds: PyRef<'_, PyDataSet>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &omega_data(&ds, tol)?.summary())
}

/// Shape `(rows, cols)` of the free Schur parameter of a data set.
#[pyfunction]
#[pyo3(signature = (ds, tol=1e-9))]
fn parameter_shape(ds: PyRef<'_, PyDataSet>, tol: f64) -> PyResult<(usize, usize)> {
    Ok(omega_data(&ds, tol)?.coupling().parameter_shape())
}

/// Schur pair `(F, G)` and symbol `Θ` (through `degree`) of the solution with
/// Schur parameter `param`; the zero parameter when `None`.
#[pyfunction]
#[pyo3(signature = (ds, param=None, degree=32, tol=1e-9))]
fn solve(
    ds: PyRef<'_, PyDataSet>,
    param: Option<PyRef<'_, PyTaylorFn>>,
    degree: usize,
    tol: f64,
) -> PyResult<(PyTaylorFn, PyTaylorFn, PyTaylorFn)> {
    let od = omega_data(&ds, tol)?;
    let h = match param {
        Some(p) => p.inner.clone(),
        None => {
            let (rows, cols) = od.coupling().parameter_shape();
            analytic::TaylorFn::zeros(rows, cols, 0)
        }
    };
    let check = SchurCheck { tol, ..SchurCheck::default() };
    let pair = schurpair::pair_from_parameter(&od, &h, h.degree(), &check).map_err(err)?;
    let gamma = lifting::gamma_from_pair(&pair, degree);
    Ok((
        PyTaylorFn::wrap(pair.f),
        PyTaylorFn::wrap(pair.g),
        PyTaylorFn::wrap(gamma.theta().clone()),
    ))
}

/// Symbol `Θ = F(I - λG)^{-1}` through `degree`.
#[pyfunction]
fn gamma_from_pair(f: PyRef<'_, PyTaylorFn>, g: PyRef<'_, PyTaylorFn>, degree: usize) -> PyResult<PyTaylorFn> {
    let pair = schurpair::SchurPair::new(f.inner.clone(), g.inner.clone()).map_err(err)?;
    Ok(PyTaylorFn::wrap(lifting::gamma_from_pair(&pair, degree).theta().clone()))
}

#[pyfunction]
#[pyo3(signature = (ds, theta, tol=1e-9))]
fn verify_solution<'py>(
    py: Python<'py>,
    ds: PyRef<'_, PyDataSet>,
    theta: PyRef<'_, PyTaylorFn>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let g = GammaOp::new(theta.inner.clone());
    to_dict(py, &lifting::verify_solution(&ds.inner, &g, tol).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (ds, tol=1e-9))]
fn uniqueness<'py>(py: Python<'py>, ds: PyRef<'_, PyDataSet>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let od = omega_data(&ds, tol)?;
    to_dict(py, &lifting::uniqueness_check(&ds.inner, &od, tol).map_err(err)?)
}

/// Maps a constrained parameter of the solution `theta` back to its Schur
/// pair. `c1` is the free parameter; the canonical constant member is used
/// when `None`. Returns `(F, G, W)`.
#[pyfunction]
#[pyo3(signature = (ds, theta, c1=None, degree=32, tol=1e-9))]
fn j_gamma(
    ds: PyRef<'_, PyDataSet>,
    theta: PyRef<'_, PyTaylorFn>,
    c1: Option<PyRef<'_, PyTaylorFn>>,
    degree: usize,
    tol: f64,
) -> PyResult<(PyTaylorFn, PyTaylorFn, PyTaylorFn)> {
    let od = omega_data(&ds, tol)?;
    let g = GammaOp::new(theta.inner.clone());
    let bo = lifting::build_big_omega(&ds.inner, &od, &g, rcl_core::opcore::DEFAULT_RANK_TOL, tol).map_err(err)?;
    let check = SchurCheck { tol, ..SchurCheck::default() };
    let c = match c1 {
        Some(c1) => jmap::parameter_to_constrained(&bo, &c1.inner, c1.inner.degree(), &check).map_err(err)?,
        None => jmap::canonical_parameter(&bo),
    };
    let out = jmap::j_gamma(&g, &bo, &c, degree, &check).map_err(err)?;
    Ok((PyTaylorFn::wrap(out.pair.f), PyTaylorFn::wrap(out.pair.g), PyTaylorFn::wrap(out.w)))
}

/// Central harmonic majorant `V` of `Θ^*Θ` through `degree`.
#[pyfunction]
fn harmonic_majorant(theta: PyRef<'_, PyTaylorFn>, degree: usize) -> PyTaylorFn {
    PyTaylorFn::wrap(majorant::v_from_theta(&theta.inner, degree))
}

/// `(V(λ), quadrature)` for scalar `θ`.
#[pyfunction]
#[pyo3(signature = (theta, z, nodes=4096))]
fn poisson_cross_check(theta: PyRef<'_, PyTaylorFn>, z: Complex64, nodes: usize) -> PyResult<(Complex64, Complex64)> {
    majorant::poisson_cross_check(&theta.inner, z, nodes).map_err(err)
}

#[pyfunction]
fn cayley(c: PyRef<'_, PyTaylorFn>, degree: usize) -> PyResult<PyTaylorFn> {
    analytic::cayley(&c.inner, degree).map(PyTaylorFn::wrap).map_err(err)
}

#[pyfunction]
fn inverse_cayley(k: PyRef<'_, PyTaylorFn>, degree: usize) -> PyResult<PyTaylorFn> {
    analytic::inverse_cayley(&k.inner, degree).map(PyTaylorFn::wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k, sections=16))]
fn positive_real_margin(k: PyRef<'_, PyTaylorFn>, sections: usize) -> PyResult<f64> {
    analytic::positive_real_margin(&k.inner, sections).map_err(err)
}

#[pymodule]
fn rcl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", rcl_core::VERSION)?;
    m.add_class::<PyTaylorFn>()?;
    m.add_class::<PyDataSet>()?;
    m.add_function(wrap_pyfunction!(random_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(parameter_shape, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_from_pair, m)?)?;
    m.add_function(wrap_pyfunction!(verify_solution, m)?)?;
    m.add_function(wrap_pyfunction!(uniqueness, m)?)?;
    m.add_function(wrap_pyfunction!(j_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_majorant, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_cross_check, m)?)?;
    m.add_function(wrap_pyfunction!(cayley, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_cayley, m)?)?;
    m.add_function(wrap_pyfunction!(positive_real_margin, m)?)?;
    Ok(())
}
