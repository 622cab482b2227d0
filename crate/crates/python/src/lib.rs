//! Python bindings for `xis3`. Structured reports cross the boundary as
//! plain dicts; rationals travel as strings such as `"-3/4"`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde_json::Value;

use ::xis3::operators::{self, Mode};
use ::xis3::poly::{sphere_moment, Block, MultiPoly, DEFAULT_DEGREE_CAP};
use ::xis3::product::{self, BiPoly};
use ::xis3::quaternion::{self, Quat};
use ::xis3::scalar::Rational;
use ::xis3::verify::{self as checks, ModeSelection, VerifyOptions};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = if let Ok(s) = obj.extract::<String>() {
        s
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(value_error)
}

fn parse_rational(text: &str) -> PyResult<Rational> {
    text.trim().parse::<Rational>().map_err(|_| value_error(format!("bad rational '{text}'")))
}

fn block(name: &str) -> PyResult<Block> {
    Block::by_name(name).map_err(value_error)
}

/// A unit (or arbitrary) quaternion with float components.
#[pyclass(name = "Quaternion", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyQuaternion(Quat);

#[pymethods]
impl PyQuaternion {
    #[new]
    fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self(Quat::new(w, x, y, z))
    }

    #[staticmethod]
    fn identity() -> Self {
        Self(Quat::identity())
    }

    #[getter]
    fn w(&self) -> f64 {
        self.0.w
    }

    #[getter]
    fn x(&self) -> f64 {
        self.0.x
    }

    #[getter]
    fn y(&self) -> f64 {
        self.0.y
    }

    #[getter]
    fn z(&self) -> f64 {
        self.0.z
    }

    fn __mul__(&self, rhs: PyRef<'_, Self>) -> Self {
        Self(self.0.mul(&rhs.0))
    }

    fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    fn dot(&self, rhs: PyRef<'_, Self>) -> f64 {
        self.0.dot(&rhs.0)
    }

    fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    fn normalized(&self) -> Self {
        Self(self.0.normalized())
    }

    fn to_list(&self) -> [f64; 4] {
        self.0.to_array()
    }

    fn __repr__(&self) -> String {
        format!("Quaternion({}, {}, {}, {})", self.0.w, self.0.x, self.0.y, self.0.z)
    }
}

/// Exact rational polynomial. Variables 0..4 are the x block, 4..8 the y block.
#[pyclass(name = "Poly", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPoly(MultiPoly);

#[pymethods]
impl PyPoly {
    #[staticmethod]
    fn var(nvars: usize, index: usize) -> PyResult<Self> {
        if index >= nvars {
            return Err(value_error(format!("variable {index} out of range for {nvars} variables")));
        }
        Ok(Self(MultiPoly::var(nvars, index)))
    }

    #[staticmethod]
    fn constant(nvars: usize, value: &str) -> PyResult<Self> {
        Ok(Self(MultiPoly::constant(nvars, parse_rational(value)?)))
    }

    /// Accepts a dict or a JSON string `{"nvars": n, "terms": [{"exp": [...], "coef": [num, den]}]}`.
    #[staticmethod]
    fn from_json(doc: &Bound<'_, PyAny>) -> PyResult<Self> {
        serde_json::from_value(from_py(doc)?).map(Self).map_err(value_error)
    }

    fn to_json<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &serde_json::to_value(&self.0).map_err(value_error)?)
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.0.nvars()
    }

    fn total_degree(&self) -> u32 {
        self.0.total_degree()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn coeff(&self, exps: Vec<u8>) -> String {
        self.0.coeff(&exps).to_string()
    }

    fn eval(&self, point: Vec<f64>) -> PyResult<f64> {
        if point.len() != self.0.nvars() {
            return Err(value_error(format!("expected {} coordinates, got {}", self.0.nvars(), point.len())));
        }
        Ok(self.0.eval(&point))
    }

    fn __add__(&self, rhs: PyRef<'_, Self>) -> PyResult<Self> {
        self.check_vars(&rhs)?;
        let mut out = self.0.clone();
        out.add_scaled(&rhs.0, &Rational::from_integer(1.into()));
        Ok(Self(out))
    }

    fn __sub__(&self, rhs: PyRef<'_, Self>) -> PyResult<Self> {
        self.check_vars(&rhs)?;
        let mut out = self.0.clone();
        out.add_scaled(&rhs.0, &Rational::from_integer((-1).into()));
        Ok(Self(out))
    }

    fn __mul__(&self, rhs: PyRef<'_, Self>) -> PyResult<Self> {
        self.check_vars(&rhs)?;
        self.0.mul_capped(&rhs.0, DEFAULT_DEGREE_CAP).map(Self).map_err(value_error)
    }

    fn __eq__(&self, rhs: PyRef<'_, Self>) -> bool {
        self.0 == rhs.0
    }

    fn scale(&self, c: &str) -> PyResult<Self> {
        Ok(Self(self.0.scale(&parse_rational(c)?)))
    }

    fn pow(&self, n: u32) -> Self {
        Self(self.0.pow(n))
    }

    #[pyo3(signature = (block_name = "x"))]
    fn euclidean_laplacian(&self, block_name: &str) -> PyResult<Self> {
        self.0.euclidean_laplacian(block(block_name)?).map(Self).map_err(value_error)
    }

    /// Normalized integral over the unit sphere of one block.
    #[pyo3(signature = (block_name = "x"))]
    fn sphere_integral(&self, block_name: &str) -> PyResult<Self> {
        self.0.sphere_integral(block(block_name)?).map(Self).map_err(value_error)
    }

    /// Rewrites modulo `|x|² = 1` (and `|y|² = 1` for 8 variables).
    fn reduce(&self) -> PyResult<Self> {
        if self.0.nvars() == 8 {
            return self.bipoly().and_then(|b| b.reduce().map(|r| Self(r.into_poly())).map_err(value_error));
        }
        ::xis3::harmonics::reduce_to_sphere(&self.0, Block::X).map(Self).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("Poly({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

impl PyPoly {
    fn check_vars(&self, rhs: &Self) -> PyResult<()> {
        if self.0.nvars() != rhs.0.nvars() {
            return Err(value_error(format!("{} vs {} variables", self.0.nvars(), rhs.0.nvars())));
        }
        Ok(())
    }

    fn bipoly(&self) -> PyResult<BiPoly> {
        BiPoly::new(self.0.clone()).map_err(value_error)
    }
}

/// Truncated spectral coefficients with exact rational blocks.
#[pyclass(name = "SpectralCoeffs", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpectral(product::SpectralCoeffs<Rational>);

#[pymethods]
impl PySpectral {
    #[staticmethod]
    fn zeros(n: usize) -> Self {
        Self(product::SpectralCoeffs::zeros(n))
    }

    /// Seeded random data; `support` is `all`, `diagonal` or `off_diagonal`.
    #[staticmethod]
    #[pyo3(signature = (n, seed, support = "all"))]
    fn random(n: usize, seed: u64, support: &str) -> PyResult<Self> {
        let support = match support {
            "all" => product::Support::All,
            "diagonal" => product::Support::Diagonal,
            "off_diagonal" => product::Support::OffDiagonal,
            other => return Err(value_error(format!("unknown support '{other}'"))),
        };
        Ok(Self(product::random_spectral(n, support, seed)))
    }

    /// Accepts a dict or a JSON string `{"N": n, "blocks": {"k,l": [[...]]}}`.
    #[staticmethod]
    fn from_json(doc: &Bound<'_, PyAny>) -> PyResult<Self> {
        product::SpectralCoeffs::from_json(&from_py(doc)?).map(Self).map_err(value_error)
    }

    fn to_json<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.to_json())
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.0.truncation()
    }

    fn support(&self) -> Vec<(usize, usize)> {
        self.0.support()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn block(&self, k: usize, l: usize) -> PyResult<Vec<Vec<String>>> {
        let m = self.0.block(k, l).map_err(value_error)?;
        Ok((0..m.rows()).map(|i| m.row(i).iter().map(ToString::to_string).collect()).collect())
    }

    fn inner(&self, rhs: PyRef<'_, Self>) -> PyResult<String> {
        self.0.inner(&rhs.0).map(|r| r.to_string()).map_err(value_error)
    }

    fn sobolev_norm(&self, s: f64) -> f64 {
        self.0.sobolev_norm(s)
    }

    fn __add__(&self, rhs: PyRef<'_, Self>) -> PyResult<Self> {
        self.0.add(&rhs.0).map(Self).map_err(value_error)
    }

    fn __sub__(&self, rhs: PyRef<'_, Self>) -> PyResult<Self> {
        self.0.sub(&rhs.0).map(Self).map_err(value_error)
    }

    fn __eq__(&self, rhs: PyRef<'_, Self>) -> bool {
        self.0 == rhs.0
    }

    fn __repr__(&self) -> String {
        format!("SpectralCoeffs(N={}, support={:?})", self.0.truncation(), self.0.support())
    }
}

#[pyfunction]
fn haar_sample(seed: u64, n: usize) -> Vec<PyQuaternion> {
    quaternion::haar_sample(seed, n).into_iter().map(PyQuaternion).collect()
}

/// Exact normalized integral of `w^a x^b y^c z^d` over S3, as a string.
#[pyfunction]
fn sphere_moment_of(exps: [u8; 4]) -> String {
    sphere_moment(exps).to_string()
}

/// The orthogonal basis of degree-`k` harmonics, as 4-variable polynomials.
#[pyfunction]
fn harmonic_basis(k: u32) -> Vec<PyPoly> {
    ::xis3::harmonics::harmonic_basis(k).elements().iter().cloned().map(PyPoly).collect()
}

/// Squared L2 norms of the basis elements, as strings.
#[pyfunction]
fn gram_diag(k: u32) -> Vec<String> {
    ::xis3::harmonics::harmonic_basis(k).gram_diag().iter().map(ToString::to_string).collect()
}

#[pyfunction]
fn xi_symbolic(py: Python<'_>, f: PyRef<'_, PyPoly>) -> PyResult<PyPoly> {
    let f = f.bipoly()?;
    py.detach(|| operators::xi_symbolic(&f)).map(|p| PyPoly(p.into_poly())).map_err(value_error)
}

#[pyfunction]
fn xi_spectral(py: Python<'_>, c: PyRef<'_, PySpectral>) -> PyResult<PySpectral> {
    let c = c.0.clone();
    py.detach(|| operators::xi_spectral(&c)).map(PySpectral).map_err(value_error)
}

#[pyfunction]
fn analyze(f: PyRef<'_, PyPoly>, n: usize) -> PyResult<PySpectral> {
    product::analyze(&f.bipoly()?, n).map(PySpectral).map_err(value_error)
}

#[pyfunction]
fn synthesize(c: PyRef<'_, PySpectral>) -> PyPoly {
    PyPoly(product::synthesize(&c.0).into_poly())
}

#[pyfunction]
fn box_apply(c: PyRef<'_, PySpectral>) -> PySpectral {
    PySpectral(operators::box_apply(&c.0))
}

#[pyfunction]
fn solve_box(c: PyRef<'_, PySpectral>) -> PyResult<PySpectral> {
    operators::solve_box(&c.0).map(PySpectral).map_err(value_error)
}

/// Exact block matrix of `T` on `H_k ⊗ H_k` with its reflection and verdicts.
#[pyfunction]
fn extract_reflection<'py>(py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| operators::reflection(k)).map_err(value_error)?;
    to_py(py, &report.to_json())
}

#[pyfunction]
#[pyo3(signature = (n, seed = 0, mode = "exact"))]
fn exactness_report<'py>(py: Python<'py>, n: usize, seed: u64, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let report = match mode {
        "exact" => py.detach(|| operators::exactness_report(n, seed)),
        "float" => py.detach(|| operators::exactness_report_float(n, seed)),
        other => return Err(value_error(format!("unknown mode '{other}'"))),
    }
    .map_err(value_error)?;
    to_py(py, &serde_json::to_value(&report).map_err(value_error)?)
}

#[pyfunction]
#[pyo3(signature = (k, samples = 10, seed = 0))]
fn kernel_invariance<'py>(py: Python<'py>, k: usize, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| operators::kernel_invariance_check(k, samples, seed));
    to_py(py, &serde_json::to_value(&report).map_err(value_error)?)
}

#[pyfunction]
#[pyo3(signature = (n, s = 0.0, trials = 100, seed = 0, mode = "exact"))]
fn contraction_check<'py>(
    py: Python<'py>,
    n: usize,
    s: f64,
    trials: usize,
    seed: u64,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = match mode {
        "exact" => Mode::Exact,
        "float" => Mode::Float,
        other => return Err(value_error(format!("unknown mode '{other}'"))),
    };
    let report = py.detach(|| operators::contraction_and_smoothing_check(n, s, trials, seed, mode)).map_err(value_error)?;
    to_py(py, &serde_json::to_value(&report).map_err(value_error)?)
}

/// Runs the verification suite and returns the report document.
#[pyfunction]
#[pyo3(signature = (max_degree = 2, mode = "exact", seed = 0, degree_cap = None))]
fn verify<'py>(
    py: Python<'py>,
    max_degree: usize,
    mode: &str,
    seed: u64,
    degree_cap: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let mode: ModeSelection = mode.parse().map_err(value_error)?;
    let opts = VerifyOptions { max_degree, mode, seed, degree_cap };
    let doc = py.detach(|| checks::verify(&opts)).map_err(value_error)?;
    to_py(py, &doc.to_json(true))
}

#[pymodule]
#[pyo3(name = "xis3")]
fn xis3(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuaternion>()?;
    m.add_class::<PyPoly>()?;
    m.add_class::<PySpectral>()?;
    m.add_function(wrap_pyfunction!(haar_sample, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_moment_of, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_basis, m)?)?;
    m.add_function(wrap_pyfunction!(gram_diag, m)?)?;
    m.add_function(wrap_pyfunction!(xi_symbolic, m)?)?;
    m.add_function(wrap_pyfunction!(xi_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(box_apply, m)?)?;
    m.add_function(wrap_pyfunction!(solve_box, m)?)?;
    m.add_function(wrap_pyfunction!(extract_reflection, m)?)?;
    m.add_function(wrap_pyfunction!(exactness_report, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(contraction_check, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
