//! Python bindings: `import thinlie`.
//!
//! Structured results (validation reports, structure constants, detection
//! reports) cross the boundary as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use rand::SeedableRng;
use serde_json::Value;

use ::thinlie as core;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidField(_)
        | core::Error::InvalidQ { .. }
        | core::Error::InvalidPattern(_)
        | core::Error::InvalidSequence(_)
        | core::Error::PatternTooShort { .. }
        | core::Error::Json(_) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Arithmetic in the prime field F_p.
#[pyclass(frozen, name = "PrimeField")]
struct PyField(core::PrimeField);

#[pymethods]
impl PyField {
    #[new]
    fn new(p: u32) -> PyResult<Self> {
        core::PrimeField::new(p).map(PyField).map_err(err)
    }
    #[getter]
    fn p(&self) -> u32 {
        self.0.p()
    }
    fn add(&self, a: i64, b: i64) -> u32 {
        self.0.add(self.0.reduce(a), self.0.reduce(b))
    }
    fn mul(&self, a: i64, b: i64) -> u32 {
        self.0.mul(self.0.reduce(a), self.0.reduce(b))
    }
    fn inv(&self, a: i64) -> PyResult<u32> {
        self.0.inv(self.0.reduce(a)).map_err(err)
    }
    fn __repr__(&self) -> String {
        format!("PrimeField({})", self.0.p())
    }
}

/// Centralizer sequence of an algebra of maximal class, written as a string of X and Y.
#[pyclass(frozen, from_py_object, name = "CentralizerSequence")]
#[derive(Clone)]
struct PySequence(core::CentralizerSequence);

#[pymethods]
impl PySequence {
    #[new]
    fn new(p: u32, text: &str) -> PyResult<Self> {
        core::CentralizerSequence::parse(p, text).map(PySequence).map_err(err)
    }
    /// A random sequence of length `len` that defines a Lie algebra.
    #[staticmethod]
    #[pyo3(signature = (p, len, seed=0))]
    fn random(p: u32, len: usize, seed: u64) -> PyResult<Self> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        core::maxclass::random_sequence(p, len, &mut rng)
            .map(PySequence)
            .map_err(err)
    }
    #[getter]
    fn p(&self) -> u32 {
        self.0.p()
    }
    fn cx_positions(&self) -> Vec<usize> {
        self.0.cx_positions()
    }
    /// The algebra of maximal class up to degree `n`.
    fn build(&self, n: usize) -> PyResult<PyAlgebra> {
        core::build_maxclass(&self.0, n).map(PyAlgebra).map_err(err)
    }
    fn __len__(&self) -> usize {
        self.0.len()
    }
    fn __str__(&self) -> String {
        self.0.to_string()
    }
    fn __repr__(&self) -> String {
        format!("CentralizerSequence({}, {:?})", self.0.p(), self.0.to_string())
    }
    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// Diamond pattern: a list of `(degree, type)` pairs with type labels such as
/// `"finite:-1"`, `"infinite"`, `"fake1"`, `"fake0"`.
#[pyclass(frozen, from_py_object, name = "DiamondPattern")]
#[derive(Clone)]
struct PyPattern(core::DiamondPattern);

#[pymethods]
impl PyPattern {
    #[new]
    fn new(p: u32, q: u64, entries: Vec<(usize, String)>) -> PyResult<Self> {
        let entries = entries
            .into_iter()
            .map(|(d, t)| {
                t.parse::<core::DiamondType>()
                    .map(|ty| core::PatternEntry::new(d, ty))
                    .map_err(err)
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyPattern(core::DiamondPattern::new(p, q, entries)))
    }
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyPattern).map_err(json_err)
    }
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }
    #[getter]
    fn p(&self) -> u32 {
        self.0.p
    }
    #[getter]
    fn q(&self) -> u64 {
        self.0.q
    }
    #[getter]
    fn entries(&self) -> Vec<(usize, String)> {
        self.0.entries.iter().map(|e| (e.degree, e.ty.to_string())).collect()
    }
    fn type_at(&self, degree: usize) -> Option<String> {
        self.0.type_at(degree).map(|t| t.to_string())
    }
    /// Canonical form: each ambiguous fake read as type 1 unless it must be type 0.
    fn normalize(&self) -> PyResult<Self> {
        core::normalize(&self.0).map(|n| PyPattern(n.pattern)).map_err(err)
    }
    fn truncated(&self, n: usize) -> Self {
        PyPattern(self.0.truncated(n))
    }
    /// Builds the algebra up to degree `n`, without validating it.
    fn compile(&self, n: usize) -> PyResult<PyAlgebra> {
        core::compile_unchecked(&self.0, n).map(PyAlgebra).map_err(err)
    }
    fn __len__(&self) -> usize {
        self.0.entries.len()
    }
    fn __str__(&self) -> String {
        self.0.to_string()
    }
    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// A thin graded Lie algebra over F_p, truncated at its nominal degree.
#[pyclass(frozen, name = "Algebra")]
struct PyAlgebra(core::GradedAlgebra);

#[pymethods]
impl PyAlgebra {
    #[getter]
    fn p(&self) -> u32 {
        self.0.field().p()
    }
    #[getter]
    fn q(&self) -> Option<u64> {
        self.0.q()
    }
    #[getter]
    fn nominal_degree(&self) -> usize {
        self.0.nominal_degree()
    }
    fn dim(&self, degree: usize) -> usize {
        self.0.dim(degree)
    }
    fn dims(&self) -> Vec<usize> {
        self.0.dims()
    }
    /// Coordinates of `[e_a, e_b]` for global basis indices `a`, `b`.
    fn bracket(&self, a: usize, b: usize) -> PyResult<Vec<u32>> {
        self.0.bracket_basis(a, b).map(<[u32]>::to_vec).map_err(err)
    }
    /// Evaluates a left-normed word such as `"yxxy"`; returns `(degree, coordinates)`.
    fn eval_word(&self, word: &str) -> PyResult<(usize, Vec<u32>)> {
        let e = self.0.eval_word(word).map_err(err)?;
        Ok((e.degree, e.coords.0))
    }
    /// Runs every structural check and returns the report as a dict.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = serde_json::to_value(self.0.validate()).map_err(json_err)?;
        to_py(py, &report)
    }
    fn is_valid(&self) -> bool {
        self.0.validate().passed()
    }
    fn detect(&self) -> PyResult<PyPattern> {
        core::detect(&self.0).map(|d| PyPattern(d.pattern)).map_err(err)
    }
    fn regularity<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = core::classify_regularity(&self.0).map_err(err)?;
        to_py(py, &serde_json::to_value(r).map_err(json_err)?)
    }
    /// Lemma-suite report as a dict with the number of checked instances and the failures.
    fn verify_lemmas<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = core::verify_lemma_suite(&self.0).map_err(err)?;
        let failures: Vec<_> = r.failures().cloned().collect();
        let v = serde_json::json!({"checked": r.instances.len(), "failures": failures, "pass": r.passed()});
        to_py(py, &v)
    }
    /// The algebra of maximal class behind this one, and the tensor construction
    /// rebuilt from it, compared up to degree `n`.
    fn roundtrip<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = core::roundtrip_check(&self.0, n).map_err(err)?;
        to_py(py, &serde_json::to_value(r).map_err(json_err)?)
    }
    fn deflate(&self, n: usize) -> PyResult<PyAlgebra> {
        core::deflate(&self.0, n).map(PyAlgebra).map_err(err)
    }
    fn extract_centralizer_sequence(&self) -> PyResult<PySequence> {
        core::extract_centralizer_sequence(&self.0).map(PySequence).map_err(err)
    }
    /// Structure constants as a dict.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.to_json())
    }
    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }
    fn __repr__(&self) -> String {
        format!("Algebra(p={}, N={})", self.0.field().p(), self.0.nominal_degree())
    }
}

/// The diamond pattern of a named family: `a`, `b` (needs `mu`), `c` (needs `s`),
/// `d` (needs `s`, `mu`), `e`, `L1q`, `L0q`, `uniqueness` (needs `s`) or `tq2`
/// (needs `sequence`). The pattern reaches far enough to compile to degree `n`.
#[pyfunction]
#[pyo3(signature = (name, n, p=7, q=7, s=None, mu=None, sequence=None))]
fn family_pattern(
    name: &str,
    n: usize,
    p: u32,
    q: u64,
    s: Option<u32>,
    mu: Option<i64>,
    sequence: Option<PySequence>,
) -> PyResult<PyPattern> {
    let need = |v: Option<u32>, what: &str| v.ok_or_else(|| PyValueError::new_err(format!("family {name} needs {what}")));
    let need_mu = || mu.ok_or_else(|| PyValueError::new_err(format!("family {name} needs mu")));
    let family = match name {
        "a" => core::Family::A,
        "b" => core::Family::B { third: need_mu()? },
        "c" => core::Family::C { s: need(s, "s")? },
        "d" => core::Family::D {
            s: need(s, "s")?,
            second: need_mu()?,
        },
        "e" => core::Family::E,
        "L1q" => core::Family::L1q,
        "L0q" => core::Family::L0q,
        "uniqueness" => core::Family::Uniqueness { s: need(s, "s")? },
        "tq2" => core::Family::Tq2 {
            sequence: sequence
                .ok_or_else(|| PyValueError::new_err("family tq2 needs sequence"))?
                .0,
        },
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    };
    core::family_pattern_for(&family, p, q, n).map(PyPattern).map_err(err)
}

/// Compiles a named family to degree `n`; raises if the result fails validation.
#[pyfunction]
#[pyo3(signature = (name, n, p=7, q=7, s=None, mu=None, sequence=None))]
fn compile_family(
    name: &str,
    n: usize,
    p: u32,
    q: u64,
    s: Option<u32>,
    mu: Option<i64>,
    sequence: Option<PySequence>,
) -> PyResult<PyAlgebra> {
    let pattern = family_pattern(name, n, p, q, s, mu, sequence)?;
    core::compile(&pattern.0, n).map(|(a, _)| PyAlgebra(a)).map_err(err)
}

/// The algebra `N(q, r)` up to degree `n`, obtained by deflation.
#[pyfunction]
fn nottingham_nqr(p: u32, q: u64, r: u64, n: usize) -> PyResult<PyAlgebra> {
    core::nottingham_nqr(p, q, r, n).map(PyAlgebra).map_err(err)
}

/// `binom(n, k) mod p` by Lucas' theorem.
#[pyfunction]
fn lucas_binom(n: u64, k: u64, p: u32) -> u32 {
    core::lucas_binom(n, k, p)
}

#[pymodule(name = "thinlie")]
fn thinlie_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA_VERSION", core::SCHEMA_VERSION)?;
    m.add_class::<PyField>()?;
    m.add_class::<PySequence>()?;
    m.add_class::<PyPattern>()?;
    m.add_class::<PyAlgebra>()?;
    m.add_function(wrap_pyfunction!(family_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(compile_family, m)?)?;
    m.add_function(wrap_pyfunction!(nottingham_nqr, m)?)?;
    m.add_function(wrap_pyfunction!(lucas_binom, m)?)?;
    Ok(())
}
