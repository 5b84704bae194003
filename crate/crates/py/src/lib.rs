//! Python bindings: problems, the structured Hessenberg reduction, and the
//! characteristic polynomial tools built on it.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qshess::charpoly::{aberth_roots, hyman_eval, AberthOptions};
use qshess::io::{parse_hessenberg, write_hessenberg};
use qshess::reduction::{hessenberg_reduce, hessenberg_to_dense, ReduceOptions};
use qshess::DenseMatrix;

fn err(e: qshess::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &DenseMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn from_rows(rows: Vec<Vec<Complex64>>, cols: usize) -> PyResult<DenseMatrix> {
    if let Some(r) = rows.iter().find(|r| r.len() != cols) {
        return Err(PyValueError::new_err(format!("row of length {} where {cols} was expected", r.len())));
    }
    let n = rows.len();
    DenseMatrix::from_vec(n, cols, rows.into_iter().flatten().collect()).map_err(err)
}

/// `A = diag(d) + U·V*` with real `d` and `n`×`k` factors.
#[pyclass(name = "Problem", module = "qshess_py")]
struct PyProblem(qshess::io::Problem);

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (d, u, v))]
    fn new(d: Vec<f64>, u: Vec<Vec<Complex64>>, v: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let k = u.first().map_or(0, |r| r.len());
        let (u, v) = (from_rows(u, k)?, from_rows(v, k)?);
        let complex = u.data().iter().chain(v.data()).any(|z| z.im != 0.0);
        Ok(Self(qshess::io::Problem::new(d, u, v, complex).map_err(err)?))
    }

    /// Standard normal entries from a seeded generator.
    #[staticmethod]
    #[pyo3(signature = (n, k, seed = 0, complex = false))]
    fn generate(n: usize, k: usize, seed: u64, complex: bool) -> PyResult<Self> {
        Ok(Self(qshess::io::Problem::generate(n, k, seed, complex).map_err(err)?))
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self(qshess::io::Problem::parse(text).map_err(err)?))
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn d(&self) -> Vec<f64> {
        self.0.d.clone()
    }

    #[getter]
    fn u(&self) -> Vec<Vec<Complex64>> {
        to_rows(&self.0.u)
    }

    #[getter]
    fn v(&self) -> Vec<Vec<Complex64>> {
        to_rows(&self.0.v)
    }

    fn dense(&self) -> Vec<Vec<Complex64>> {
        to_rows(&self.0.dense())
    }

    fn __repr__(&self) -> String {
        format!("Problem(n={}, k={})", self.0.n(), self.0.k())
    }
}

/// Upper Hessenberg `H = Q·A·Q*` stored by its diagonal, subdiagonal and
/// the transformed factors.
#[pyclass(name = "HessenbergForm", module = "qshess_py")]
struct PyHessenbergForm(qshess::reduction::HessenbergForm);

#[pymethods]
impl PyHessenbergForm {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self(parse_hessenberg(text).map_err(err)?))
    }

    fn to_text(&self) -> String {
        write_hessenberg(&self.0)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn d(&self) -> Vec<Complex64> {
        self.0.d.clone()
    }

    #[getter]
    fn s(&self) -> Vec<Complex64> {
        self.0.s.clone()
    }

    #[getter]
    fn u_f(&self) -> Vec<Vec<Complex64>> {
        to_rows(&self.0.u_f)
    }

    #[getter]
    fn v_f(&self) -> Vec<Vec<Complex64>> {
        to_rows(&self.0.v_f)
    }

    /// Whether the rotation log was recorded.
    #[getter]
    fn has_rotations(&self) -> bool {
        self.0.rotations.is_some()
    }

    fn dense(&self) -> Vec<Vec<Complex64>> {
        to_rows(&hessenberg_to_dense(&self.0))
    }

    /// `Q` rebuilt from the rotation log.
    fn q(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let q = self.0.q_from_log().ok_or_else(|| PyValueError::new_err("reduce with log_rotations=True to get Q"))?;
        Ok(to_rows(&q))
    }

    /// `(det(x·I - H), p(x)/p'(x))` by Hyman's method.
    fn charpoly(&self, x: Complex64) -> (Complex64, Complex64) {
        let e = hyman_eval(&self.0, x);
        (e.det, e.newton)
    }

    /// Eigenvalues by Ehrlich-Aberth iteration: `(roots, newton, converged)`.
    #[pyo3(signature = (tol = 1e-12, max_iter = 100, seed = 0))]
    fn roots(&self, tol: f64, max_iter: usize, seed: u64) -> (Vec<Complex64>, Vec<f64>, bool) {
        let r = aberth_roots(&self.0, AberthOptions { max_iter, tol, seed });
        (r.roots, r.newton, r.converged)
    }

    fn __repr__(&self) -> String {
        format!("HessenbergForm(n={}, k={})", self.0.n(), self.0.k())
    }
}

/// Reduces a problem to Hessenberg form. Returns the form and a dict of
/// reduction statistics.
#[pyfunction]
#[pyo3(signature = (problem, reorth_every = None, log_rotations = false))]
fn reduce<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    reorth_every: Option<usize>,
    log_rotations: bool,
) -> PyResult<(PyHessenbergForm, Bound<'py, PyDict>)> {
    let p = &problem.0;
    let opts = ReduceOptions { reorth_every, log_rotations, ..Default::default() };
    let (form, stats) = hessenberg_reduce(&p.d, &p.u, &p.v, opts).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("operations", stats.operations)?;
    dict.set_item("steps", stats.steps)?;
    dict.set_item("fallbacks", stats.fallbacks)?;
    dict.set_item("max_embed_leak", stats.max_embed_leak)?;
    Ok((PyHessenbergForm(form), dict))
}

/// `‖Q·A·Q* − H‖_F / ‖A‖_F` for a form reduced with `log_rotations=True`.
#[pyfunction]
fn similarity_residual(problem: &PyProblem, form: &PyHessenbergForm) -> PyResult<f64> {
    let q = form.0.q_from_log().ok_or_else(|| PyValueError::new_err("the form has no rotation log"))?;
    let a = problem.0.dense();
    let h = hessenberg_to_dense(&form.0);
    Ok(q.matmul(&a).matmul(&q.adjoint()).sub(&h).frobenius() / a.frobenius())
}

#[pymodule]
fn qshess_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyHessenbergForm>()?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(similarity_residual, m)?)?;
    Ok(())
}
