use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ludics::behaviours::{self, parse_behaviour, CheckReport};
use ludics::datatypes::{self, Env};
use ludics::functional::{self, parse_func_type, Criterion};
use ludics::paths::Seq;
use ludics::syntax::{parse_any, render_design, Design};

fn py_err(e: ludics::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn design(text: &str) -> PyResult<Design> {
    parse_any(text).map(|(_, d)| d).map_err(py_err)
}

fn seq(s: &Seq) -> String {
    if s.is_empty() {
        "ε".into()
    } else {
        s.to_string()
    }
}

fn report<'py>(py: Python<'py>, r: &CheckReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("holds", r.holds())?;
    d.set_item("witness", r.witness.as_ref().map(seq))?;
    d.set_item("detail", &r.detail)?;
    d.set_item("level", r.level)?;
    d.set_item("max_len", r.max_len)?;
    Ok(d)
}

/// Normal form, status and step count.
#[pyfunction]
#[pyo3(signature = (text, fuel = 10_000))]
fn normalize(text: &str, fuel: usize) -> PyResult<(String, String, usize)> {
    let out = ludics::reduction::normalize(&design(text)?, fuel);
    Ok((render_design(&out.result), format!("{:?}", out.status), out.steps))
}

#[pyfunction]
fn is_orthogonal(p: &str, n: &str) -> PyResult<bool> {
    ludics::reduction::is_orthogonal(&design(p)?, &design(n)?).map_err(py_err)
}

/// The interaction path of an atomic pair, `None` when it diverges.
#[pyfunction]
fn interaction_path(p: &str, n: &str) -> PyResult<Option<String>> {
    let s = ludics::multidesign::interaction_path(&design(p)?, &design(n)?).map_err(py_err)?;
    Ok(s.as_ref().map(seq))
}

#[pyfunction]
#[pyo3(signature = (text, max_len = 16))]
fn paths(text: &str, max_len: usize) -> PyResult<Vec<String>> {
    let ps = ludics::paths::paths_of(&design(text)?, max_len).map_err(py_err)?;
    Ok(ps.iter().map(seq).collect())
}

/// `check` is one of `regular`, `pure`, `quasi-pure`.
#[pyfunction]
#[pyo3(signature = (expr, check, level = 3, max_len = 16))]
fn check_behaviour<'py>(
    py: Python<'py>,
    expr: &str,
    check: &str,
    level: usize,
    max_len: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let b = parse_behaviour(expr).map_err(py_err)?;
    let r = match check {
        "regular" => behaviours::check_regular(&b, level, max_len),
        "pure" => behaviours::check_pure(&b, level, max_len),
        "quasi-pure" => behaviours::check_quasi_pure(&b, level, max_len),
        _ => return Err(PyValueError::new_err(format!("unknown check '{check}'"))),
    }
    .map_err(py_err)?;
    report(py, &r)
}

#[pyfunction]
#[pyo3(signature = (expr, level = 3, max_len = 16))]
fn visitable_paths(expr: &str, level: usize, max_len: usize) -> PyResult<Vec<String>> {
    let b = parse_behaviour(expr).map_err(py_err)?;
    let ps = behaviours::visitable_paths(&b, level, max_len).map_err(py_err)?;
    Ok(ps.iter().map(seq).collect())
}

/// Sizes of the incarnation at each level of the fixed point iteration.
#[pyfunction]
#[pyo3(signature = (pattern, levels = 3, max_len = 12))]
fn incarnation_sizes(pattern: &str, levels: usize, max_len: usize) -> PyResult<Vec<usize>> {
    let p = match datatypes::named_pattern(pattern) {
        Some(p) => p,
        None => datatypes::parse_closed_pattern(pattern).map_err(py_err)?,
    };
    let r = datatypes::kleene_monotone_report(&p, &Env::new(), levels, max_len).map_err(py_err)?;
    Ok(r.incarnation_sizes)
}

#[pyfunction]
#[pyo3(signature = (ty, level = 3, max_len = 16))]
fn check_functional<'py>(py: Python<'py>, ty: &str, level: usize, max_len: usize) -> PyResult<Bound<'py, PyDict>> {
    let t = parse_func_type(ty).map_err(py_err)?;
    let r = functional::check_functional(&t, level, max_len).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("type", r.ty.to_string())?;
    d.set_item("regular", report(py, &r.regular)?)?;
    d.set_item("quasi_pure", report(py, &r.quasi_pure)?)?;
    d.set_item("pure", report(py, &r.pure)?)?;
    d.set_item("criterion_pure", matches!(r.criterion, Criterion::Pure))?;
    d.set_item("agrees", r.agrees)?;
    Ok(d)
}

#[pyfunction]
fn impurity_witness<'py>(py: Python<'py>, ty: &str) -> PyResult<Bound<'py, PyDict>> {
    let t = parse_func_type(ty).map_err(py_err)?;
    let w = functional::impurity_witness(&t).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("path", seq(&w.s))?;
    d.set_item("path_len", w.s.len())?;
    d.set_item("p", render_design(&w.p))?;
    d.set_item("p_actions", w.p.action_count())?;
    d.set_item("n", render_design(&w.n))?;
    Ok(d)
}

#[pyfunction]
fn encode_nat(k: usize) -> String {
    render_design(&datatypes::encode_nat(k))
}

#[pyfunction]
fn encode_bool(v: bool) -> String {
    render_design(&datatypes::encode_bool(v))
}

#[pymodule]
fn ludics_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(is_orthogonal, m)?)?;
    m.add_function(wrap_pyfunction!(interaction_path, m)?)?;
    m.add_function(wrap_pyfunction!(paths, m)?)?;
    m.add_function(wrap_pyfunction!(check_behaviour, m)?)?;
    m.add_function(wrap_pyfunction!(visitable_paths, m)?)?;
    m.add_function(wrap_pyfunction!(incarnation_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(check_functional, m)?)?;
    m.add_function(wrap_pyfunction!(impurity_witness, m)?)?;
    m.add_function(wrap_pyfunction!(encode_nat, m)?)?;
    m.add_function(wrap_pyfunction!(encode_bool, m)?)?;
    Ok(())
}
