//! Python bindings: multiplication, Ext charts, Massey products and the
//! isotropic comparison. Charts and reports are returned as text (CSV, JSON,
//! SVG or ASCII) so Python callers can use `json.loads` / `csv` directly.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use isoadams::chart::{self, ChartFormat};
use isoadams::homological::{compare_charts, compare_doubling, ChartOptions};
use isoadams::isotropic::IsotropicWindow;
use isoadams::jobs::{self, Basis, ChartFlavor, JobError};

fn job_error(e: JobError) -> PyErr {
    match e {
        JobError::Parse(_) | JobError::Usage(_) => PyValueError::new_err(e.to_string()),
        JobError::Precondition(_) | JobError::Window(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Multiply two elements given in text form, e.g. `multiply("Q0", "P(1)")`.
#[pyfunction]
#[pyo3(signature = (lhs, rhs, flavor = "A0", basis = "prqe"))]
fn multiply(lhs: &str, rhs: &str, flavor: &str, basis: &str) -> PyResult<String> {
    let flavor: ChartFlavor = flavor.parse().map_err(value_error)?;
    let basis: Basis = basis.parse().map_err(value_error)?;
    jobs::multiply_text(lhs, rhs, flavor, basis).map_err(job_error)
}

/// The Ext chart of a flavor in the given format. The isotropic flavor uses
/// the window `[-tmax, 0]²`.
#[pyfunction]
#[pyo3(signature = (flavor = "classical", smax = 8, tmax = 20, format = "csv"))]
fn ext_chart(py: Python<'_>, flavor: &str, smax: usize, tmax: i64, format: &str) -> PyResult<String> {
    let flavor: ChartFlavor = flavor.parse().map_err(value_error)?;
    let format: ChartFormat = format.parse().map_err(value_error)?;
    if tmax < 0 {
        return Err(PyValueError::new_err("tmax must be non-negative"));
    }
    let chart = py.detach(|| match flavor {
        ChartFlavor::Isotropic => jobs::isotropic_chart(&IsotropicWindow::new(-tmax, 0, -tmax, 0), smax, tmax)
            .map_err(|e| PyRuntimeError::new_err(e.to_string())),
        f => {
            let options = if format == ChartFormat::Json { ChartOptions::all() } else { ChartOptions::default() };
            Ok(jobs::f2_chart(f.algebra(), smax, tmax, options))
        }
    })?;
    chart::render(&chart, format).map_err(value_error)
}

/// `⟨a, b, c⟩` by class name: `(representative, [indeterminacy basis])`.
#[pyfunction]
#[pyo3(signature = (a, b, c, flavor = "classical", smax = 6, tmax = 16))]
fn massey(
    py: Python<'_>,
    a: &str,
    b: &str,
    c: &str,
    flavor: &str,
    smax: usize,
    tmax: i64,
) -> PyResult<(String, Vec<String>)> {
    let flavor: ChartFlavor = flavor.parse().map_err(value_error)?;
    let bracket = py
        .detach(|| jobs::massey_by_name(flavor, smax, tmax, [a, b, c]))
        .map_err(job_error)?;
    Ok((bracket.representative, bracket.indeterminacy))
}

/// Compare two charts (CSV or JSON text); `mode` is `equality` or `doubling`.
/// Returns the list of mismatch descriptions (empty means a match).
#[pyfunction]
#[pyo3(signature = (chart_a, chart_b, mode = "equality"))]
fn compare(chart_a: &str, chart_b: &str, mode: &str) -> PyResult<Vec<String>> {
    let a = chart::read_chart(chart_a).map_err(value_error)?;
    let b = chart::read_chart(chart_b).map_err(value_error)?;
    let report = match mode {
        "equality" => compare_charts(&a, &b),
        "doubling" => compare_doubling(&a, &b, i64::MAX),
        other => return Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
    };
    if report.compared == 0 {
        return Err(PyValueError::new_err("no cells compared"));
    }
    Ok(report.mismatches)
}

/// The isotropic-vs-classical comparison as a JSON report.
#[pyfunction]
#[pyo3(signature = (smax = 8, tmax = 44))]
fn isotropic_report(py: Python<'_>, smax: usize, tmax: i64) -> PyResult<String> {
    if tmax < 0 {
        return Err(PyValueError::new_err("tmax must be non-negative"));
    }
    let report = py.detach(|| jobs::isotropic_report(&IsotropicWindow::new(-tmax, 0, -tmax, 0), smax, tmax));
    serde_json::to_string(&serde_json::json!({
        "matched": report.matches(),
        "ambiguity": report.ambiguity,
        "doubling": report.doubling,
        "vanishing": report.vanishing,
        "chart": report.chart,
    }))
    .map_err(value_error)
}

#[pymodule]
fn isoadams_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(multiply, m)?)?;
    m.add_function(wrap_pyfunction!(ext_chart, m)?)?;
    m.add_function(wrap_pyfunction!(massey, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(isotropic_report, m)?)?;
    Ok(())
}
