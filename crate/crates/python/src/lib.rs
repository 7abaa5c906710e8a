//! Python bindings: configure a run, execute the pipeline, read the report
//! and the generator.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use stargen_core::linalg::spectrum;
use stargen_core::pipeline::{self, Preset, ReportExport};
use stargen_core::report::{Bound as CheckBound, Check as CoreCheck};
use stargen_core::Error;

pyo3::create_exception!(stargen, ResourceError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::Json(_) => PyValueError::new_err(e.to_string()),
        Error::Io(io) => io.into(),
        e if e.is_resource_or_depth() => ResourceError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(module = "stargen")]
#[derive(Clone)]
struct RunConfig {
    inner: pipeline::RunConfig,
}

#[pymethods]
impl RunConfig {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        pipeline::RunConfig::from_json(text).map(|inner| RunConfig { inner }).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (name, depth = 3, truncate = None))]
    fn preset(name: &str, depth: usize, truncate: Option<usize>) -> PyResult<Self> {
        let p: Preset = name.parse().map_err(py_err)?;
        let inner = pipeline::RunConfig::preset(p, depth, truncate.unwrap_or(depth.saturating_sub(1).max(1)));
        inner.validate().map_err(py_err)?;
        Ok(RunConfig { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        pipeline::to_json(&self.inner).map_err(py_err)
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth
    }

    #[getter]
    fn truncate(&self) -> usize {
        self.inner.truncate
    }

    #[getter]
    fn word_length(&self) -> usize {
        self.inner.word_length
    }

    #[setter]
    fn set_word_length(&mut self, v: usize) {
        self.inner.word_length = v;
    }

    #[getter]
    fn tensor(&self) -> Option<usize> {
        self.inner.tensor
    }

    #[setter]
    fn set_tensor(&mut self, v: Option<usize>) {
        self.inner.tensor = v;
    }

    fn __repr__(&self) -> String {
        format!("RunConfig(depth={}, truncate={}, word_length={})", self.inner.depth, self.inner.truncate, self.inner.word_length)
    }
}

#[pyclass(module = "stargen", get_all)]
#[derive(Clone)]
struct Check {
    name: String,
    tag: String,
    passed: bool,
    value: f64,
    tolerance: f64,
    at_least: bool,
    detail: Option<String>,
}

impl From<&CoreCheck> for Check {
    fn from(c: &CoreCheck) -> Self {
        Check {
            name: c.check.clone(),
            tag: c.identity_tag.clone(),
            passed: c.passed(),
            value: c.value,
            tolerance: c.tolerance,
            at_least: c.bound == CheckBound::AtLeast,
            detail: c.detail.clone(),
        }
    }
}

#[pymethods]
impl Check {
    fn __repr__(&self) -> String {
        let rel = if self.at_least { ">=" } else { "<=" };
        let status = if self.passed { "pass" } else { "FAIL" };
        format!("Check({} {} [{}] {:.3e} {rel} {:.3e})", status, self.name, self.tag, self.value, self.tolerance)
    }
}

/// Result of a full pipeline run.
#[pyclass(module = "stargen")]
struct Run {
    inner: pipeline::PipelineRun,
}

#[pymethods]
impl Run {
    #[getter]
    fn all_pass(&self) -> bool {
        self.inner.report.all_pass()
    }

    #[getter]
    fn n_prime(&self) -> usize {
        self.inner.bundle.n_prime
    }

    #[getter]
    fn generator_norm(&self) -> f64 {
        self.inner.bundle.generator.operator_norm()
    }

    #[getter]
    fn closure_dimension(&self) -> usize {
        self.inner.single.closure_dimension
    }

    #[getter]
    fn ambient_dimension(&self) -> usize {
        self.inner.single.ambient_dimension
    }

    #[pyo3(signature = (pattern = None))]
    fn checks(&self, pattern: Option<&str>) -> Vec<Check> {
        filtered(&self.inner.report.checks, pattern)
    }

    /// Generator matrices indexed [block][sample][row][col].
    fn generator(&self) -> Vec<Vec<Vec<Vec<Complex64>>>> {
        self.inner
            .bundle
            .generator
            .data()
            .iter()
            .map(|block| block.iter().map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()).collect())
            .collect()
    }

    fn spectrum(&self, block: usize, sample: usize) -> PyResult<Vec<Complex64>> {
        spectrum(&self.inner.bundle.generator, block, sample).map_err(|e| PyIndexError::new_err(e.to_string()))
    }

    fn report_json(&self) -> PyResult<String> {
        pipeline::to_json(&self.inner.report_export()).map_err(py_err)
    }

    /// Artifact JSON keyed by file stem: snapshot, scaffold, generator.
    fn artifacts(&self) -> PyResult<Vec<(String, String)>> {
        let a = pipeline::artifacts(&self.inner.snapshot, &self.inner.qwu, &self.inner.bundle);
        Ok(vec![
            ("snapshot".into(), pipeline::to_json(&a.snapshot).map_err(py_err)?),
            ("scaffold".into(), pipeline::to_json(&a.scaffold).map_err(py_err)?),
            ("generator".into(), pipeline::to_json(&a.generator).map_err(py_err)?),
        ])
    }

    fn write(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        let a = pipeline::artifacts(&self.inner.snapshot, &self.inner.qwu, &self.inner.bundle);
        pipeline::write_artifacts(&dir, &a, Some(&self.inner.report_export())).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        let r = &self.inner.report;
        format!("Run({}/{} checks pass, N'={})", r.checks.iter().filter(|c| c.passed()).count(), r.checks.len(), self.inner.bundle.n_prime)
    }
}

fn filtered(checks: &[CoreCheck], pattern: Option<&str>) -> Vec<Check> {
    let keep = |c: &CoreCheck| match pattern {
        None => true,
        Some(p) => match p.strip_suffix('*') {
            Some(prefix) => c.check.starts_with(prefix) || c.identity_tag.starts_with(prefix),
            None => c.check == p || c.identity_tag == p,
        },
    };
    checks.iter().filter(|c| keep(c)).map(Check::from).collect()
}

#[pyfunction]
fn run(py: Python<'_>, config: &RunConfig) -> PyResult<Run> {
    let cfg = config.inner.clone();
    let inner = py.allow_threads(move || pipeline::run_pipeline(&cfg)).map_err(py_err)?;
    Ok(Run { inner })
}

/// Builds and writes snapshot, scaffold and generator without verification.
#[pyfunction]
fn export(py: Python<'_>, config: &RunConfig, out: PathBuf) -> PyResult<Vec<PathBuf>> {
    let cfg = config.inner.clone();
    py.allow_threads(move || {
        let (snap, qwu, bundle) = pipeline::build(&cfg)?;
        pipeline::write_artifacts(&out, &pipeline::artifacts(&snap, &qwu, &bundle), None)
    })
    .map_err(py_err)
}

/// Reads a report.json written by `run`.
#[pyfunction]
#[pyo3(signature = (path, pattern = None))]
fn load_report(path: PathBuf, pattern: Option<&str>) -> PyResult<Vec<Check>> {
    let text = std::fs::read_to_string(path)?;
    let rep: ReportExport = serde_json::from_str(&text).map_err(|e| py_err(e.into()))?;
    Ok(filtered(&rep.checks, pattern))
}

#[pymodule]
fn stargen(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RunConfig>()?;
    m.add_class::<Check>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(export, m)?)?;
    m.add_function(wrap_pyfunction!(load_report, m)?)?;
    m.add("ResourceError", m.py().get_type::<ResourceError>())?;
    Ok(())
}
