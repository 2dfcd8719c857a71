//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! anything `Fraction` accepts (ints, strings like `"3/7"`, floats) is
//! accepted as input. Reports come back as plain dicts.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use ultrametric::distset::{Component, DistanceSetDescriptor};
use ultrametric::extension::{extend_with, Mode, SymbolicScaling};
use ultrametric::generators::{dendrogram_to_space, max_space, random_space, Dendrogram};
use ultrametric::preserving::{classify_preserving, empirical_falsify, PiecewiseMonotone};
use ultrametric::space::{validate as validate_matrix, FiniteUltrametricSpace, Verdict};
use ultrametric::wsim::{check_weak_similarity, find_weak_similarities, Bijection};
use ultrametric::{Error, Rational};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let fraction = obj.py().import("fractions")?.getattr("Fraction")?.call1((obj,))?;
    fraction.str()?.to_str()?.parse().map_err(err)
}

fn to_fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

fn to_dict<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn matrix_from(rows: &[Vec<Bound<'_, PyAny>>]) -> PyResult<Vec<Vec<Rational>>> {
    rows.iter().map(|row| row.iter().map(to_rational).collect()).collect()
}

fn verdict_target(target: &str) -> PyResult<Verdict> {
    match target {
        "ultra" => Ok(Verdict::Ultrametric),
        "pseudo" => Ok(Verdict::PseudoultrametricOnly),
        other => Err(PyValueError::new_err(format!("unknown target `{other}`, expected ultra or pseudo"))),
    }
}

/// A finite ultrametric (or pseudoultrametric) space.
#[pyclass(name = "Space", frozen, module = "ultrametric")]
struct PySpace(FiniteUltrametricSpace);

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (matrix, labels=None))]
    fn new(matrix: Vec<Vec<Bound<'_, PyAny>>>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let dist = matrix_from(&matrix)?;
        let labels = labels.unwrap_or_else(|| (1..=dist.len()).map(|i| format!("x{i}")).collect());
        FiniteUltrametricSpace::new(labels, dist).map(PySpace).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PySpace).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    #[getter]
    fn matrix<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        self.0.matrix().iter().map(|row| row.iter().map(|r| to_fraction(py, r)).collect()).collect()
    }

    fn verdict(&self) -> String {
        self.0.report().verdict.to_string()
    }

    fn is_ultrametric(&self) -> bool {
        self.0.is_ultrametric()
    }

    fn distance_set<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.0.distance_set().values().iter().map(|r| to_fraction(py, r)).collect()
    }

    fn diameter<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_fraction(py, &self.0.diameter())
    }

    /// `f ∘ d` for a piecewise function given as JSON.
    fn compose(&self, function_json: &str) -> PyResult<Self> {
        let f: PiecewiseMonotone = serde_json::from_str(function_json).map_err(json_err)?;
        self.0.compose(&f).map(PySpace).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Space({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

/// A symbolic distance set: finitely many points plus monotone sequences.
#[pyclass(name = "DistanceSet", frozen, module = "ultrametric")]
struct PyDistanceSet(DistanceSetDescriptor);

#[pymethods]
impl PyDistanceSet {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyDistanceSet).map_err(json_err)
    }

    #[staticmethod]
    fn finite(values: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let values = values.iter().map(to_rational).collect::<PyResult<Vec<_>>>()?;
        DistanceSetDescriptor::finite(values).map(PyDistanceSet).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    fn contains(&self, t: &Bound<'_, PyAny>) -> PyResult<bool> {
        Ok(self.0.contains(&to_rational(t)?))
    }

    /// Components of the complement, as display strings. Gap families are
    /// rendered symbolically.
    fn components(&self) -> Vec<String> {
        self.0.components().components.iter().map(Component::to_string).collect()
    }

    /// `{"tag": ..., "witness": ...}`.
    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let regime = self.0.classify();
        let dict = PyDict::new(py);
        dict.set_item("tag", regime.tag.to_string())?;
        dict.set_item("witness", regime.witness.map(|w| w.to_string()))?;
        Ok(dict.into_any())
    }

    fn is_totally_bounded(&self) -> bool {
        self.0.is_totally_bounded()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Verdict and first violated axiom of a rational matrix.
#[pyfunction]
fn validate<'py>(py: Python<'py>, matrix: Vec<Vec<Bound<'py, PyAny>>>) -> PyResult<Bound<'py, PyAny>> {
    let report = validate_matrix(&matrix_from(&matrix)?).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("verdict", report.verdict.to_string())?;
    dict.set_item("witness", report.witness.map(|w| w.to_string()))?;
    Ok(dict.into_any())
}

fn phi_dict<'py>(py: Python<'py>, phi: &Bijection) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    for (a, b) in &phi.map {
        dict.set_item(a, b)?;
    }
    Ok(dict)
}

/// Weak similarities `x → y` as `{"phi": {label: label}, "psi": [(t, ψ(t))]}`.
#[pyfunction(name = "find_weak_similarities")]
#[pyo3(signature = (x, y, limit=None))]
fn find_wsims<'py>(py: Python<'py>, x: &PySpace, y: &PySpace, limit: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    find_weak_similarities(&x.0, &y.0, limit)
        .iter()
        .map(|w| {
            let dict = PyDict::new(py);
            dict.set_item("phi", phi_dict(py, &w.phi)?)?;
            let psi = w
                .psi
                .pairs()
                .iter()
                .map(|(t, v)| Ok((to_fraction(py, t)?, to_fraction(py, v)?)))
                .collect::<PyResult<Vec<_>>>()?;
            dict.set_item("psi", psi)?;
            Ok(dict)
        })
        .collect()
}

/// Checks whether `phi` (a label → label dict) is a weak similarity.
#[pyfunction(name = "check_weak_similarity")]
fn check_wsim<'py>(py: Python<'py>, x: &PySpace, y: &PySpace, phi: BTreeMap<String, String>) -> PyResult<Bound<'py, PyAny>> {
    let phi = Bijection::new(phi).map_err(err)?;
    to_dict(py, &check_weak_similarity(&x.0, &y.0, &phi).map_err(err)?)
}

/// Extends a symbolic scaling given as JSON and evaluates the extension at
/// `at`. Returns `{"result": "extended", "values": [...]}` or
/// `{"result": "blocked", "regime", "component", "reason"}`.
#[pyfunction]
#[pyo3(signature = (scaling_json, mode, at=Vec::new()))]
fn extend<'py>(py: Python<'py>, scaling_json: &str, mode: &str, at: Vec<Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
    let psi: SymbolicScaling = serde_json::from_str(scaling_json).map_err(json_err)?;
    let mode: Mode = mode.parse().map_err(err)?;
    let dict = PyDict::new(py);
    match extend_with(&psi, mode).map_err(err)? {
        ultrametric::extension::ExtensionResult::Extended(g) => {
            dict.set_item("result", "extended")?;
            let values = at
                .iter()
                .map(|t| to_fraction(py, &g.eval(&to_rational(t)?).map_err(err)?))
                .collect::<PyResult<Vec<_>>>()?;
            dict.set_item("values", values)?;
        }
        ultrametric::extension::ExtensionResult::Blocked(b) => {
            dict.set_item("result", "blocked")?;
            dict.set_item("regime", b.regime.tag.to_string())?;
            dict.set_item("component", b.component.to_string())?;
            dict.set_item("reason", b.reason)?;
        }
    }
    Ok(dict)
}

/// Exact preservation verdict for a piecewise function given as JSON.
#[pyfunction(name = "classify_preserving")]
fn classify_fn<'py>(py: Python<'py>, function_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let f: PiecewiseMonotone = serde_json::from_str(function_json).map_err(json_err)?;
    to_dict(py, &classify_preserving(&f))
}

/// Random search for a space on which `f ∘ d` falls short of `target`.
/// Returns `None` when nothing is found.
#[pyfunction(name = "empirical_falsify")]
#[pyo3(signature = (function_json, trials=500, seed=0, target="ultra"))]
fn falsify<'py>(py: Python<'py>, function_json: &str, trials: usize, seed: u64, target: &str) -> PyResult<Option<Bound<'py, PyAny>>> {
    let f: PiecewiseMonotone = serde_json::from_str(function_json).map_err(json_err)?;
    let target = verdict_target(target)?;
    let found = py.detach(|| empirical_falsify(&f, trials, seed, target));
    found.map(|cx| to_dict(py, &cx)).transpose()
}

#[pyfunction(name = "random_space")]
#[pyo3(signature = (n, seed=0, levels=None))]
fn random(n: usize, seed: u64, levels: Option<Vec<Bound<'_, PyAny>>>) -> PyResult<PySpace> {
    let levels = match levels {
        Some(ls) => ls.iter().map(to_rational).collect::<PyResult<Vec<_>>>()?,
        None => (1..=3).map(Rational::from_int).collect(),
    };
    random_space(n, seed, &levels).map(PySpace).map_err(err)
}

#[pyfunction(name = "max_space")]
fn max_of(values: Vec<Bound<'_, PyAny>>) -> PyResult<PySpace> {
    let values = values.iter().map(to_rational).collect::<PyResult<Vec<_>>>()?;
    max_space(&values).map(PySpace).map_err(err)
}

#[pyfunction]
fn dendrogram_space(tree_json: &str) -> PyResult<PySpace> {
    let tree: Dendrogram = serde_json::from_str(tree_json).map_err(json_err)?;
    dendrogram_to_space(&tree).map(PySpace).map_err(err)
}

#[pymodule]
#[pyo3(name = "ultrametric")]
pub fn ultrametric_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyDistanceSet>()?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(find_wsims, m)?)?;
    m.add_function(wrap_pyfunction!(check_wsim, m)?)?;
    m.add_function(wrap_pyfunction!(extend, m)?)?;
    m.add_function(wrap_pyfunction!(classify_fn, m)?)?;
    m.add_function(wrap_pyfunction!(falsify, m)?)?;
    m.add_function(wrap_pyfunction!(random, m)?)?;
    m.add_function(wrap_pyfunction!(max_of, m)?)?;
    m.add_function(wrap_pyfunction!(dendrogram_space, m)?)?;
    Ok(())
}
