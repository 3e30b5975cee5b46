//! Python bindings for the parafree decision procedure: free-group word
//! arithmetic, exact integer lattice computations, and the graph-of-groups
//! checkers with their JSON reports.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyNone};
use serde_json::Value;

use parafree::criteria::{check_gog, CheckOptions};
use parafree::graph::{expected_rank, spanning_tree, GraphOfGroups};
use parafree::instance::{instance_to_json, parse_instance, parse_mixed_word};
use parafree::lattice::{self, IntMatrix};
use parafree::normal_form::is_nontrivial;
use parafree::report::{self, verdict_to_json};
use parafree::witness::{search_witness_with_workers, SearchBounds, SearchOutcome};
use parafree::words::{self, Alphabet, Word};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// serde_json -> Python objects (dicts, lists, ints, strings).
fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => PyNone::get(py).to_owned().into_any(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap().into_pyobject(py)?.into_any()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_any()
        }
    })
}

fn matrix_from_rows(rows: Vec<Vec<BigInt>>) -> PyResult<IntMatrix> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(PyValueError::new_err("rows must have equal length"));
    }
    Ok(IntMatrix::from_rows(rows))
}

fn matrix_to_rows(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect())
        .collect()
}

/// A finitely generated free group with named generators; all word arguments
/// use the `name` / `name^k` token syntax.
#[pyclass(name = "FreeGroup")]
struct PyFreeGroup {
    alphabet: Alphabet,
}

impl PyFreeGroup {
    fn word(&self, text: &str) -> PyResult<Word> {
        words::parse_word(&self.alphabet, text).map_err(value_error)
    }

    fn show(&self, w: &Word) -> String {
        w.display(&self.alphabet).to_string()
    }
}

#[pymethods]
impl PyFreeGroup {
    #[new]
    fn new(generators: Vec<String>) -> PyResult<Self> {
        Ok(PyFreeGroup { alphabet: Alphabet::new(generators).map_err(value_error)? })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    #[getter]
    fn generators(&self) -> Vec<String> {
        self.alphabet.names().to_vec()
    }

    /// Freely reduced form of a word.
    fn reduce(&self, word: &str) -> PyResult<String> {
        Ok(self.show(&self.word(word)?))
    }

    /// `(core, conjugator)` with `word = conjugator core conjugator^-1`.
    fn cyclic_reduce(&self, word: &str) -> PyResult<(String, String)> {
        let (core, conjugator) = words::cyclic_reduce(&self.word(word)?);
        Ok((self.show(&core), self.show(&conjugator)))
    }

    /// `(conjugator, root, exponent)` with the root primitive and the
    /// exponent maximal; exponent >= 2 means the word is a proper power.
    fn primitive_root(&self, word: &str) -> PyResult<(String, String, u32)> {
        let rd = words::primitive_root(&self.word(word)?).map_err(value_error)?;
        Ok((self.show(&rd.conjugator), self.show(&rd.root), rd.exponent))
    }

    fn is_proper_power(&self, word: &str) -> PyResult<bool> {
        let rd = words::primitive_root(&self.word(word)?).map_err(value_error)?;
        Ok(rd.exponent >= 2)
    }

    /// Signed letter counts in Z^rank.
    fn exponent_vector(&self, word: &str) -> PyResult<Vec<i64>> {
        Ok(words::exponent_vector(&self.word(word)?, self.alphabet.rank()))
    }

    fn multiply(&self, left: &str, right: &str) -> PyResult<String> {
        Ok(self.show(&self.word(left)?.concat(&self.word(right)?)))
    }

    fn inverse(&self, word: &str) -> PyResult<String> {
        Ok(self.show(&self.word(word)?.inverse()))
    }

    fn __repr__(&self) -> String {
        format!("FreeGroup({:?})", self.alphabet.names())
    }
}

type Rows = Vec<Vec<BigInt>>;

/// Smith normal form: returns `(u, d, v)` with `d = u @ m @ v`, `u` and `v`
/// unimodular and the diagonal a nonnegative divisibility chain.
#[pyfunction]
fn smith_normal_form(rows: Rows) -> PyResult<(Rows, Rows, Rows)> {
    let m = matrix_from_rows(rows)?;
    let snf = lattice::smith_normal_form(&m);
    Ok((matrix_to_rows(&snf.u), matrix_to_rows(&snf.d), matrix_to_rows(&snf.v)))
}

/// `(free_rank, torsion)` of `Z^ambient / rowspace(rows)`.
#[pyfunction]
fn cokernel_invariants(
    rows: Vec<Vec<BigInt>>,
    ambient_rank: usize,
) -> PyResult<(usize, Vec<BigInt>)> {
    let m = if rows.is_empty() {
        IntMatrix::empty_rows(ambient_rank)
    } else {
        matrix_from_rows(rows)?
    };
    let inv = lattice::cokernel_invariants(&m, ambient_rank).map_err(value_error)?;
    Ok((inv.free_rank, inv.torsion))
}

/// Nonzero with content one: not a proper power in the free abelian group.
#[pyfunction]
fn is_primitive_vector(vector: Vec<BigInt>) -> bool {
    lattice::is_primitive_vector(&vector)
}

fn bounds_from_args(
    dims: Option<Vec<u8>>,
    primes: Option<Vec<u32>>,
    cap: Option<u64>,
    samples: Option<u64>,
    seed: Option<u64>,
) -> SearchBounds {
    let mut bounds = SearchBounds::default();
    if let Some(dims) = dims {
        bounds.dims = dims;
    }
    if let Some(primes) = primes {
        bounds.primes = primes;
    }
    if let Some(cap) = cap {
        bounds.exhaustive_cap = cap;
    }
    if let Some(samples) = samples {
        bounds.sample_count = samples;
    }
    if let Some(seed) = seed {
        bounds.seed = seed;
    }
    bounds
}

/// A validated graph-of-groups instance.
#[pyclass(name = "Instance")]
struct PyInstance {
    graph: GraphOfGroups,
}

#[pymethods]
impl PyInstance {
    /// Parses the JSON instance document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance { graph: parse_instance(text.as_bytes()).map_err(value_error)? })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let bytes = std::fs::read(path).map_err(value_error)?;
        Ok(PyInstance { graph: parse_instance(&bytes).map_err(value_error)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&instance_to_json(&self.graph)).expect("instances serialize")
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.graph.vertices().iter().map(|v| v.id.clone()).collect()
    }

    #[getter]
    fn edges(&self) -> Vec<String> {
        self.graph.edges().iter().map(|e| e.id.clone()).collect()
    }

    /// Full parafreeness check; returns the same report as the CLI `check`.
    #[pyo3(signature = (dims=None, primes=None, cap=None, samples=None, seed=None, workers=1))]
    #[allow(clippy::too_many_arguments)]
    fn check<'py>(
        &self,
        py: Python<'py>,
        dims: Option<Vec<u8>>,
        primes: Option<Vec<u32>>,
        cap: Option<u64>,
        samples: Option<u64>,
        seed: Option<u64>,
        workers: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = CheckOptions {
            bounds: bounds_from_args(dims, primes, cap, samples, seed),
            workers: workers.max(1),
            edge_order: Vec::new(),
        };
        opts.bounds.validate().map_err(value_error)?;
        let verdict = check_gog(&self.graph, &opts);
        json_to_py(py, &verdict_to_json(&verdict, Some(&opts.bounds)))
    }

    /// Just the verdict string: "parafree", "not_parafree" or "unknown".
    fn verdict(&self) -> String {
        check_gog(&self.graph, &CheckOptions::default()).status.label().to_string()
    }

    fn abelianization<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &report::abelianization_to_json(&self.graph))
    }

    fn expected_rank(&self) -> i64 {
        expected_rank(&self.graph)
    }

    fn spanning_tree(&self) -> Vec<String> {
        spanning_tree(&self.graph).into_iter().collect()
    }

    /// Searches nilpotent witnesses for an edge word; returns the witness
    /// dict or None when the bounds are exhausted.
    #[pyo3(signature = (edge, dims=None, primes=None, cap=None, samples=None, seed=None, workers=1))]
    #[allow(clippy::too_many_arguments)]
    fn search_witness<'py>(
        &self,
        py: Python<'py>,
        edge: &str,
        dims: Option<Vec<u8>>,
        primes: Option<Vec<u32>>,
        cap: Option<u64>,
        samples: Option<u64>,
        seed: Option<u64>,
        workers: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let bounds = bounds_from_args(dims, primes, cap, samples, seed);
        let outcome = search_witness_with_workers(&self.graph, edge, &bounds, workers.max(1))
            .map_err(value_error)?;
        match outcome {
            SearchOutcome::Found(w) => json_to_py(py, &report::witness_to_json(&w)),
            SearchOutcome::NoWitnessUpToBound { .. } => Ok(PyNone::get(py).to_owned().into_any()),
        }
    }

    fn abelian_witness(&self, edge: &str) -> PyResult<String> {
        let det = parafree::witness::abelian_witness(&self.graph, edge).map_err(value_error)?;
        Ok(det.value.label().to_string())
    }

    /// Exact triviality for mixed words on instances with at most one edge;
    /// returns a dict with `determination`, `nontrivial` and `reduced`.
    fn normal_form<'py>(&self, py: Python<'py>, word: &str) -> PyResult<Bound<'py, PyAny>> {
        let mw = parse_mixed_word(&self.graph, word).map_err(value_error)?;
        let det = is_nontrivial(&self.graph, &mw);
        let reduced = match &det.evidence {
            parafree::criteria::Evidence::Reduction { reduced, .. } => reduced.clone(),
            _ => mw.display(&self.graph),
        };
        let out = PyDict::new(py);
        out.set_item("determination", det.value.label())?;
        out.set_item(
            "nontrivial",
            match det.value {
                parafree::criteria::Value3::Yes => Some(true),
                parafree::criteria::Value3::No => Some(false),
                parafree::criteria::Value3::Unknown => None,
            },
        )?;
        out.set_item("reduced", reduced)?;
        Ok(out.into_any())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(vertices={}, edges={})",
            self.graph.vertices().len(),
            self.graph.edges().len()
        )
    }
}

#[pymodule]
fn parafree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFreeGroup>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(smith_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(cokernel_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(is_primitive_vector, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
