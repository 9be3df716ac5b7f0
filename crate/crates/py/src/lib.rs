//! Python bindings for the set-theory workbench.

use std::sync::Arc;

use fidelset_core::evaluator::{EvalContext, NegationPolicy};
use fidelset_core::fidel::FidelStructure;
use fidelset_core::frontend::cli::{run_command, EXIT_CEILING, EXIT_COUNTEREXAMPLE, EXIT_USAGE, EXIT_VALID};
use fidelset_core::frontend::{load_structure, parse_formula, parse_name};
use fidelset_core::lattice::{Algebra, Element};
use fidelset_core::names::{enumerate_universe, NameId, NameStore, DEFAULT_CEILING};
use fidelset_core::proplogic::find_paraconsistency_witness;
use fidelset_core::zfcheck::{
    check_axiom, check_leibniz, check_leibniz_sampled, generate_templates, Axiom, AxiomOptions, Report, Sampler,
    DEFAULT_SEED,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_dict<'py>(py: Python<'py>, report: &Report) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(report).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite Fidel structure.
#[pyclass(module = "fidelset", frozen)]
struct Structure {
    inner: Arc<FidelStructure>,
}

#[pymethods]
impl Structure {
    /// Loads a structure file, or a built-in structure by name.
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        let inner = load_structure(source).map_err(value_error)?;
        Ok(Structure { inner: Arc::new(inner) })
    }

    /// The saturated structure over the same algebra.
    fn saturate(&self) -> Structure {
        Structure {
            inner: Arc::new(FidelStructure::saturate(self.inner.algebra().clone())),
        }
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.algebra().labels().to_vec()
    }

    #[getter]
    fn top(&self) -> String {
        let a = self.inner.algebra();
        a.label(a.top()).to_string()
    }

    #[getter]
    fn bottom(&self) -> String {
        let a = self.inner.algebra();
        a.label(a.bottom()).to_string()
    }

    fn is_valid(&self) -> bool {
        self.inner.is_valid()
    }

    /// Labels of the admissible negations of `x`.
    fn negations(&self, x: &str) -> PyResult<Vec<String>> {
        let a = self.inner.algebra();
        let e = a
            .element_by_label(x)
            .ok_or_else(|| value_error(format!("no element labelled {x:?}")))?;
        Ok(self
            .inner
            .negations(e)
            .indices()
            .map(|i| a.label(a.element(i)).to_string())
            .collect())
    }

    fn meet(&self, x: &str, y: &str) -> PyResult<String> {
        self.binary(x, y, |a, p, q| a.meet(p, q))
    }

    fn join(&self, x: &str, y: &str) -> PyResult<String> {
        self.binary(x, y, |a, p, q| a.join(p, q))
    }

    fn imp(&self, x: &str, y: &str) -> PyResult<String> {
        self.binary(x, y, |a, p, q| a.imp(p, q))
    }

    /// A paraconsistency witness as `(formula, valuation, value)`, or None.
    fn paraconsistency_witness(&self) -> Option<(String, String, String)> {
        let w = find_paraconsistency_witness(&self.inner)?;
        let a = self.inner.algebra();
        Some((
            w.formula.to_string(),
            w.valuation.render(&self.inner),
            a.label(w.value).to_string(),
        ))
    }

    fn __repr__(&self) -> String {
        format!("Structure({})", self.inner.algebra().labels().join(", "))
    }
}

impl Structure {
    fn binary(&self, x: &str, y: &str, op: impl Fn(&Algebra, Element, Element) -> Element) -> PyResult<String> {
        let a = self.inner.algebra();
        let find = |l: &str| {
            a.element_by_label(l)
                .ok_or_else(|| value_error(format!("no element labelled {l:?}")))
        };
        Ok(a.label(op(a, find(x)?, find(y)?)).to_string())
    }
}

/// Names up to a rank bound over a structure, with memoized truth values.
#[pyclass(module = "fidelset", frozen)]
struct Model {
    ctx: EvalContext,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (structure, rank = 2, policy = "standard", ceiling = DEFAULT_CEILING))]
    fn new(structure: &Structure, rank: usize, policy: &str, ceiling: u128) -> PyResult<Self> {
        let policy: NegationPolicy = policy.parse().map_err(value_error)?;
        let s = structure.inner.clone();
        let store = Arc::new(NameStore::new(s.algebra().clone()));
        let universe = Arc::new(enumerate_universe(&store, rank, ceiling).map_err(value_error)?);
        let ctx = EvalContext::new(s, store, universe, policy).map_err(value_error)?;
        Ok(Model { ctx })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.ctx.rank_bound()
    }

    #[getter]
    fn policy(&self) -> &'static str {
        self.ctx.policy().label()
    }

    /// Cumulative universe sizes, one entry per rank.
    fn counts(&self) -> Vec<usize> {
        self.ctx.universe().counts()
    }

    fn names(&self) -> Vec<String> {
        self.ctx
            .universe()
            .names()
            .iter()
            .map(|&n| self.ctx.store().literal(n))
            .collect()
    }

    /// Truth value label of a closed formula.
    fn eval(&self, formula: &str) -> PyResult<String> {
        let parsed = parse_formula(formula, self.ctx.store()).map_err(value_error)?;
        let v = self.ctx.eval(&parsed.formula).map_err(value_error)?;
        Ok(self.ctx.algebra().label(v).to_string())
    }

    fn membership(&self, u: &str, v: &str) -> PyResult<String> {
        let (u, v) = (self.name(u)?, self.name(v)?);
        Ok(self.ctx.algebra().label(self.ctx.membership(u, v)).to_string())
    }

    fn equality(&self, u: &str, v: &str) -> PyResult<String> {
        let (u, v) = (self.name(u)?, self.name(v)?);
        Ok(self.ctx.algebra().label(self.ctx.equality(u, v)).to_string())
    }

    /// Leibniz law check; exhaustive unless `samples` is given.
    #[pyo3(signature = (depth = 1, samples = None, seed = None))]
    fn leibniz<'py>(
        &self,
        py: Python<'py>,
        depth: usize,
        samples: Option<usize>,
        seed: Option<u64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (verdict, seed) = py.detach(|| match samples {
            Some(n) => {
                let seed = seed.unwrap_or(DEFAULT_SEED);
                (check_leibniz_sampled(&self.ctx, depth, n, seed), Some(seed))
            }
            None => (
                check_leibniz(&self.ctx, &generate_templates(depth, self.ctx.universe().names())),
                None,
            ),
        });
        to_dict(py, &verdict.report(&self.ctx, seed))
    }

    /// One report per axiom, or for the named axiom only.
    #[pyo3(signature = (axiom = None, depth = 1, samples = None, seed = None))]
    fn zf<'py>(
        &self,
        py: Python<'py>,
        axiom: Option<&str>,
        depth: usize,
        samples: Option<usize>,
        seed: Option<u64>,
    ) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let axioms = match axiom {
            Some(name) => vec![name.parse::<Axiom>().map_err(value_error)?],
            None => Axiom::ALL.to_vec(),
        };
        let sampler = samples.map(|samples| Sampler {
            samples,
            seed: seed.unwrap_or(DEFAULT_SEED),
        });
        let options = AxiomOptions {
            depth,
            sampler,
            ..AxiomOptions::default()
        };
        let reports: Vec<Report> = py.detach(|| {
            axioms
                .into_iter()
                .map(|a| check_axiom(a, &self.ctx, &options).report(&self.ctx))
                .collect()
        });
        reports.iter().map(|r| to_dict(py, r)).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(rank={}, policy={}, names={})",
            self.ctx.rank_bound(),
            self.ctx.policy(),
            self.ctx.universe().names().len()
        )
    }
}

impl Model {
    fn name(&self, src: &str) -> PyResult<NameId> {
        parse_name(src, self.ctx.store()).map_err(value_error)
    }
}

/// Runs the command-line driver and returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let out = run_command(std::iter::once("fidelset".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
fn fidelset(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Structure>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("EXIT_CODES", {
        let d = PyDict::new(m.py());
        d.set_item("valid", EXIT_VALID)?;
        d.set_item("counterexample", EXIT_COUNTEREXAMPLE)?;
        d.set_item("usage", EXIT_USAGE)?;
        d.set_item("ceiling", EXIT_CEILING)?;
        d
    })?;
    Ok(())
}
