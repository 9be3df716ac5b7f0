//! Bounded-rank checks of Leibniz's law and of the set-theoretic axioms.
//!
//! Every verifier reduces to a list of [`Comparison`]s between closed
//! formulas, so a reported failure can be re-evaluated from the report alone.
//! Outer quantifiers range over `V_≤K` (or a seeded sample of it); each
//! result carries a note on which way the bounded check approximates.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evaluator::EvalContext;
use crate::formula::{Formula, Term};
use crate::frontend::pretty::print_formula;
use crate::lattice::Element;
use crate::names::{hat_embed, mixture, universal_name, HfSet, NameId, NameStore};

pub const DEFAULT_SEED: u64 = 0x5eed;
/// Largest von Neumann numeral placed in the truncated `ω̂`.
pub const INFINITY_BOUND: usize = 8;

const X: &str = "x";

fn x() -> Term {
    Term::var(X)
}

fn bound_var(f: &Formula) -> String {
    format!("y{}", f.bounded_depth() + 1)
}

fn push_new(out: &mut Vec<Formula>, seen: &mut HashSet<Formula>, f: Formula) {
    if seen.insert(f.clone()) {
        out.push(f);
    }
}

fn atoms(params: &[NameId]) -> Vec<Formula> {
    params
        .iter()
        .flat_map(|&p| {
            [
                Formula::member(p, x()),
                Formula::member(x(), p),
                Formula::equal(x(), p),
                Formula::equal(p, x()),
            ]
        })
        .collect()
}

fn connect(op: usize, a: Formula, b: Formula) -> Formula {
    match op {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        _ => Formula::implies(a, b),
    }
}

/// Templates in the free variable `x`, in a fixed order.
///
/// Level 0 holds `p∈x`, `x∈p`, `x≈p`, `p≈x` for each parameter. Level `d+1`
/// adds `¬φ`, `¬¬φ`, `∃y∈x φ[x:=y]`, `∀y∈x φ[x:=y]` for `φ` of level `d`,
/// then `φ#ψ` and `ψ#φ` for `ψ` of level 0.
pub fn generate_templates(depth: usize, params: &[NameId]) -> Vec<Formula> {
    let base = atoms(params);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in &base {
        push_new(&mut out, &mut seen, f.clone());
    }
    for _ in 0..depth {
        let prev = out.clone();
        for f in &prev {
            push_new(&mut out, &mut seen, Formula::not(f.clone()));
        }
        for f in &prev {
            push_new(&mut out, &mut seen, Formula::not(Formula::not(f.clone())));
        }
        for f in &prev {
            let y = bound_var(f);
            let body = f.substitute(X, &Term::var(&y));
            push_new(&mut out, &mut seen, Formula::bexists(&y, x(), body.clone()));
            push_new(&mut out, &mut seen, Formula::bforall(&y, x(), body));
        }
        for f in &prev {
            for g in &base {
                for op in 0..3 {
                    push_new(&mut out, &mut seen, connect(op, f.clone(), g.clone()));
                    push_new(&mut out, &mut seen, connect(op, g.clone(), f.clone()));
                }
            }
        }
    }
    out
}

/// Templates in `x` and `y`: the relations between the two variables and
/// the atoms of `y` against parameters, closed as in [`generate_templates`]
/// without the bounded quantifiers.
pub fn generate_binary_templates(depth: usize, params: &[NameId]) -> Vec<Formula> {
    let (vx, vy) = (Term::var("x"), Term::var("y"));
    let mut base = vec![
        Formula::member(vx.clone(), vy.clone()),
        Formula::member(vy.clone(), vx.clone()),
        Formula::equal(vx.clone(), vy.clone()),
        Formula::equal(vy.clone(), vx),
    ];
    for &p in params {
        base.push(Formula::member(p, vy.clone()));
        base.push(Formula::member(vy.clone(), p));
        base.push(Formula::equal(vy.clone(), p));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in &base {
        push_new(&mut out, &mut seen, f.clone());
    }
    for _ in 0..depth {
        let prev = out.clone();
        for f in &prev {
            push_new(&mut out, &mut seen, Formula::not(f.clone()));
            push_new(&mut out, &mut seen, Formula::not(Formula::not(f.clone())));
        }
        for f in &prev {
            for g in &base {
                for op in 0..3 {
                    push_new(&mut out, &mut seen, connect(op, f.clone(), g.clone()));
                }
            }
        }
    }
    out
}

/// A random template drawn from the same grammar as [`generate_templates`].
pub fn sample_template<R: Rng + ?Sized>(rng: &mut R, depth: usize, params: &[NameId]) -> Formula {
    let atom = |rng: &mut R| {
        let p = params[rng.random_range(0..params.len())];
        match rng.random_range(0..4) {
            0 => Formula::member(p, x()),
            1 => Formula::member(x(), p),
            2 => Formula::equal(x(), p),
            _ => Formula::equal(p, x()),
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    let inner = sample_template(rng, depth - 1, params);
    match rng.random_range(0..6) {
        0 => inner,
        1 => Formula::not(inner),
        2 => Formula::not(Formula::not(inner)),
        3 | 4 => {
            let y = bound_var(&inner);
            let body = inner.substitute(X, &Term::var(&y));
            if rng.random_bool(0.5) {
                Formula::bexists(&y, x(), body)
            } else {
                Formula::bforall(&y, x(), body)
            }
        }
        _ => {
            let g = atom(rng);
            let op = rng.random_range(0..3);
            if rng.random_bool(0.5) {
                connect(op, inner, g)
            } else {
                connect(op, g, inner)
            }
        }
    }
}

/// A random template from the grammar of [`generate_binary_templates`].
pub fn sample_binary_template<R: Rng + ?Sized>(rng: &mut R, depth: usize, params: &[NameId]) -> Formula {
    let (vx, vy) = (Term::var("x"), Term::var("y"));
    let atom = |rng: &mut R| {
        let p = params[rng.random_range(0..params.len())];
        match rng.random_range(0..7) {
            0 => Formula::member(vx.clone(), vy.clone()),
            1 => Formula::member(vy.clone(), vx.clone()),
            2 => Formula::equal(vx.clone(), vy.clone()),
            3 => Formula::equal(vy.clone(), vx.clone()),
            4 => Formula::member(p, vy.clone()),
            5 => Formula::member(vy.clone(), p),
            _ => Formula::equal(vy.clone(), p),
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    let inner = sample_binary_template(rng, depth - 1, params);
    match rng.random_range(0..4) {
        0 => inner,
        1 => Formula::not(inner),
        2 => Formula::not(Formula::not(inner)),
        _ => {
            let g = atom(rng);
            connect(rng.random_range(0..3), inner, g)
        }
    }
}

fn instance(template: &Formula, name: NameId) -> Formula {
    template.substitute(X, &Term::Const(name))
}

fn render(store: &NameStore, symbols: &[(NameId, String)], f: &Formula) -> String {
    print_formula(f, &|id| {
        symbols
            .iter()
            .find(|(n, _)| *n == id)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| store.literal(id))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    ValidUpToBound,
    Counterexample,
}

impl Verdict {
    pub fn is_valid(self) -> bool {
        self != Verdict::Counterexample
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "valid",
            Verdict::ValidUpToBound => "valid up to bound",
            Verdict::Counterexample => "counterexample",
        })
    }
}

/// Machine-readable form of a check, one JSON document per check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub axiom: String,
    pub verdict: Verdict,
    pub rank: usize,
    pub policy: String,
    pub checks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{}: {} (rank {}, {} policy, {} checks",
            self.axiom, self.verdict, self.rank, self.policy, self.checks
        );
        if let Some(n) = self.family {
            out.push_str(&format!(", {n} templates"));
        }
        if let Some(s) = self.seed {
            out.push_str(&format!(", seed {s}"));
        }
        out.push_str(")\n");
        if let Some(w) = &self.witness {
            out.push_str(&format!("  witness: {w}\n"));
        }
        if let Some(values) = &self.values {
            for (k, v) in values {
                out.push_str(&format!("  {k}: {v}\n"));
            }
        }
        if let Some(n) = &self.note {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Leibniz's law

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeibnizCounterexample {
    pub template: Formula,
    pub u: NameId,
    pub v: NameId,
    pub equality: Element,
    pub phi_u: Element,
    pub phi_v: Element,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeibnizVerdict {
    Valid {
        templates: usize,
        pairs: usize,
        checks: usize,
        /// Checked pairs with `u ≠ v` and `||u≈v||` above bottom.
        nontrivial: usize,
    },
    Counterexample(LeibnizCounterexample),
}

impl LeibnizVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, LeibnizVerdict::Valid { .. })
    }

    pub fn counterexample(&self) -> Option<&LeibnizCounterexample> {
        match self {
            LeibnizVerdict::Counterexample(c) => Some(c),
            LeibnizVerdict::Valid { .. } => None,
        }
    }

    pub fn report(&self, ctx: &EvalContext, seed: Option<u64>) -> Report {
        let alg = ctx.algebra();
        let (verdict, checks, family, values, witness) = match self {
            LeibnizVerdict::Valid {
                templates,
                checks,
                nontrivial,
                ..
            } => {
                let values = BTreeMap::from([("nontrivial pairs".to_string(), nontrivial.to_string())]);
                (Verdict::Valid, *checks, Some(*templates), Some(values), None)
            }
            LeibnizVerdict::Counterexample(c) => {
                let store = ctx.store();
                let mut values = BTreeMap::new();
                values.insert("phi".into(), render(store, &[], &c.template));
                values.insert("u".into(), store.literal(c.u));
                values.insert("v".into(), store.literal(c.v));
                values.insert("u eq v".into(), alg.label(c.equality).into());
                values.insert("phi(u)".into(), alg.label(c.phi_u).into());
                values.insert("phi(v)".into(), alg.label(c.phi_v).into());
                let w = format!(
                    "phi = {}, u = {}, v = {}",
                    render(store, &[], &c.template),
                    store.literal(c.u),
                    store.literal(c.v)
                );
                (Verdict::Counterexample, 1, None, Some(values), Some(w))
            }
        };
        Report {
            axiom: "leibniz".into(),
            verdict,
            rank: ctx.rank_bound(),
            policy: ctx.policy().label().into(),
            checks,
            family,
            witness,
            values,
            seed,
            note: Some("u, v range over V_<=K; the law is checked over the template family only".into()),
        }
    }
}

fn leibniz_fails(ctx: &EvalContext, eq: Element, phi_u: Element, phi_v: Element) -> bool {
    let alg = ctx.algebra();
    !alg.leq(alg.meet(eq, phi_u), phi_v)
}

/// Exhaustive over `templates × V_≤K × V_≤K`. The reported counterexample is
/// the first in that order.
pub fn check_leibniz(ctx: &EvalContext, templates: &[Formula]) -> LeibnizVerdict {
    let names = ctx.universe().names().to_vec();
    let found = templates.par_iter().find_map_first(|t| {
        let values: Vec<Element> = names
            .iter()
            .map(|&u| ctx.eval(&instance(t, u)).expect("templates are closed by x"))
            .collect();
        for (i, &u) in names.iter().enumerate() {
            for (j, &v) in names.iter().enumerate() {
                let eq = ctx.equality(u, v);
                if leibniz_fails(ctx, eq, values[i], values[j]) {
                    return Some(LeibnizCounterexample {
                        template: t.clone(),
                        u,
                        v,
                        equality: eq,
                        phi_u: values[i],
                        phi_v: values[j],
                    });
                }
            }
        }
        None
    });
    match found {
        Some(c) => LeibnizVerdict::Counterexample(c),
        None => {
            let bottom = ctx.algebra().bottom();
            let nontrivial = names
                .iter()
                .flat_map(|&u| names.iter().map(move |&v| (u, v)))
                .filter(|&(u, v)| u != v && ctx.equality(u, v) != bottom)
                .count();
            LeibnizVerdict::Valid {
                templates: templates.len(),
                pairs: names.len() * names.len(),
                checks: templates.len() * names.len() * names.len(),
                nontrivial,
            }
        }
    }
}

/// A name close to `u`: one entry's value changed, or a new entry added.
fn perturb<R: Rng + ?Sized>(store: &NameStore, u: NameId, pool: &[NameId], rng: &mut R) -> NameId {
    let alg = store.algebra();
    let mut entries: Vec<(NameId, Element)> = store.entries(u).to_vec();
    if !entries.is_empty() && rng.random_bool(0.5) {
        let i = rng.random_range(0..entries.len());
        entries[i].1 = alg.element(rng.random_range(0..alg.size()));
    } else {
        let candidates: Vec<NameId> = pool
            .iter()
            .copied()
            .filter(|p| entries.iter().all(|(c, _)| c != p))
            .collect();
        if let Some(&c) = candidates.get(rng.random_range(0..candidates.len().max(1))) {
            entries.push((c, alg.element(rng.random_range(0..alg.size()))));
        }
    }
    store.make_name(entries).expect("entries come from this store")
}

/// `samples` random triples `(u, v, φ)` with `u, v ∈ V_≤K` and `φ` of the given
/// depth. Half of the `v` are small perturbations of `u`, so that `||u≈v||`
/// is often strictly between bottom and top.
pub fn check_leibniz_sampled(ctx: &EvalContext, depth: usize, samples: usize, seed: u64) -> LeibnizVerdict {
    let store = ctx.store();
    let names = ctx.universe().names();
    let below: Vec<NameId> = if ctx.rank_bound() > 1 {
        ctx.universe().level(ctx.rank_bound() - 1).to_vec()
    } else {
        Vec::new()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = ctx.universe().sample(&mut rng);
        let v = if rng.random_bool(0.5) || below.is_empty() {
            ctx.universe().sample(&mut rng)
        } else {
            perturb(store, u, &below, &mut rng)
        };
        let v = if store.rank(v) > ctx.rank_bound() { u } else { v };
        let t = sample_template(&mut rng, depth, names);
        triples.push((u, v, t));
    }
    let found = triples.par_iter().find_map_first(|(u, v, t)| {
        let eq = ctx.equality(*u, *v);
        let phi_u = ctx.eval(&instance(t, *u)).expect("closed");
        let phi_v = ctx.eval(&instance(t, *v)).expect("closed");
        leibniz_fails(ctx, eq, phi_u, phi_v).then(|| LeibnizCounterexample {
            template: t.clone(),
            u: *u,
            v: *v,
            equality: eq,
            phi_u,
            phi_v,
        })
    });
    match found {
        Some(c) => LeibnizVerdict::Counterexample(c),
        None => {
            let bottom = ctx.algebra().bottom();
            let nontrivial = triples
                .iter()
                .filter(|(u, v, _)| u != v && ctx.equality(*u, *v) != bottom)
                .count();
            LeibnizVerdict::Valid {
                templates: samples,
                pairs: samples,
                checks: samples,
                nontrivial,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Axioms

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Extensionality,
    Pairing,
    Powerset,
    Separation,
    EmptySet,
    Union,
    Infinity,
    Collection,
    Induction,
}

impl Axiom {
    pub const ALL: [Axiom; 9] = [
        Axiom::Extensionality,
        Axiom::Pairing,
        Axiom::Powerset,
        Axiom::Separation,
        Axiom::EmptySet,
        Axiom::Union,
        Axiom::Infinity,
        Axiom::Collection,
        Axiom::Induction,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Axiom::Extensionality => "extensionality",
            Axiom::Pairing => "pairing",
            Axiom::Powerset => "powerset",
            Axiom::Separation => "separation",
            Axiom::EmptySet => "empty-set",
            Axiom::Union => "union",
            Axiom::Infinity => "infinity",
            Axiom::Collection => "collection",
            Axiom::Induction => "induction",
        }
    }

    fn note(self) -> &'static str {
        match self {
            Axiom::Extensionality => {
                "u, v, z range over V_<=K; the premise's forall-z over-approximates, but the bound only needs z in dom(u) and dom(v)"
            }
            Axiom::Pairing => "u, v, z range over V_<=K; w has rank at most K+1 and membership in it is exact",
            Axiom::Powerset => "u, v range over V_<=K; every function dom(u) -> A is a name of rank at most K",
            Axiom::Separation => {
                "u ranges over V_<=K and univ(K), z over V_<=K, phi over the template family only"
            }
            Axiom::EmptySet => "uniform witness univ(K) checked against every z in V_<=K",
            Axiom::Union => "u, y range over V_<=K; w(x) joins u(v) & v(x) over v in dom(u)",
            Axiom::Infinity => "omega is truncated to the numerals up to the bound",
            Axiom::Collection => "the unbounded exists-y is cut to V_<=K, which is dom(univ(K)); phi over binary templates",
            Axiom::Induction => "the hypothesis's forall-x over-approximates; x and its domain descendants lie in V_<=K",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Axiom {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace(['_', ' '], "-");
        Axiom::ALL
            .into_iter()
            .find(|a| a.label() == norm || (norm == "empty" || norm == "emptyset") && *a == Axiom::EmptySet)
            .ok_or_else(|| {
                let all: Vec<&str> = Axiom::ALL.iter().map(|a| a.label()).collect();
                format!("unknown axiom `{s}` (expected one of {})", all.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Leq,
}

/// `||lhs|| = ||rhs||` or `||lhs|| ≤ ||rhs||`; a missing `rhs` stands for top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub lhs: Formula,
    pub rhs: Option<Formula>,
    pub relation: Relation,
}

impl Comparison {
    fn eq(lhs: Formula, rhs: Formula) -> Self {
        Comparison {
            lhs,
            rhs: Some(rhs),
            relation: Relation::Eq,
        }
    }

    fn leq(lhs: Formula, rhs: Formula) -> Self {
        Comparison {
            lhs,
            rhs: Some(rhs),
            relation: Relation::Leq,
        }
    }

    fn is_top(lhs: Formula) -> Self {
        Comparison {
            lhs,
            rhs: None,
            relation: Relation::Eq,
        }
    }

    pub fn values(&self, ctx: &EvalContext) -> (Element, Element) {
        let l = ctx.eval(&self.lhs).expect("comparisons are closed");
        let r = match &self.rhs {
            Some(f) => ctx.eval(f).expect("comparisons are closed"),
            None => ctx.algebra().top(),
        };
        (l, r)
    }

    pub fn holds(&self, ctx: &EvalContext) -> bool {
        let (l, r) = self.values(ctx);
        match self.relation {
            Relation::Eq => l == r,
            Relation::Leq => ctx.algebra().leq(l, r),
        }
    }
}

/// A comparison that failed, with the values it produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub comparison: Comparison,
    pub lhs_value: Element,
    pub rhs_value: Element,
    /// The constructed witness, if the verifier built one.
    pub witness: Option<NameId>,
    /// Display names for constants, e.g. `w` for the witness.
    pub symbols: Vec<(NameId, String)>,
}

impl Failure {
    pub fn reevaluate(&self, ctx: &EvalContext) -> (Element, Element) {
        self.comparison.values(ctx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampler {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct AxiomOptions {
    /// Template depth for Separation, Collection and Induction.
    pub depth: usize,
    /// Overrides the generated unary template family.
    pub templates: Option<Vec<Formula>>,
    /// Draw outer tuples at random instead of enumerating them.
    pub sampler: Option<Sampler>,
    pub infinity_bound: usize,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        AxiomOptions {
            depth: 1,
            templates: None,
            sampler: None,
            infinity_bound: INFINITY_BOUND,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AxiomCheckResult {
    pub axiom: Axiom,
    pub verdict: Verdict,
    pub rank: usize,
    pub checks: usize,
    pub family: Option<usize>,
    pub seed: Option<u64>,
    pub failure: Option<Failure>,
    pub extra: BTreeMap<String, String>,
}

impl AxiomCheckResult {
    pub fn is_valid(&self) -> bool {
        self.verdict.is_valid()
    }

    pub fn report(&self, ctx: &EvalContext) -> Report {
        let store = ctx.store();
        let alg = ctx.algebra();
        let mut values = self.extra.clone();
        let mut witness = None;
        if let Some(f) = &self.failure {
            let c = &f.comparison;
            values.insert("lhs".into(), render(store, &f.symbols, &c.lhs));
            values.insert(
                "rhs".into(),
                c.rhs
                    .as_ref()
                    .map_or_else(|| "1".into(), |r| render(store, &f.symbols, r)),
            );
            values.insert(
                "relation".into(),
                if c.relation == Relation::Eq { "=" } else { "<=" }.into(),
            );
            values.insert("lhs_value".into(), alg.label(f.lhs_value).into());
            values.insert("rhs_value".into(), alg.label(f.rhs_value).into());
            witness = f.witness.map(|w| store.literal(w));
        }
        Report {
            axiom: self.axiom.label().into(),
            verdict: self.verdict,
            rank: self.rank,
            policy: ctx.policy().label().into(),
            checks: self.checks,
            family: self.family,
            witness,
            values: (!values.is_empty()).then_some(values),
            seed: self.seed,
            note: Some(self.axiom.note().into()),
        }
    }
}

struct Outcome {
    checks: usize,
    failure: Option<Failure>,
}

fn first_failure(
    ctx: &EvalContext,
    comparisons: Vec<Comparison>,
    witness: Option<NameId>,
    symbols: &[(NameId, String)],
) -> Outcome {
    let checks = comparisons.len();
    for c in comparisons {
        let (l, r) = c.values(ctx);
        let ok = match c.relation {
            Relation::Eq => l == r,
            Relation::Leq => ctx.algebra().leq(l, r),
        };
        if !ok {
            return Outcome {
                checks,
                failure: Some(Failure {
                    comparison: c,
                    lhs_value: l,
                    rhs_value: r,
                    witness,
                    symbols: symbols.to_vec(),
                }),
            };
        }
    }
    Outcome { checks, failure: None }
}

/// Outer tuples: the full product of `dims` in odometer order, or a seeded sample.
fn tuples(dims: &[usize], sampler: Option<Sampler>) -> Vec<Vec<usize>> {
    if dims.contains(&0) {
        return Vec::new();
    }
    match sampler {
        Some(Sampler { samples, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| dims.iter().map(|&d| rng.random_range(0..d)).collect())
                .collect()
        }
        None => {
            let total: usize = dims.iter().product();
            (0..total)
                .map(|mut code| {
                    let mut t = vec![0; dims.len()];
                    for i in (0..dims.len()).rev() {
                        t[i] = code % dims[i];
                        code /= dims[i];
                    }
                    t
                })
                .collect()
        }
    }
}

fn run<F>(dims: &[usize], sampler: Option<Sampler>, check: F) -> (usize, Option<Failure>)
where
    F: Fn(&[usize]) -> Outcome + Sync,
{
    let outcomes: Vec<Outcome> = tuples(dims, sampler).par_iter().map(|t| check(t)).collect();
    let checks = outcomes.iter().map(|o| o.checks).sum();
    (checks, outcomes.into_iter().find_map(|o| o.failure))
}

fn iff(a: Formula, b: Formula) -> Formula {
    Formula::iff(a, b)
}

fn var(v: &str) -> Term {
    Term::var(v)
}

/// Runs one axiom verifier.
pub fn check_axiom(axiom: Axiom, ctx: &EvalContext, options: &AxiomOptions) -> AxiomCheckResult {
    let store = ctx.store();
    let alg = ctx.algebra();
    let names: Vec<NameId> = ctx.universe().names().to_vec();
    let n = names.len();
    let sampler = options.sampler;
    // Sampled runs draw their templates too; the enumerated family at rank 3
    // has millions of members.
    let templates = || match (&options.templates, sampler) {
        (Some(ts), _) => ts.clone(),
        (None, Some(s)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x7e3a);
            (0..s.samples.max(1))
                .map(|_| sample_template(&mut rng, options.depth, &names))
                .collect()
        }
        (None, None) => generate_templates(options.depth, &names),
    };
    let mut family = None;
    let mut extra = BTreeMap::new();
    let (checks, failure) = match axiom {
        Axiom::Extensionality => run(&[n, n], sampler, |t| {
            let (u, v) = (names[t[0]], names[t[1]]);
            let body = |z: Term| iff(Formula::member(z.clone(), u), Formula::member(z, v));
            let mut cs = vec![Comparison::leq(
                Formula::forall("z", body(var("z"))),
                Formula::equal(u, v),
            )];
            cs.extend(
                names
                    .iter()
                    .map(|&z| Comparison::leq(Formula::equal(u, v), body(Term::Const(z)))),
            );
            first_failure(ctx, cs, None, &[(u, "u".into()), (v, "v".into())])
        }),
        Axiom::Pairing => run(&[n, n], sampler, |t| {
            let (u, v) = (names[t[0]], names[t[1]]);
            let top = alg.top();
            let w = store
                .make_name(if u == v {
                    vec![(u, top)]
                } else {
                    vec![(u, top), (v, top)]
                })
                .unwrap();
            let cs = names
                .iter()
                .map(|&z| {
                    Comparison::eq(
                        Formula::member(z, w),
                        Formula::or(Formula::equal(z, u), Formula::equal(z, v)),
                    )
                })
                .collect();
            first_failure(ctx, cs, Some(w), &[(w, "w".into())])
        }),
        Axiom::Powerset => run(&[n], sampler, |t| {
            let u = names[t[0]];
            let dom = store.domain(u);
            let k = alg.size();
            let total = k.pow(dom.len() as u32);
            let entries: Vec<(NameId, Element)> = (0..total)
                .map(|mut code| {
                    let f = store
                        .make_name(dom.iter().map(|&d| {
                            let e = alg.element(code % k);
                            code /= k;
                            (d, e)
                        }))
                        .unwrap();
                    let wf = ctx
                        .eval(&Formula::bforall("y", f, Formula::member(var("y"), u)))
                        .unwrap();
                    (f, wf)
                })
                .collect();
            let w = store.make_name(entries).unwrap();
            let cs = names
                .iter()
                .map(|&v| {
                    Comparison::eq(
                        Formula::member(v, w),
                        Formula::bforall("y", v, Formula::member(var("y"), u)),
                    )
                })
                .collect();
            first_failure(ctx, cs, Some(w), &[(w, "w".into())])
        }),
        Axiom::Union => run(&[n], sampler, |t| {
            let u = names[t[0]];
            let mut acc: BTreeMap<NameId, Element> = BTreeMap::new();
            for &(v, uv) in store.entries(u).iter() {
                for &(x, vx) in store.entries(v).iter() {
                    let e = acc.entry(x).or_insert(alg.bottom());
                    *e = alg.join(*e, alg.meet(uv, vx));
                }
            }
            let w = store.make_name(acc).unwrap();
            let cs = names
                .iter()
                .map(|&y| {
                    Comparison::eq(
                        Formula::member(y, w),
                        Formula::bexists("v", u, Formula::member(y, var("v"))),
                    )
                })
                .collect();
            first_failure(ctx, cs, Some(w), &[(w, "w".into())])
        }),
        Axiom::Separation => {
            let ts = templates();
            family = Some(ts.len());
            let univ = universal_name(store, ctx.universe());
            let mut us = names.clone();
            us.push(univ);
            run(&[ts.len(), us.len()], sampler, |t| {
                let (phi, u) = (&ts[t[0]], us[t[1]]);
                let entries: Vec<(NameId, Element)> = store
                    .domain(u)
                    .into_iter()
                    .map(|x| (x, alg.meet(ctx.membership(x, u), ctx.eval(&instance(phi, x)).unwrap())))
                    .collect();
                let w = store.make_name(entries).unwrap();
                let cs = names
                    .iter()
                    .map(|&z| {
                        Comparison::eq(
                            Formula::member(z, w),
                            Formula::and(Formula::member(z, u), instance(phi, z)),
                        )
                    })
                    .collect();
                let k = ctx.rank_bound();
                first_failure(ctx, cs, Some(w), &[(w, "w".into()), (univ, format!("univ({k})"))])
            })
        }
        Axiom::EmptySet => {
            let w = universal_name(store, ctx.universe());
            let per_element = names
                .iter()
                .filter(|&&z| {
                    let neg = ctx.eval(&Formula::not(Formula::equal(z, z))).unwrap();
                    let wz = store.make_name([(z, neg)]).unwrap();
                    Comparison::is_top(iff(Formula::member(z, wz), Formula::not(Formula::equal(z, z)))).holds(ctx)
                })
                .count();
            extra.insert("per-element witnesses".into(), format!("{per_element}/{n} hold"));
            let cs = names
                .iter()
                .map(|&z| Comparison::is_top(iff(Formula::member(z, w), Formula::not(Formula::equal(z, z)))))
                .collect();
            let k = ctx.rank_bound();
            let o = first_failure(ctx, cs, Some(w), &[(w, format!("univ({k})"))]);
            (o.checks, o.failure)
        }
        Axiom::Infinity => {
            let bound = options.infinity_bound;
            let numerals: Vec<NameId> = (0..=bound).map(|k| hat_embed(store, &HfSet::von_neumann(k))).collect();
            let omega = hat_embed(store, &HfSet::from_elements((0..=bound).map(HfSet::von_neumann)));
            let mut symbols: Vec<(NameId, String)> = numerals
                .iter()
                .enumerate()
                .map(|(k, &id)| (id, format!("hat({k})")))
                .collect();
            symbols.push((omega, "omega".into()));
            let cs = numerals
                .iter()
                .map(|&k| Comparison::is_top(Formula::member(k, omega)))
                .collect();
            extra.insert("omega".into(), format!("hat({{0, ..., {bound}}})"));
            let o = first_failure(ctx, cs, None, &symbols);
            (o.checks, o.failure)
        }
        Axiom::Collection => {
            let ts: Vec<Formula> = match sampler {
                Some(s) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x7e3b);
                    (0..s.samples.max(1))
                        .map(|_| sample_binary_template(&mut rng, options.depth, &names))
                        .collect()
                }
                None => generate_binary_templates(options.depth, &names),
            };
            family = Some(ts.len());
            let v = universal_name(store, ctx.universe());
            let k = ctx.rank_bound();
            run(&[ts.len(), n], sampler, |t| {
                let (phi, u) = (&ts[t[0]], names[t[1]]);
                let lhs = Formula::bforall("x", u, Formula::exists("y", phi.clone()));
                let rhs = Formula::bforall("x", u, Formula::bexists("y", v, phi.clone()));
                first_failure(
                    ctx,
                    vec![Comparison::eq(lhs, rhs)],
                    Some(v),
                    &[(v, format!("univ({k})"))],
                )
            })
        }
        Axiom::Induction => {
            let ts = templates();
            family = Some(ts.len());
            run(&[ts.len()], sampler, |t| {
                let phi = &ts[t[0]];
                let step = Formula::implies(Formula::bforall("y", var(X), phi.substitute(X, &var("y"))), phi.clone());
                let hypothesis = Formula::forall(X, step);
                let cs = names
                    .iter()
                    .map(|&x| Comparison::leq(hypothesis.clone(), instance(phi, x)))
                    .collect();
                first_failure(ctx, cs, None, &[])
            })
        }
    };
    let verdict = match (&failure, axiom) {
        (Some(_), _) => Verdict::Counterexample,
        (None, Axiom::Infinity) => Verdict::ValidUpToBound,
        (None, _) => Verdict::Valid,
    };
    AxiomCheckResult {
        axiom,
        verdict,
        rank: ctx.rank_bound(),
        checks,
        family,
        seed: sampler.map(|s| s.seed),
        failure,
        extra,
    }
}

/// Runs all nine verifiers.
pub fn check_all_axioms(ctx: &EvalContext, options: &AxiomOptions) -> Vec<AxiomCheckResult> {
    Axiom::ALL.iter().map(|&a| check_axiom(a, ctx, options)).collect()
}

// ---------------------------------------------------------------------------
// Mixtures and the maximum principle

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixingFailure {
    pub family: Vec<(Element, NameId)>,
    pub mixture: NameId,
    pub index: usize,
    pub equality: Element,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixingReport {
    /// Families that met the precondition and were checked.
    pub families: usize,
    /// Generated families that failed the precondition.
    pub skipped: usize,
    pub failure: Option<MixingFailure>,
}

impl MixingReport {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }
}

/// `a_i ∧ a_j ≤ ||u_i ≈ u_j||` for all `i ≠ j`.
pub fn mixing_precondition(ctx: &EvalContext, family: &[(Element, NameId)]) -> bool {
    let alg = ctx.algebra();
    family.iter().enumerate().all(|(i, &(a, u))| {
        family
            .iter()
            .enumerate()
            .all(|(j, &(b, v))| i == j || alg.leq(alg.meet(a, b), ctx.equality(u, v)))
    })
}

/// Checks `a_i ≤ ||u_i ≈ Σ a_j·u_j||` on random families until `trials`
/// of them meet the precondition.
pub fn check_mixing(ctx: &EvalContext, trials: usize, seed: u64) -> MixingReport {
    let alg = ctx.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut families = 0;
    let mut skipped = 0;
    while families < trials && skipped < trials.saturating_mul(100) {
        let size = rng.random_range(1..=3);
        let family: Vec<(Element, NameId)> = (0..size)
            .map(|_| {
                (
                    alg.element(rng.random_range(0..alg.size())),
                    ctx.universe().sample(&mut rng),
                )
            })
            .collect();
        if !mixing_precondition(ctx, &family) {
            skipped += 1;
            continue;
        }
        families += 1;
        let mix = mixture(ctx, &family).expect("non-empty family");
        for (index, &(a, u)) in family.iter().enumerate() {
            let equality = ctx.equality(u, mix);
            if !alg.leq(a, equality) {
                return MixingReport {
                    families,
                    skipped,
                    failure: Some(MixingFailure {
                        family,
                        mixture: mix,
                        index,
                        equality,
                    }),
                };
            }
        }
    }
    MixingReport {
        families,
        skipped,
        failure: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximumWitness {
    pub name: NameId,
    pub value: Element,
    /// The antichain `a_i` with the chosen `v_i`.
    pub components: Vec<(Element, NameId)>,
}

/// When `||∃x ψ(x)||_K` is top, mixes witnesses for a refined antichain of
/// the values `||ψ(u)||` into one name. `None` when the premise fails.
pub fn maximum_principle_witness(ctx: &EvalContext, template: &Formula) -> Option<MaximumWitness> {
    let alg = ctx.algebra();
    let names = ctx.universe().names();
    let values: Vec<Element> = names
        .iter()
        .map(|&u| ctx.eval(&instance(template, u)).expect("closed"))
        .collect();
    if alg.big_join(values.iter().copied()) != alg.top() {
        return None;
    }
    let antichain = alg.refine_antichain(&values);
    let components: Vec<(Element, NameId)> = antichain
        .into_iter()
        .map(|a| {
            let i = values
                .iter()
                .position(|&v| alg.leq(a, v))
                .expect("antichain elements come from the values");
            (a, names[i])
        })
        .collect();
    let name = mixture(ctx, &components).expect("non-empty antichain");
    let value = ctx.eval(&instance(template, name)).expect("closed");
    Some(MaximumWitness {
        name,
        value,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::NegationPolicy;
    use crate::fidel::builtin::{h3_star, m3};
    use crate::fidel::FidelStructure;
    use crate::names::{enumerate_universe, DEFAULT_CEILING};
    use std::sync::Arc;

    fn ctx(s: FidelStructure, policy: NegationPolicy, k: usize) -> EvalContext {
        let s = Arc::new(s);
        let store = Arc::new(NameStore::new(s.algebra().clone()));
        let uni = Arc::new(enumerate_universe(&store, k, DEFAULT_CEILING).unwrap());
        EvalContext::new(s, store, uni, policy).unwrap()
    }

    #[test]
    fn template_family_shapes() {
        let c = ctx(m3(), NegationPolicy::StandardLeibniz, 1);
        let params = c.universe().names().to_vec();
        let t0 = generate_templates(0, &params);
        assert_eq!(t0.len(), 4);
        let t1 = generate_templates(1, &params);
        assert_eq!(t1, generate_templates(1, &params));
        assert_eq!(t1.len(), 68);
        let w = c.store().empty();
        assert!(t1.contains(&Formula::not(Formula::member(w, x()))));
        assert!(t1
            .iter()
            .all(|f| f.free_vars() == vec![X.to_string()] || f.free_vars().is_empty()));
    }

    #[test]
    fn algebraic_leibniz_counterexample() {
        let c = ctx(h3_star(), NegationPolicy::AlgebraicOp, 2);
        let ts = generate_templates(1, c.universe().names());
        let ce = check_leibniz(&c, &ts).counterexample().cloned().unwrap();
        let store = c.store();
        let w = store.empty();
        assert_eq!(ce.template, Formula::not(Formula::member(w, x())));
        assert_eq!(store.literal(ce.u), "{{}: 1/2}");
        assert_eq!(store.literal(ce.v), "{{}: 1}");
        let alg = c.algebra();
        assert_eq!(
            [alg.label(ce.equality), alg.label(ce.phi_u), alg.label(ce.phi_v)],
            ["1/2", "1", "0"]
        );
    }

    #[test]
    fn negation_free_templates_satisfy_leibniz_under_any_policy() {
        let c = ctx(h3_star(), NegationPolicy::AlgebraicOp, 2);
        let ts: Vec<Formula> = generate_templates(1, c.universe().names())
            .into_iter()
            .filter(Formula::is_negation_free)
            .collect();
        assert!(check_leibniz(&c, &ts).is_valid());
    }

    #[test]
    fn pairing_and_empty_set_on_m3() {
        let c = ctx(m3(), NegationPolicy::StandardLeibniz, 2);
        let r = check_axiom(Axiom::Pairing, &c, &AxiomOptions::default());
        assert_eq!(r.verdict, Verdict::Valid);
        assert_eq!(r.checks, 16 * 4);
        let c1 = ctx(m3(), NegationPolicy::StandardLeibniz, 1);
        let r = check_axiom(Axiom::EmptySet, &c1, &AxiomOptions::default());
        assert_eq!(r.verdict, Verdict::Valid);
        let z = c1.store().empty();
        assert_eq!(
            c1.eval(&Formula::not(Formula::equal(z, z))).unwrap(),
            c1.algebra().top()
        );
    }

    #[test]
    fn failures_reevaluate_to_reported_values() {
        let c = ctx(h3_star(), NegationPolicy::AlgebraicOp, 2);
        let r = check_axiom(Axiom::EmptySet, &c, &AxiomOptions::default());
        let f = r.failure.unwrap();
        assert_eq!(f.reevaluate(&c), (f.lhs_value, f.rhs_value));
        assert!(!f.comparison.holds(&c));
    }

    #[test]
    fn axiom_names_parse() {
        for a in Axiom::ALL {
            assert_eq!(a.label().parse::<Axiom>().unwrap(), a);
        }
        assert_eq!("Empty_Set".parse::<Axiom>().unwrap(), Axiom::EmptySet);
        assert!("choice".parse::<Axiom>().is_err());
    }

    #[test]
    fn tuple_order_is_odometer() {
        assert_eq!(
            tuples(&[2, 2], None),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        let s = tuples(&[3, 5], Some(Sampler { samples: 7, seed: 1 }));
        assert_eq!(s, tuples(&[3, 5], Some(Sampler { samples: 7, seed: 1 })));
        assert!(s.iter().all(|t| t[0] < 3 && t[1] < 5));
    }

    #[test]
    fn maximum_principle_examples() {
        let c = ctx(m3(), NegationPolicy::StandardLeibniz, 2);
        let e = c.store().empty();
        let eq_empty = Formula::equal(x(), e);
        let w = maximum_principle_witness(&c, &eq_empty).unwrap();
        assert_eq!(c.equality(w.name, e), c.algebra().top());
        assert!(maximum_principle_witness(&c, &Formula::member(x(), e)).is_none());
        let w = maximum_principle_witness(&c, &Formula::member(e, x())).unwrap();
        assert_eq!(w.value, c.algebra().top());
    }

    #[test]
    fn mixing_examples() {
        let c = ctx(m3(), NegationPolicy::StandardLeibniz, 2);
        let alg = c.algebra();
        let names = c.universe().names();
        for &u in names {
            let m = mixture(&c, &[(alg.top(), u)]).unwrap();
            assert_eq!(c.equality(u, m), alg.top());
            for &v in names {
                let half = alg.element_by_label("1/2").unwrap();
                let fam = [(half, u), (alg.bottom(), v)];
                assert!(mixing_precondition(&c, &fam));
                let m = mixture(&c, &fam).unwrap();
                assert!(alg.leq(half, c.equality(u, m)));
            }
        }
        let r = check_mixing(&c, 200, 7);
        assert!(r.is_valid());
        assert_eq!(r.families, 200);
    }
}
