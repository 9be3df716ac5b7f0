//! Truth values `||φ||` of closed formulas.
//!
//! Membership and equality are computed by mutual recursion on the names'
//! domains and cached per `(relation, u, v)`. Unbounded quantifiers range over
//! the materialised universe `V_≤K`; they are exact only when every witness
//! lives there, so `∃` under-approximates and `∀` over-approximates the value
//! over the whole class. Bounded quantifiers range over `dom(u)` and are exact.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use dashmap::DashMap;
use parking_lot::Mutex;
use thiserror::Error;

use crate::fidel::FidelStructure;
use crate::formula::{Formula, Term};
use crate::lattice::{Algebra, Element};
use crate::names::{NameId, NameStore, Universe};

/// How `||¬φ||` is assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NegationPolicy {
    /// Odd runs of leading negations evaluate to 1, even runs cancel.
    StandardLeibniz,
    /// The algebra's own unary negation table.
    AlgebraicOp,
}

impl NegationPolicy {
    pub fn label(self) -> &'static str {
        match self {
            NegationPolicy::StandardLeibniz => "standard",
            NegationPolicy::AlgebraicOp => "algebraic",
        }
    }
}

impl fmt::Display for NegationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NegationPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" | "leibniz" => Ok(NegationPolicy::StandardLeibniz),
            "algebraic" | "op" => Ok(NegationPolicy::AlgebraicOp),
            other => Err(format!("unknown policy `{other}` (expected standard or algebraic)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("policy {policy} is not admissible: {reason}")]
    PolicyInadmissible { policy: NegationPolicy, reason: String },
    #[error("structure violates the Fidel conditions and cannot be evaluated")]
    InvalidStructure,
    #[error("name store and structure use different algebras")]
    ForeignStore,
    #[error("variable `{0}` is not bound")]
    Scope(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Relation {
    Member,
    Equal,
}

/// A negation value that falls outside `N_{||α||}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintViolation {
    pub body_value: Element,
    pub negation_value: Element,
    pub formula: Formula,
}

/// Quantifier kinds for [`EvalContext::bounded_quantifier`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Forall,
    Exists,
}

type Env = Vec<(String, NameId)>;

/// Everything needed to evaluate formulas over one structure at one rank bound.
pub struct EvalContext {
    structure: Arc<FidelStructure>,
    store: Arc<NameStore>,
    universe: Arc<Universe>,
    policy: NegationPolicy,
    memo: DashMap<(Relation, NameId, NameId), Element>,
    violations: Mutex<Vec<ConstraintViolation>>,
}

impl fmt::Debug for EvalContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvalContext")
            .field("policy", &self.policy)
            .field("rank", &self.universe.bound())
            .field("memo", &self.memo.len())
            .finish()
    }
}

impl EvalContext {
    pub fn new(
        structure: Arc<FidelStructure>,
        store: Arc<NameStore>,
        universe: Arc<Universe>,
        policy: NegationPolicy,
    ) -> Result<Self, EvalError> {
        if store.algebra().tag() != structure.algebra().tag() {
            return Err(EvalError::ForeignStore);
        }
        if !structure.is_valid() {
            return Err(EvalError::InvalidStructure);
        }
        match policy {
            NegationPolicy::StandardLeibniz if !structure.admits_standard_policy() => {
                return Err(EvalError::PolicyInadmissible {
                    policy,
                    reason: "needs 1 in every N_x and N_1 equal to the carrier".into(),
                })
            }
            NegationPolicy::AlgebraicOp if !structure.algebra().has_neg_op() => {
                return Err(EvalError::PolicyInadmissible {
                    policy,
                    reason: "the algebra has no negation table".into(),
                })
            }
            _ => {}
        }
        Ok(EvalContext {
            structure,
            store,
            universe,
            policy,
            memo: DashMap::new(),
            violations: Mutex::new(Vec::new()),
        })
    }

    pub fn structure(&self) -> &Arc<FidelStructure> {
        &self.structure
    }

    pub fn algebra(&self) -> &Algebra {
        self.structure.algebra()
    }

    pub fn store(&self) -> &Arc<NameStore> {
        &self.store
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn rank_bound(&self) -> usize {
        self.universe.bound()
    }

    pub fn policy(&self) -> NegationPolicy {
        self.policy
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear_memo(&self) {
        self.memo.clear();
    }

    /// Negation values that left `N_{||α||}`, in the order they were met.
    pub fn constraint_violations(&self) -> Vec<ConstraintViolation> {
        self.violations.lock().clone()
    }

    /// `||u ∈ v|| = ⋁_{x ∈ dom(v)} (v(x) ∧ ||x ≈ u||)`.
    pub fn membership(&self, u: NameId, v: NameId) -> Element {
        let key = (Relation::Member, u, v);
        if let Some(hit) = self.memo.get(&key) {
            return *hit;
        }
        let alg = self.algebra();
        let top = alg.top();
        let mut acc = alg.bottom();
        for &(x, vx) in self.store.entries(v).iter() {
            if acc == top {
                break;
            }
            acc = alg.join(acc, alg.meet(vx, self.equality(x, u)));
        }
        self.memo.insert(key, acc);
        acc
    }

    /// `||u ≈ v|| = ⋀_{x ∈ dom(u)} (u(x) → ||x ∈ v||) ∧ ⋀_{x ∈ dom(v)} (v(x) → ||x ∈ u||)`.
    pub fn equality(&self, u: NameId, v: NameId) -> Element {
        let key = (Relation::Equal, u, v);
        if let Some(hit) = self.memo.get(&key) {
            return *hit;
        }
        let alg = self.algebra();
        let bottom = alg.bottom();
        let mut acc = alg.top();
        for (a, b) in [(u, v), (v, u)] {
            for &(x, ax) in self.store.entries(a).iter() {
                if acc == bottom {
                    break;
                }
                acc = alg.meet(acc, alg.imp(ax, self.membership(x, b)));
            }
        }
        self.memo.insert(key, acc);
        acc
    }

    /// Evaluates a closed formula.
    pub fn eval(&self, f: &Formula) -> Result<Element, EvalError> {
        self.eval_env(f, &mut Vec::new())
    }

    /// Evaluates `f` with `var` bound to `name`; other variables must be bound inside `f`.
    pub fn eval_with(&self, f: &Formula, var: &str, name: NameId) -> Result<Element, EvalError> {
        self.eval_env(f, &mut vec![(var.to_string(), name)])
    }

    pub fn eval_bindings(&self, f: &Formula, bindings: &[(&str, NameId)]) -> Result<Element, EvalError> {
        let mut env: Env = bindings.iter().map(|(v, n)| (v.to_string(), *n)).collect();
        self.eval_env(f, &mut env)
    }

    fn term(&self, t: &Term, env: &Env) -> Result<NameId, EvalError> {
        match t {
            Term::Const(id) => Ok(*id),
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, id)| *id)
                .ok_or_else(|| EvalError::Scope(v.clone())),
        }
    }

    fn eval_env(&self, f: &Formula, env: &mut Env) -> Result<Element, EvalError> {
        let alg = self.algebra();
        Ok(match f {
            Formula::Member(a, b) => self.membership(self.term(a, env)?, self.term(b, env)?),
            Formula::Equal(a, b) => self.equality(self.term(a, env)?, self.term(b, env)?),
            Formula::And(a, b) => alg.meet(self.eval_env(a, env)?, self.eval_env(b, env)?),
            Formula::Or(a, b) => alg.join(self.eval_env(a, env)?, self.eval_env(b, env)?),
            Formula::Implies(a, b) => alg.imp(self.eval_env(a, env)?, self.eval_env(b, env)?),
            Formula::Not(_) => self.negation_env(f, env)?,
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let exists = matches!(f, Formula::Exists(..));
                let (unit, stop) = if exists {
                    (alg.bottom(), alg.top())
                } else {
                    (alg.top(), alg.bottom())
                };
                let mut acc = unit;
                for &u in self.universe.names() {
                    env.push((x.clone(), u));
                    let value = self.eval_env(body, env);
                    env.pop();
                    let value = value?;
                    acc = if exists {
                        alg.join(acc, value)
                    } else {
                        alg.meet(acc, value)
                    };
                    if acc == stop {
                        break;
                    }
                }
                acc
            }
            Formula::BForall(x, t, body) => self.bounded_env(Quantifier::Forall, self.term(t, env)?, x, body, env)?,
            Formula::BExists(x, t, body) => self.bounded_env(Quantifier::Exists, self.term(t, env)?, x, body, env)?,
        })
    }

    /// Value of a negation-rooted formula under the context's policy.
    pub fn negation_value(&self, f: &Formula) -> Result<Element, EvalError> {
        self.negation_env(f, &mut Vec::new())
    }

    fn negation_env(&self, f: &Formula, env: &mut Env) -> Result<Element, EvalError> {
        let Formula::Not(body) = f else {
            return self.eval_env(f, env);
        };
        let alg = self.algebra();
        let (value, body_value) = match self.policy {
            NegationPolicy::StandardLeibniz => {
                let (count, core) = f.strip_negations();
                // The body of f is a run of count-1 negations over core.
                let core_value = self.eval_env(core, env)?;
                let value = if count % 2 == 1 { alg.top() } else { core_value };
                let body_value = if count % 2 == 1 { core_value } else { alg.top() };
                (value, body_value)
            }
            NegationPolicy::AlgebraicOp => {
                let b = self.eval_env(body, env)?;
                (alg.neg_op(b).expect("checked at construction"), b)
            }
        };
        if !self.structure.negations(body_value).contains(value) {
            self.violations.lock().push(ConstraintViolation {
                body_value,
                negation_value: value,
                formula: f.clone(),
            });
        }
        Ok(value)
    }

    /// `∃x∈u φ = ⋁_{x ∈ dom(u)} (u(x) ∧ ||φ(x)||)`, `∀x∈u φ = ⋀_{x ∈ dom(u)} (u(x) → ||φ(x)||)`.
    pub fn bounded_quantifier(
        &self,
        kind: Quantifier,
        u: NameId,
        var: &str,
        body: &Formula,
    ) -> Result<Element, EvalError> {
        self.bounded_env(kind, u, var, body, &mut Vec::new())
    }

    fn bounded_env(
        &self,
        kind: Quantifier,
        u: NameId,
        var: &str,
        body: &Formula,
        env: &mut Env,
    ) -> Result<Element, EvalError> {
        let alg = self.algebra();
        let mut acc = match kind {
            Quantifier::Exists => alg.bottom(),
            Quantifier::Forall => alg.top(),
        };
        for &(x, ux) in self.store.entries(u).iter() {
            env.push((var.to_string(), x));
            let value = self.eval_env(body, env);
            env.pop();
            let value = value?;
            acc = match kind {
                Quantifier::Exists => alg.join(acc, alg.meet(ux, value)),
                Quantifier::Forall => alg.meet(acc, alg.imp(ux, value)),
            };
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidel::builtin::{h3_star, m3};
    use crate::names::{enumerate_universe, DEFAULT_CEILING};

    struct Fixture {
        ctx: EvalContext,
        w: NameId,
        u: NameId,
        v: NameId,
    }

    fn fixture(structure: FidelStructure, policy: NegationPolicy, rank: usize) -> Fixture {
        let structure = Arc::new(structure);
        let store = Arc::new(NameStore::new(structure.algebra().clone()));
        let universe = Arc::new(enumerate_universe(&store, rank, DEFAULT_CEILING).unwrap());
        let alg = structure.algebra().clone();
        let w = store.empty();
        let u = store.make_name([(w, alg.element_by_label("1/2").unwrap())]).unwrap();
        let v = store.make_name([(w, alg.top())]).unwrap();
        let ctx = EvalContext::new(structure, store, universe, policy).unwrap();
        Fixture { ctx, w, u, v }
    }

    fn label(ctx: &EvalContext, e: Element) -> &str {
        ctx.algebra().label(e)
    }

    fn psi(w: NameId) -> Formula {
        Formula::member(w, Term::var("x"))
    }

    #[test]
    fn golden_values_under_algebraic_negation() {
        let Fixture { ctx, w, u, v } = fixture(h3_star(), NegationPolicy::AlgebraicOp, 2);
        assert_eq!(label(&ctx, ctx.equality(u, v)), "1/2");
        assert_eq!(label(&ctx, ctx.eval_with(&psi(w), "x", u).unwrap()), "1/2");
        assert_eq!(label(&ctx, ctx.eval_with(&psi(w), "x", v).unwrap()), "1");
        let neg = Formula::not(psi(w));
        assert_eq!(label(&ctx, ctx.eval_with(&neg, "x", u).unwrap()), "1");
        assert_eq!(label(&ctx, ctx.eval_with(&neg, "x", v).unwrap()), "0");
        assert!(ctx.constraint_violations().is_empty());
    }

    #[test]
    fn standard_policy_negation_runs() {
        let Fixture { ctx, w, u, v } = fixture(m3(), NegationPolicy::StandardLeibniz, 2);
        let top = ctx.algebra().top();
        let neg = |k: usize| (0..k).fold(psi(w), |f, _| Formula::not(f));
        for name in [u, v] {
            assert_eq!(ctx.eval_with(&neg(1), "x", name).unwrap(), top);
            assert_eq!(ctx.eval_with(&neg(3), "x", name).unwrap(), top);
            let plain = ctx.eval_with(&psi(w), "x", name).unwrap();
            assert_eq!(ctx.eval_with(&neg(2), "x", name).unwrap(), plain);
            assert_eq!(ctx.eval_with(&neg(4), "x", name).unwrap(), plain);
        }
        assert!(ctx.constraint_violations().is_empty());
        let closed = Formula::not(Formula::member(w, u));
        assert_eq!(ctx.negation_value(&closed).unwrap(), top);
    }

    #[test]
    fn reflexivity_and_empty_membership() {
        let Fixture { ctx, .. } = fixture(m3(), NegationPolicy::StandardLeibniz, 3);
        let empty = ctx.store().empty();
        for &x in ctx.universe().names() {
            assert_eq!(ctx.equality(x, x), ctx.algebra().top());
            assert_eq!(ctx.membership(x, empty), ctx.algebra().bottom());
        }
    }

    #[test]
    fn quantifiers() {
        let Fixture { ctx, w, u, v } = fixture(m3(), NegationPolicy::StandardLeibniz, 2);
        let refl = Formula::equal(u, u);
        assert_eq!(
            ctx.eval(&Formula::implies(refl.clone(), refl)).unwrap(),
            ctx.algebra().top()
        );
        let f = Formula::exists("x", Formula::equal(Term::var("x"), w));
        assert_eq!(ctx.eval(&f).unwrap(), ctx.algebra().top());

        let empty_exists = ctx.bounded_quantifier(
            Quantifier::Exists,
            w,
            "y",
            &Formula::equal(Term::var("y"), Term::var("y")),
        );
        assert_eq!(empty_exists.unwrap(), ctx.algebra().bottom());
        let empty_forall = ctx.bounded_quantifier(
            Quantifier::Forall,
            w,
            "y",
            &Formula::member(Term::var("y"), Term::var("y")),
        );
        assert_eq!(empty_forall.unwrap(), ctx.algebra().top());

        // ∀y∈v (y ∈ u) = 1 → ||∅ ∈ u|| = 1/2
        let sub = Formula::bforall("y", v, Formula::member(Term::var("y"), u));
        assert_eq!(label(&ctx, ctx.eval(&sub).unwrap()), "1/2");
    }

    #[test]
    fn unbound_variable_is_a_scope_error() {
        let Fixture { ctx, .. } = fixture(m3(), NegationPolicy::StandardLeibniz, 1);
        let f = Formula::member(Term::var("q"), Term::var("q"));
        assert_eq!(ctx.eval(&f), Err(EvalError::Scope("q".into())));
    }

    #[test]
    fn inadmissible_policies() {
        let s = Arc::new(m3());
        let store = Arc::new(NameStore::new(s.algebra().clone()));
        let uni = Arc::new(enumerate_universe(&store, 1, DEFAULT_CEILING).unwrap());
        let err = EvalContext::new(s.clone(), store.clone(), uni.clone(), NegationPolicy::AlgebraicOp).unwrap_err();
        assert!(matches!(err, EvalError::PolicyInadmissible { .. }));

        let alg = s.algebra().clone();
        let bad = FidelStructure::from_labels(alg, &[("0", &["1"]), ("1/2", &["1"]), ("1", &["1"])]).unwrap();
        let err = EvalContext::new(Arc::new(bad), store, uni, NegationPolicy::StandardLeibniz).unwrap_err();
        assert_eq!(err, EvalError::InvalidStructure);
    }

    #[test]
    fn algebraic_values_outside_the_family_are_flagged() {
        use crate::lattice::builtin::chain;
        let mut tables = chain(3).to_tables();
        tables.neg_op = Some(vec![2, 1, 0]);
        let alg = Arc::new(Algebra::from_tables(tables).unwrap());
        let s = FidelStructure::saturate(alg.clone());
        let store = Arc::new(NameStore::new(alg.clone()));
        let uni = Arc::new(enumerate_universe(&store, 2, DEFAULT_CEILING).unwrap());
        let ctx = EvalContext::new(Arc::new(s), store.clone(), uni, NegationPolicy::AlgebraicOp).unwrap();
        let w = store.empty();
        let half = alg.element_by_label("1/2").unwrap();
        let u = store.make_name([(w, half)]).unwrap();
        ctx.eval(&Formula::not(Formula::member(w, w))).unwrap();
        assert!(ctx.constraint_violations().is_empty());
        let f = Formula::not(Formula::member(w, u));
        assert_eq!(ctx.eval(&f).unwrap(), half);
        let flagged = ctx.constraint_violations();
        assert_eq!(flagged.len(), 1);
        assert_eq!((flagged[0].body_value, flagged[0].negation_value), (half, half));
    }

    #[test]
    fn memo_state_does_not_change_results() {
        let Fixture { ctx, .. } = fixture(m3(), NegationPolicy::StandardLeibniz, 3);
        let names: Vec<NameId> = ctx.universe().names().iter().copied().step_by(7).collect();
        let warm: Vec<Element> = names
            .iter()
            .flat_map(|&a| names.iter().map(move |&b| (a, b)))
            .map(|(a, b)| ctx.equality(a, b))
            .collect();
        ctx.clear_memo();
        let cold: Vec<Element> = names
            .iter()
            .rev()
            .flat_map(|&a| names.iter().rev().map(move |&b| (a, b)))
            .map(|(a, b)| ctx.equality(a, b))
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        assert_eq!(warm, cold);
    }
}
