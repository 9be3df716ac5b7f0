#![allow(dead_code)]

use std::sync::Arc;

use fidelset_core::evaluator::{EvalContext, NegationPolicy};
use fidelset_core::fidel::FidelStructure;
use fidelset_core::lattice::{Algebra, Element};
use fidelset_core::names::{enumerate_universe, NameId, NameStore, DEFAULT_CEILING};

/// The nine axioms, with `phi` instantiated by an atom where the axiom is a schema.
pub const AXIOM_CORPUS: [&str; 9] = [
    "forall x. forall y. (forall z. z in x <-> z in y) -> x eq y",
    "forall x. forall y. exists w. forall z. z in w <-> z eq x | z eq y",
    "forall x. (forall y in x. exists z. y in z) -> (exists w. forall y in x. exists z in w. y in z)",
    "forall x. exists w. forall z. z in w <-> (forall y in z. y in x)",
    "forall x. exists w. forall z. z in w <-> z in x & ~(z in z)",
    "exists x. forall z. z in x <-> ~(z eq z)",
    "forall x. exists w. forall z. z in w <-> (exists y in x. z in y)",
    "exists x. {} in x & (forall y in x. exists s. s in x & (forall t. t in s <-> t in y | t eq y))",
    "(forall x. (forall y in x. y in {}) -> x in {}) -> (forall x. x in {})",
];

pub fn context(s: FidelStructure, policy: NegationPolicy, k: usize) -> EvalContext {
    let s = Arc::new(s);
    let store = Arc::new(NameStore::new(s.algebra().clone()));
    let uni = Arc::new(enumerate_universe(&store, k, DEFAULT_CEILING).unwrap());
    EvalContext::new(s, store, uni, policy).unwrap()
}

/// Name trees copied out of a store, so the reference below shares no code
/// with the evaluator.
#[derive(Clone, Debug)]
pub struct Tree(pub Vec<(Tree, usize)>);

pub fn tree(store: &NameStore, id: NameId) -> Tree {
    Tree(
        store
            .entries(id)
            .iter()
            .map(|&(c, v)| (tree(store, c), v.index()))
            .collect(),
    )
}

/// Direct recursion on the defining clauses over raw carrier indices.
pub struct Reference<'a> {
    alg: &'a Algebra,
}

impl<'a> Reference<'a> {
    pub fn new(alg: &'a Algebra) -> Self {
        Reference { alg }
    }

    fn e(&self, i: usize) -> Element {
        self.alg.element(i)
    }

    fn meet(&self, a: usize, b: usize) -> usize {
        (0..self.alg.size())
            .filter(|&c| self.alg.leq(self.e(c), self.e(a)) && self.alg.leq(self.e(c), self.e(b)))
            .find(|&c| {
                (0..self.alg.size()).all(|d| {
                    !(self.alg.leq(self.e(d), self.e(a)) && self.alg.leq(self.e(d), self.e(b)))
                        || self.alg.leq(self.e(d), self.e(c))
                })
            })
            .unwrap()
    }

    fn join(&self, a: usize, b: usize) -> usize {
        (0..self.alg.size())
            .filter(|&c| self.alg.leq(self.e(a), self.e(c)) && self.alg.leq(self.e(b), self.e(c)))
            .find(|&c| {
                (0..self.alg.size()).all(|d| {
                    !(self.alg.leq(self.e(a), self.e(d)) && self.alg.leq(self.e(b), self.e(d)))
                        || self.alg.leq(self.e(c), self.e(d))
                })
            })
            .unwrap()
    }

    /// Largest `c` with `a ∧ c ≤ b`.
    fn imp(&self, a: usize, b: usize) -> usize {
        let ok: Vec<usize> = (0..self.alg.size())
            .filter(|&c| self.alg.leq(self.e(self.meet(a, c)), self.e(b)))
            .collect();
        *ok.iter()
            .find(|&&c| ok.iter().all(|&d| self.alg.leq(self.e(d), self.e(c))))
            .unwrap()
    }

    fn bottom(&self) -> usize {
        (0..self.alg.size())
            .find(|&c| (0..self.alg.size()).all(|d| self.alg.leq(self.e(c), self.e(d))))
            .unwrap()
    }

    fn top(&self) -> usize {
        (0..self.alg.size())
            .find(|&c| (0..self.alg.size()).all(|d| self.alg.leq(self.e(d), self.e(c))))
            .unwrap()
    }

    pub fn member(&self, u: &Tree, v: &Tree) -> Element {
        self.e(self.mem(u, v))
    }

    pub fn equal(&self, u: &Tree, v: &Tree) -> Element {
        self.e(self.eq(u, v))
    }

    fn mem(&self, u: &Tree, v: &Tree) -> usize {
        v.0.iter().fold(self.bottom(), |acc, (x, vx)| {
            self.join(acc, self.meet(*vx, self.eq(x, u)))
        })
    }

    fn eq(&self, u: &Tree, v: &Tree) -> usize {
        let left =
            u.0.iter()
                .fold(self.top(), |acc, (x, ux)| self.meet(acc, self.imp(*ux, self.mem(x, v))));
        let right =
            v.0.iter()
                .fold(self.top(), |acc, (x, vx)| self.meet(acc, self.imp(*vx, self.mem(x, u))));
        self.meet(left, right)
    }
}
