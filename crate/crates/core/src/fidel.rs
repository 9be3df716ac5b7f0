//! Fidel structures: an algebra together with a family `N_x` of admissible
//! negation values for each element.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{is_subalgebra, Algebra, Element, ElementSet, Embedding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FidelError {
    #[error("negation family has {found} sets for a carrier of {expected}")]
    WrongFamilySize { expected: usize, found: usize },
    #[error("N_{element} references element index {index} outside the carrier")]
    UnknownElement { element: String, index: usize },
    #[error("unknown element label `{0}`")]
    UnknownLabel(String),
}

/// Which clause of the structure definition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Some `x' ∈ N_x` has `x ∨ x' = 1`.
    CoversTop,
    /// Every `x' ∈ N_x` has some `x'' ∈ N_{x'}` with `x'' ≤ x`.
    DoubleNegationBelow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureViolation {
    pub condition: Condition,
    pub x: Element,
    /// The offending `x'` for [`Condition::DoubleNegationBelow`].
    pub x_prime: Option<Element>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructureReport {
    pub violations: Vec<StructureViolation>,
}

impl StructureReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self, alg: &Algebra) -> String {
        let mut out = String::new();
        for v in &self.violations {
            match v.condition {
                Condition::CoversTop => out.push_str(&format!(
                    "  condition (i) fails at x={}: no x' in N_x with x | x' = 1\n",
                    alg.label(v.x)
                )),
                Condition::DoubleNegationBelow => out.push_str(&format!(
                    "  condition (ii) fails at (x={}, x'={}): no x'' in N_x' below x\n",
                    alg.label(v.x),
                    alg.label(v.x_prime.unwrap())
                )),
            }
        }
        out
    }
}

/// A Fidel structure. May be loaded in an invalid state for inspection; the
/// evaluator only accepts structures whose report is empty.
#[derive(Clone, Debug)]
pub struct FidelStructure {
    algebra: Arc<Algebra>,
    family: Vec<ElementSet>,
}

impl FidelStructure {
    pub fn new(algebra: Arc<Algebra>, family: Vec<ElementSet>) -> Result<Self, FidelError> {
        let n = algebra.size();
        if family.len() != n {
            return Err(FidelError::WrongFamilySize {
                expected: n,
                found: family.len(),
            });
        }
        for (x, set) in family.iter().enumerate() {
            if let Some(index) = set.indices().find(|&i| i >= n) {
                return Err(FidelError::UnknownElement {
                    element: algebra.labels()[x].clone(),
                    index,
                });
            }
        }
        Ok(FidelStructure { algebra, family })
    }

    /// Builds the family from `(x, N_x)` label lists. Unlisted elements get `N_x = ∅`.
    pub fn from_labels(algebra: Arc<Algebra>, family: &[(&str, &[&str])]) -> Result<Self, FidelError> {
        let lookup = |l: &str| {
            algebra
                .element_by_label(l)
                .ok_or_else(|| FidelError::UnknownLabel(l.to_string()))
        };
        let mut sets = vec![ElementSet::empty(); algebra.size()];
        for (x, ys) in family {
            let x = lookup(x)?;
            for y in ys.iter() {
                sets[x.index()].insert(lookup(y)?);
            }
        }
        FidelStructure::new(algebra.clone(), sets)
    }

    /// The saturated structure `N_x = {y : x ∨ y = 1}`.
    pub fn saturate(algebra: Arc<Algebra>) -> Self {
        let top = algebra.top();
        let family = algebra
            .elements()
            .map(|x| {
                ElementSet::from_indices(
                    algebra
                        .elements()
                        .filter(|&y| algebra.join(x, y) == top)
                        .map(Element::index),
                )
            })
            .collect();
        FidelStructure { algebra, family }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn negations(&self, x: Element) -> ElementSet {
        assert!(self.algebra.owns(x), "element from a different algebra");
        self.family[x.index()]
    }

    pub fn family(&self) -> &[ElementSet] {
        &self.family
    }

    pub fn validate(&self) -> StructureReport {
        let alg = &self.algebra;
        let mut violations = Vec::new();
        for x in alg.elements() {
            let nx = self.negations(x);
            if !alg.set_of(nx).into_iter().any(|y| alg.join(x, y) == alg.top()) {
                violations.push(StructureViolation {
                    condition: Condition::CoversTop,
                    x,
                    x_prime: None,
                });
            }
            for xp in alg.set_of(nx) {
                if !alg.set_of(self.negations(xp)).into_iter().any(|xpp| alg.leq(xpp, x)) {
                    violations.push(StructureViolation {
                        condition: Condition::DoubleNegationBelow,
                        x,
                        x_prime: Some(xp),
                    });
                }
            }
        }
        StructureReport { violations }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `1 ∈ N_x` for every x, and `N_1` is the whole carrier.
    pub fn admits_standard_policy(&self) -> bool {
        let alg = &self.algebra;
        let top = alg.top();
        alg.elements().all(|x| self.negations(x).contains(top)) && self.negations(top) == alg.carrier_set()
    }

    /// Algebra half via [`is_subalgebra`]; family half by elementwise inclusion.
    pub fn is_substructure_of(&self, sup: &FidelStructure, embedding: &Embedding) -> bool {
        if !is_subalgebra(&self.algebra, &sup.algebra, embedding) {
            return false;
        }
        self.algebra.elements().all(|x| {
            let target = sup.negations(embedding.apply(x));
            self.algebra
                .set_of(self.negations(x))
                .into_iter()
                .all(|y| target.contains(embedding.apply(y)))
        })
    }
}

impl fmt::Display for FidelStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alg = &self.algebra;
        for x in alg.elements() {
            let ys: Vec<&str> = alg
                .set_of(self.negations(x))
                .into_iter()
                .map(|y| alg.label(y))
                .collect();
            writeln!(f, "N_{} = {{{}}}", alg.label(x), ys.join(", "))?;
        }
        Ok(())
    }
}

/// Built-in structures.
pub mod builtin {
    use super::*;
    use crate::lattice::builtin as alg;

    /// The saturated structure over the three-element chain.
    pub fn m3() -> FidelStructure {
        FidelStructure::saturate(Arc::new(alg::chain(3)))
    }

    /// Saturated three-element chain carrying the dual pseudo-complement.
    pub fn h3_star() -> FidelStructure {
        FidelStructure::saturate(Arc::new(alg::h3_star()))
    }

    pub fn saturated_chain(n: usize) -> FidelStructure {
        FidelStructure::saturate(Arc::new(alg::chain(n)))
    }

    /// Two-element Boolean algebra with `N_x = {¬x}`.
    pub fn classical2() -> FidelStructure {
        FidelStructure::from_labels(Arc::new(alg::boolean2()), &[("0", &["1"]), ("1", &["0"])]).unwrap()
    }

    pub fn by_name(name: &str) -> Option<FidelStructure> {
        Some(match name {
            "m3" => m3(),
            "h3star" | "h3_star" => h3_star(),
            "chain2" | "boolean2" => saturated_chain(2),
            "chain4" => saturated_chain(4),
            "boolean4" => FidelStructure::saturate(Arc::new(alg::boolean4())),
            "classical2" => classical2(),
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;
    use crate::lattice::builtin::{boolean2, boolean4, chain};

    fn labels(s: &FidelStructure, x: &str) -> Vec<String> {
        let alg = s.algebra();
        alg.set_of(s.negations(alg.element_by_label(x).unwrap()))
            .into_iter()
            .map(|y| alg.label(y).to_string())
            .collect()
    }

    #[test]
    fn saturated_three_chain_is_m3() {
        let m = m3();
        assert_eq!(labels(&m, "0"), ["1"]);
        assert_eq!(labels(&m, "1/2"), ["1"]);
        assert_eq!(labels(&m, "1"), ["0", "1/2", "1"]);
        assert!(m.is_valid());
        assert!(m.admits_standard_policy());
    }

    #[test]
    fn saturated_one_element() {
        let s = FidelStructure::saturate(Arc::new(chain(1)));
        assert_eq!(labels(&s, "1"), ["1"]);
        assert!(s.is_valid());
    }

    #[test]
    fn saturated_boolean4_atom() {
        let s = FidelStructure::saturate(Arc::new(boolean4()));
        assert_eq!(labels(&s, "p"), ["q", "1"]);
    }

    #[test]
    fn condition_one_violation() {
        let alg = Arc::new(chain(3));
        let s = FidelStructure::from_labels(
            alg.clone(),
            &[("0", &["1"]), ("1/2", &["1/2"]), ("1", &["0", "1/2", "1"])],
        )
        .unwrap();
        let report = s.validate();
        let half = alg.element_by_label("1/2").unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.condition == Condition::CoversTop && v.x == half));
    }

    #[test]
    fn condition_two_violation() {
        let alg = Arc::new(chain(3));
        let s = FidelStructure::from_labels(alg.clone(), &[("0", &["1"]), ("1/2", &["1"]), ("1", &["1"])]).unwrap();
        let report = s.validate();
        let zero = alg.element_by_label("0").unwrap();
        assert!(report.violations.contains(&StructureViolation {
            condition: Condition::DoubleNegationBelow,
            x: zero,
            x_prime: Some(alg.top()),
        }));
        assert!(!report.render(&alg).is_empty());
    }

    #[test]
    fn unknown_element_is_rejected() {
        let alg = Arc::new(chain(2));
        let err = FidelStructure::new(alg, vec![ElementSet::from_indices([1]), ElementSet::from_indices([5])]);
        assert!(matches!(err, Err(FidelError::UnknownElement { index: 5, .. })));
    }

    #[test]
    fn substructures() {
        let m = m3();
        assert!(m.is_substructure_of(&m, &Embedding::identity(m.algebra())));
        let two = Arc::new(boolean2());
        let small = FidelStructure::from_labels(two.clone(), &[("0", &["1"]), ("1", &["0"])]).unwrap();
        let emb = Embedding::by_labels(&two, m.algebra(), &[("0", "0"), ("1", "1")]).unwrap();
        assert!(small.is_substructure_of(&m, &emb));
        let sat = FidelStructure::saturate(two.clone());
        assert!(small.is_substructure_of(&sat, &Embedding::identity(&two)));
    }

    #[test]
    fn standard_policy_admissibility() {
        assert!(saturated_chain(4).admits_standard_policy());
        let two = Arc::new(boolean2());
        let s = FidelStructure::from_labels(two, &[("0", &["1"]), ("1", &["1"])]).unwrap();
        assert!(!s.admits_standard_policy());
        assert!(!classical2().admits_standard_policy());
    }
}
