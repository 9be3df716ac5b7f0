//! Names: the elements of the algebra-valued universe.
//!
//! A name is a finite function from previously built names into the algebra.
//! Names are hash-consed in a [`NameStore`], so structurally equal functions
//! share one [`NameId`] and evaluator caches can be keyed by id.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use rand::Rng;
use thiserror::Error;

use crate::evaluator::EvalContext;
use crate::lattice::{Algebra, Element, Embedding};

/// Default ceiling on the number of names a universe may materialise.
pub const DEFAULT_CEILING: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NameId(u32);

impl NameId {
    pub fn raw(self) -> u32 {
        self.0
    }

    pub fn from_raw(raw: u32) -> Self {
        NameId(raw)
    }
}

pub type Entries = Arc<[(NameId, Element)]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error("entry value belongs to a different algebra")]
    MixedAlgebras,
    #[error("name #{0} is not in this store")]
    UnknownName(u32),
    #[error("child #{0} appears twice in one name")]
    DuplicateEntry(u32),
    #[error("V_<={rank} would hold {projected} names, above the ceiling of {ceiling}")]
    UniverseTooLarge {
        rank: usize,
        projected: String,
        ceiling: u128,
    },
    #[error("a mixture needs at least one component")]
    EmptyMixture,
}

struct NameData {
    entries: Entries,
    rank: u32,
}

#[derive(Default)]
struct Inner {
    names: Vec<NameData>,
    index: HashMap<Entries, NameId>,
}

/// Interning registry for names over one algebra.
pub struct NameStore {
    algebra: Arc<Algebra>,
    inner: RwLock<Inner>,
}

impl fmt::Debug for NameStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NameStore").field("names", &self.len()).finish()
    }
}

impl NameStore {
    pub fn new(algebra: Arc<Algebra>) -> Self {
        NameStore {
            algebra,
            inner: RwLock::new(Inner::default()),
        }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.inner.read().names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Interns the function `child ↦ value`. Entry order does not matter.
    pub fn make_name<I: IntoIterator<Item = (NameId, Element)>>(&self, entries: I) -> Result<NameId, NameError> {
        let mut entries: Vec<(NameId, Element)> = entries.into_iter().collect();
        if entries.iter().any(|(_, e)| !self.algebra.owns(*e)) {
            return Err(NameError::MixedAlgebras);
        }
        entries.sort_by_key(|(c, _)| *c);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(NameError::DuplicateEntry(w[0].0 .0));
        }
        if let Some(id) = self.inner.read().index.get(entries.as_slice()) {
            return Ok(*id);
        }
        let mut inner = self.inner.write();
        if let Some(id) = inner.index.get(entries.as_slice()) {
            return Ok(*id);
        }
        let mut rank = 1;
        for (child, _) in &entries {
            let data = inner
                .names
                .get(child.0 as usize)
                .ok_or(NameError::UnknownName(child.0))?;
            rank = rank.max(data.rank + 1);
        }
        let id = NameId(inner.names.len() as u32);
        let entries: Entries = entries.into();
        inner.names.push(NameData {
            entries: entries.clone(),
            rank,
        });
        inner.index.insert(entries, id);
        Ok(id)
    }

    /// The empty name, rank 1.
    pub fn empty(&self) -> NameId {
        self.make_name([]).expect("empty name is always valid")
    }

    /// Entries sorted by child id.
    pub fn entries(&self, id: NameId) -> Entries {
        self.inner.read().names[id.0 as usize].entries.clone()
    }

    pub fn rank(&self, id: NameId) -> usize {
        self.inner.read().names[id.0 as usize].rank as usize
    }

    pub fn contains(&self, id: NameId) -> bool {
        (id.0 as usize) < self.len()
    }

    /// `u(x)` when `x ∈ dom(u)`.
    pub fn value(&self, u: NameId, x: NameId) -> Option<Element> {
        let entries = self.entries(u);
        entries.binary_search_by_key(&x, |(c, _)| *c).ok().map(|i| entries[i].1)
    }

    pub fn domain(&self, u: NameId) -> Vec<NameId> {
        self.entries(u).iter().map(|(c, _)| *c).collect()
    }

    /// Nested-literal rendering: `{}`, `{{}: 1/2}`. Children are listed by
    /// rank, then by their own literal, so the text does not depend on ids.
    pub fn literal(&self, id: NameId) -> String {
        let entries = self.entries(id);
        if entries.is_empty() {
            return "{}".into();
        }
        let mut keyed: Vec<(usize, String, Element)> = entries
            .iter()
            .map(|&(c, v)| (self.rank(c), self.literal(c), v))
            .collect();
        keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        let parts: Vec<String> = keyed
            .into_iter()
            .map(|(_, lit, v)| format!("{}: {}", lit, self.algebra.label(v)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// `|V_≤k|` over an algebra with `algebra_size` elements; `None` on overflow.
pub fn projected_size(algebra_size: usize, k: usize) -> Option<u128> {
    let mut count: u128 = 0;
    for level in 1..=k {
        count = if level == 1 {
            1
        } else {
            let exp = u32::try_from(count).ok()?;
            (algebra_size as u128 + 1).checked_pow(exp)?
        };
    }
    Some(count)
}

/// The names of rank ≤ K, materialised level by level.
#[derive(Clone, Debug)]
pub struct Universe {
    levels: Vec<Vec<NameId>>,
}

impl Universe {
    pub fn bound(&self) -> usize {
        self.levels.len()
    }

    /// All of `V_≤K`, in canonical order.
    pub fn names(&self) -> &[NameId] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// `V_≤k` for `1 ≤ k ≤ K`.
    pub fn level(&self, k: usize) -> &[NameId] {
        &self.levels[k - 1]
    }

    /// `|V_≤k|` for `k = 1..=K`.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Number of names of rank exactly `k` for `k = 1..=K`.
    pub fn rank_counts(&self) -> Vec<usize> {
        let counts = self.counts();
        counts
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { *c } else { c - counts[i - 1] })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NameId {
        let names = self.names();
        names[rng.random_range(0..names.len())]
    }
}

/// Materialises `V_≤k`; fails with `UniverseTooLarge` above `ceiling`.
pub fn enumerate_universe(store: &NameStore, k: usize, ceiling: u128) -> Result<Universe, NameError> {
    assert!(k >= 1, "rank bound must be at least 1");
    let n = store.algebra().size();
    match projected_size(n, k) {
        Some(c) if c <= ceiling => {}
        other => {
            return Err(NameError::UniverseTooLarge {
                rank: k,
                projected: other.map_or_else(|| format!("({}+1)^(...) (overflow)", n), |c| c.to_string()),
                ceiling,
            })
        }
    }
    let alg = store.algebra().clone();
    let mut levels: Vec<Vec<NameId>> = vec![vec![store.empty()]];
    for _ in 2..=k {
        let prev = levels.last().unwrap();
        let m = prev.len();
        let total = (n + 1).pow(m as u32);
        let mut keyed = Vec::with_capacity(total);
        for code in 0..total {
            let mut rem = code;
            let mut key = Vec::new();
            for pos in 0..m {
                let digit = rem % (n + 1);
                rem /= n + 1;
                if digit > 0 {
                    key.push((pos, digit - 1));
                }
            }
            let id = store.make_name(key.iter().map(|&(p, v)| (prev[p], alg.element(v))))?;
            keyed.push((store.rank(id), key, id));
        }
        keyed.sort();
        levels.push(keyed.into_iter().map(|(_, _, id)| id).collect());
    }
    Ok(Universe { levels })
}

/// A uniformly random partial function from `pool` into the algebra.
pub fn sample_name_over<R: Rng + ?Sized>(store: &NameStore, pool: &[NameId], rng: &mut R) -> NameId {
    let alg = store.algebra();
    let n = alg.size();
    let entries: Vec<_> = pool
        .iter()
        .filter_map(|&x| {
            let digit = rng.random_range(0..=n);
            (digit > 0).then(|| (x, alg.element(digit - 1)))
        })
        .collect();
    store.make_name(entries).expect("pool names come from this store")
}

/// `{(x, 1) : x ∈ V_≤K}`, a name of rank K+1.
pub fn universal_name(store: &NameStore, universe: &Universe) -> NameId {
    let top = store.algebra().top();
    store
        .make_name(universe.names().iter().map(|&x| (x, top)))
        .expect("universe names come from this store")
}

/// A hereditarily finite set, ordered structurally.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HfSet(BTreeSet<HfSet>);

impl HfSet {
    pub fn empty() -> Self {
        HfSet(BTreeSet::new())
    }

    pub fn from_elements<I: IntoIterator<Item = HfSet>>(items: I) -> Self {
        HfSet(items.into_iter().collect())
    }

    /// The von Neumann numeral `n = {0, ..., n-1}`.
    pub fn von_neumann(n: usize) -> Self {
        (0..n).fold(HfSet::empty(), |acc, _| acc.successor())
    }

    /// `x ∪ {x}`.
    pub fn successor(&self) -> Self {
        let mut s = self.0.clone();
        s.insert(self.clone());
        HfSet(s)
    }

    pub fn elements(&self) -> impl Iterator<Item = &HfSet> {
        self.0.iter()
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.0.contains(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Nesting depth; `∅` has depth 0.
    pub fn depth(&self) -> usize {
        self.0.iter().map(|x| x.depth() + 1).max().unwrap_or(0)
    }

    /// Every hereditarily finite set of depth ≤ `d`.
    pub fn all_up_to_depth(d: usize) -> Vec<HfSet> {
        let mut sets = vec![HfSet::empty()];
        for _ in 0..d {
            let m = sets.len();
            assert!(m < 20, "too many hereditarily finite sets");
            sets = (0..1usize << m)
                .map(|mask| HfSet::from_elements((0..m).filter(|i| mask & (1 << i) != 0).map(|i| sets[i].clone())))
                .collect();
            sets.sort();
        }
        sets
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

/// The canonical name `û = {(v̂, 1) : v ∈ u}`.
pub fn hat_embed(store: &NameStore, set: &HfSet) -> NameId {
    let top = store.algebra().top();
    let children: Vec<_> = set.elements().map(|x| (hat_embed(store, x), top)).collect();
    store.make_name(children).expect("hat names are well formed")
}

/// The mixture `Σ aᵢ·uᵢ`: domain `⋃ dom(uᵢ)`, value `⋁ᵢ (aᵢ ∧ ||x ∈ uᵢ||)`.
pub fn mixture(ctx: &EvalContext, pairs: &[(Element, NameId)]) -> Result<NameId, NameError> {
    if pairs.is_empty() {
        return Err(NameError::EmptyMixture);
    }
    let store = ctx.store();
    let alg = store.algebra();
    let domain: BTreeSet<NameId> = pairs.iter().flat_map(|(_, u)| store.domain(*u)).collect();
    let entries: Vec<_> = domain
        .into_iter()
        .map(|x| {
            let value = alg.big_join(pairs.iter().map(|&(a, u)| alg.meet(a, ctx.membership(x, u))));
            (x, value)
        })
        .collect();
    store.make_name(entries)
}

/// Copies a name into another store, mapping values through `embedding`.
pub fn transport(from: &NameStore, to: &NameStore, embedding: &Embedding, id: NameId) -> Result<NameId, NameError> {
    let entries = from.entries(id);
    let mapped = entries
        .iter()
        .map(|&(c, v)| Ok((transport(from, to, embedding, c)?, embedding.apply(v))))
        .collect::<Result<Vec<_>, NameError>>()?;
    to.make_name(mapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::builtin::{boolean2, chain};

    fn store3() -> NameStore {
        NameStore::new(Arc::new(chain(3)))
    }

    #[test]
    fn empty_name_has_rank_one() {
        let s = store3();
        let e = s.empty();
        assert_eq!(s.rank(e), 1);
        assert!(s.entries(e).is_empty());
        assert_eq!(s.literal(e), "{}");
    }

    #[test]
    fn singleton_names_rank_two() {
        let s = store3();
        let alg = s.algebra().clone();
        let w = s.empty();
        let u = s.make_name([(w, alg.element_by_label("1/2").unwrap())]).unwrap();
        let v = s.make_name([(w, alg.top())]).unwrap();
        assert_ne!(u, v);
        assert_eq!((s.rank(u), s.rank(v)), (2, 2));
        assert_eq!(s.literal(u), "{{}: 1/2}");
    }

    #[test]
    fn interning_ignores_entry_order() {
        let s = store3();
        let alg = s.algebra().clone();
        let w = s.empty();
        let a = s.make_name([(w, alg.top())]).unwrap();
        let x = s.make_name([(w, alg.bottom()), (a, alg.top())]).unwrap();
        let y = s.make_name([(a, alg.top()), (w, alg.bottom())]).unwrap();
        assert_eq!(x, y);
        assert_eq!(s.rank(x), 3);
    }

    #[test]
    fn rejects_foreign_values_and_duplicates() {
        let s = store3();
        let other = chain(3);
        let w = s.empty();
        assert_eq!(s.make_name([(w, other.top())]), Err(NameError::MixedAlgebras));
        let t = s.algebra().top();
        assert!(matches!(
            s.make_name([(w, t), (w, t)]),
            Err(NameError::DuplicateEntry(_))
        ));
        assert!(matches!(
            s.make_name([(NameId(99), t)]),
            Err(NameError::UnknownName(99))
        ));
    }

    #[test]
    fn universe_counts() {
        let s = store3();
        assert_eq!(enumerate_universe(&s, 1, DEFAULT_CEILING).unwrap().counts(), vec![1]);
        let u = enumerate_universe(&s, 3, DEFAULT_CEILING).unwrap();
        assert_eq!(u.counts(), vec![1, 4, 256]);
        assert_eq!(u.rank_counts(), vec![1, 3, 252]);
        let two = NameStore::new(Arc::new(boolean2()));
        assert_eq!(
            enumerate_universe(&two, 3, DEFAULT_CEILING).unwrap().counts(),
            vec![1, 3, 27]
        );
        assert!(matches!(
            enumerate_universe(&s, 4, DEFAULT_CEILING),
            Err(NameError::UniverseTooLarge { rank: 4, .. })
        ));
        assert_eq!(projected_size(3, 3), Some(256));
        assert_eq!(projected_size(3, 5), None);
    }

    #[test]
    fn universe_order_is_canonical_and_prefix_stable() {
        let s = store3();
        let u = enumerate_universe(&s, 3, DEFAULT_CEILING).unwrap();
        assert_eq!(&u.level(3)[..4], u.level(2));
        let lits: Vec<String> = u.level(2).iter().map(|&n| s.literal(n)).collect();
        assert_eq!(lits, ["{}", "{{}: 0}", "{{}: 1/2}", "{{}: 1}"]);
        // A fresh store built in a different order enumerates the same literals.
        let t = store3();
        let alg = t.algebra().clone();
        let w = t.empty();
        t.make_name([(w, alg.top())]).unwrap();
        let u2 = enumerate_universe(&t, 3, DEFAULT_CEILING).unwrap();
        let a: Vec<String> = u.names().iter().map(|&n| s.literal(n)).collect();
        let b: Vec<String> = u2.names().iter().map(|&n| t.literal(n)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn hat_names() {
        let s = store3();
        assert_eq!(hat_embed(&s, &HfSet::empty()), s.empty());
        let one = hat_embed(&s, &HfSet::von_neumann(1));
        assert_eq!(s.literal(one), "{{}: 1}");
        let two = hat_embed(&s, &HfSet::von_neumann(2));
        assert_eq!(s.entries(two).len(), 2);
        assert!(s.entries(two).iter().all(|(_, v)| *v == s.algebra().top()));
        assert_eq!(s.rank(two), 3);
    }

    #[test]
    fn hat_is_injective_to_depth_three() {
        let s = store3();
        let sets = HfSet::all_up_to_depth(3);
        assert_eq!(sets.len(), 16);
        let ids: BTreeSet<NameId> = sets.iter().map(|x| hat_embed(&s, x)).collect();
        assert_eq!(ids.len(), sets.len());
    }

    #[test]
    fn universal_name_entries() {
        let s = store3();
        let u1 = enumerate_universe(&s, 1, DEFAULT_CEILING).unwrap();
        let w1 = universal_name(&s, &u1);
        assert_eq!(s.literal(w1), "{{}: 1}");
        let u2 = enumerate_universe(&s, 2, DEFAULT_CEILING).unwrap();
        let w2 = universal_name(&s, &u2);
        assert_eq!(s.entries(w2).len(), 4);
        assert_eq!(s.rank(w2), 3);
    }

    #[test]
    fn von_neumann_numerals() {
        assert_eq!(HfSet::von_neumann(0).to_string(), "{}");
        assert_eq!(HfSet::von_neumann(2).to_string(), "{{}, {{}}}");
        assert_eq!(HfSet::von_neumann(3).depth(), 3);
        assert!(HfSet::von_neumann(4).contains(&HfSet::von_neumann(3)));
    }
}
