//! Finite generalized Heyting algebras.
//!
//! An [`Algebra`] is a finite distributive lattice with a greatest element and
//! a relative pseudo-complement `a -> b = max{c : a & c <= b}`. Every finite
//! lattice is complete, so a least element always exists and is cached as
//! [`Algebra::bottom`]. Elements are indices into the carrier, tagged with the
//! identity of the algebra that produced them.

use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

/// Carrier sizes are capped so that element sets fit in one machine word.
pub const MAX_CARRIER: usize = 64;

static NEXT_TAG: AtomicU32 = AtomicU32::new(1);

/// Identity of one constructed algebra. Clones of an algebra share the tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraTag(u32);

impl AlgebraTag {
    fn fresh() -> Self {
        AlgebraTag(NEXT_TAG.fetch_add(1, Ordering::Relaxed))
    }
}

/// A carrier element of one specific [`Algebra`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    tag: AlgebraTag,
    index: u16,
}

impl Element {
    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn tag(self) -> AlgebraTag {
        self.tag
    }
}

/// A subset of a carrier, stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ElementSet(u64);

impl ElementSet {
    pub const fn empty() -> Self {
        ElementSet(0)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut set = ElementSet::empty();
        for i in indices {
            set.insert_index(i);
        }
        set
    }

    pub fn from_bits(bits: u64) -> Self {
        ElementSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn insert_index(&mut self, i: usize) {
        assert!(i < MAX_CARRIER, "element index {i} exceeds carrier cap");
        self.0 |= 1 << i;
    }

    pub fn insert(&mut self, e: Element) {
        self.insert_index(e.index());
    }

    pub fn contains_index(self, i: usize) -> bool {
        i < MAX_CARRIER && self.0 & (1 << i) != 0
    }

    pub fn contains(self, e: Element) -> bool {
        self.contains_index(e.index())
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 & other.0)
    }

    /// Indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_CARRIER).filter(move |i| bits & (1 << i) != 0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("carrier is empty")]
    EmptyCarrier,
    #[error("carrier has {0} elements; at most {MAX_CARRIER} are supported")]
    CarrierTooLarge(usize),
    #[error("malformed {table} table: {detail}")]
    MalformedTables { table: &'static str, detail: String },
    #[error("unknown element label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("order is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("elements {0} and {1} have no {2} in the order")]
    NotALattice(usize, usize, &'static str),
    #[error("no relative pseudo-complement for ({a}, {b}): {{c : a & c <= b}} has no maximum")]
    NoResiduum { a: usize, b: usize },
    #[error("algebra violates {} law(s):\n{report}", report.violations.len())]
    Invalid { report: ValidationReport },
    #[error("bad embedding: {0}")]
    BadEmbedding(String),
}

/// Laws checked by [`validate_algebra`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Law {
    MeetIdempotent,
    MeetCommutative,
    MeetAssociative,
    JoinIdempotent,
    JoinCommutative,
    JoinAssociative,
    Absorption,
    Distributive,
    GreatestElement,
    LeqAgreesWithMeet,
    Residuation,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Law::MeetIdempotent => "meet idempotence",
            Law::MeetCommutative => "meet commutativity",
            Law::MeetAssociative => "meet associativity",
            Law::JoinIdempotent => "join idempotence",
            Law::JoinCommutative => "join commutativity",
            Law::JoinAssociative => "join associativity",
            Law::Absorption => "absorption",
            Law::Distributive => "distributivity",
            Law::GreatestElement => "greatest element",
            Law::LeqAgreesWithMeet => "order agrees with meet",
            Law::Residuation => "residuation",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub law: Law,
    /// Carrier indices witnessing the failure, in the order the law names them.
    pub witness: Vec<usize>,
    pub labels: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at ({})", self.law, self.labels.join(", "))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, law: Law, witness: &[usize]) -> bool {
        self.violations.iter().any(|v| v.law == law && v.witness == witness)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Unvalidated operation tables over a labelled carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraTables {
    pub carrier: Vec<String>,
    /// Optional explicit order; checked against `meet` when present.
    pub leq: Option<Vec<Vec<bool>>>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    pub imp: Vec<Vec<usize>>,
    pub neg_op: Option<Vec<usize>>,
}

impl AlgebraTables {
    /// Builds tables from a partial order, deriving meet, join and implication.
    pub fn from_order(carrier: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self, AlgebraError> {
        let (meet, join) = lattice_from_order(&leq)?;
        let imp = residuum_from_order(&leq, &meet)?;
        Ok(AlgebraTables {
            carrier,
            leq: Some(leq),
            meet,
            join,
            imp,
            neg_op: None,
        })
    }

    fn check_shape(&self) -> Result<usize, AlgebraError> {
        let n = self.carrier.len();
        if n == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        if n > MAX_CARRIER {
            return Err(AlgebraError::CarrierTooLarge(n));
        }
        for (i, label) in self.carrier.iter().enumerate() {
            if self.carrier[..i].contains(label) {
                return Err(AlgebraError::DuplicateLabel(label.clone()));
            }
        }
        for (name, table) in [("meet", &self.meet), ("join", &self.join), ("imp", &self.imp)] {
            check_square(name, table, n)?;
        }
        if let Some(leq) = &self.leq {
            if leq.len() != n || leq.iter().any(|r| r.len() != n) {
                return Err(AlgebraError::MalformedTables {
                    table: "leq",
                    detail: format!("expected a {n}x{n} relation"),
                });
            }
        }
        if let Some(neg) = &self.neg_op {
            if neg.len() != n {
                return Err(AlgebraError::MalformedTables {
                    table: "neg_op",
                    detail: format!("expected {n} entries, found {}", neg.len()),
                });
            }
            if let Some((i, &v)) = neg.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(AlgebraError::MalformedTables {
                    table: "neg_op",
                    detail: format!("entry {i} is {v}, outside the carrier"),
                });
            }
        }
        Ok(n)
    }
}

fn check_square(name: &'static str, table: &[Vec<usize>], n: usize) -> Result<(), AlgebraError> {
    if table.len() != n {
        return Err(AlgebraError::MalformedTables {
            table: name,
            detail: format!("expected {n} rows, found {}", table.len()),
        });
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(AlgebraError::MalformedTables {
                table: name,
                detail: format!("row {i} has {} entries, expected {n}", row.len()),
            });
        }
        if let Some((j, &v)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
            return Err(AlgebraError::MalformedTables {
                table: name,
                detail: format!("entry ({i}, {j}) is {v}, outside the carrier"),
            });
        }
    }
    Ok(())
}

/// Reflexive-transitive closure of a generating relation given as index pairs.
pub fn order_from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Vec<Vec<bool>>, AlgebraError> {
    let mut leq = vec![vec![false; n]; n];
    for (i, row) in leq.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(AlgebraError::MalformedTables {
                table: "leq",
                detail: format!("pair ({a}, {b}) outside the carrier"),
            });
        }
        leq[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if leq[i][k] {
                for j in 0..n {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if leq[i][j] && leq[j][i] {
                return Err(AlgebraError::NotAntisymmetric(i, j));
            }
        }
    }
    Ok(leq)
}

/// Greatest lower and least upper bounds read off a partial order.
pub fn lattice_from_order(leq: &[Vec<bool>]) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>), AlgebraError> {
    let n = leq.len();
    let mut meet = vec![vec![0; n]; n];
    let mut join = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let lower: Vec<usize> = (0..n).filter(|&c| leq[c][a] && leq[c][b]).collect();
            meet[a][b] = lower
                .iter()
                .copied()
                .find(|&g| lower.iter().all(|&c| leq[c][g]))
                .ok_or(AlgebraError::NotALattice(a, b, "meet"))?;
            let upper: Vec<usize> = (0..n).filter(|&c| leq[a][c] && leq[b][c]).collect();
            join[a][b] = upper
                .iter()
                .copied()
                .find(|&l| upper.iter().all(|&c| leq[l][c]))
                .ok_or(AlgebraError::NotALattice(a, b, "join"))?;
        }
    }
    Ok((meet, join))
}

/// Relative pseudo-complement table: `imp[a][b] = max{c : meet(a, c) <= b}`.
pub fn residuum_from_order(leq: &[Vec<bool>], meet: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, AlgebraError> {
    let n = leq.len();
    let mut imp = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let candidates: Vec<usize> = (0..n).filter(|&c| leq[meet[a][c]][b]).collect();
            imp[a][b] = candidates
                .iter()
                .copied()
                .find(|&m| candidates.iter().all(|&c| leq[c][m]))
                .ok_or(AlgebraError::NoResiduum { a, b })?;
        }
    }
    Ok(imp)
}

/// Checks every algebra law exhaustively and lists the violations.
pub fn validate_algebra(candidate: &AlgebraTables) -> Result<ValidationReport, AlgebraError> {
    let n = candidate.check_shape()?;
    let m = &candidate.meet;
    let j = &candidate.join;
    let imp = &candidate.imp;
    let le = |a: usize, b: usize| m[a][b] == a;
    let mut out = Vec::new();
    let mut push = |law: Law, witness: Vec<usize>| {
        let labels = witness.iter().map(|&i| candidate.carrier[i].clone()).collect();
        out.push(Violation { law, witness, labels });
    };

    for a in 0..n {
        if m[a][a] != a {
            push(Law::MeetIdempotent, vec![a]);
        }
        if j[a][a] != a {
            push(Law::JoinIdempotent, vec![a]);
        }
        for b in 0..n {
            if m[a][b] != m[b][a] {
                push(Law::MeetCommutative, vec![a, b]);
            }
            if j[a][b] != j[b][a] {
                push(Law::JoinCommutative, vec![a, b]);
            }
            if m[a][j[a][b]] != a || j[a][m[a][b]] != a {
                push(Law::Absorption, vec![a, b]);
            }
            if let Some(leq) = &candidate.leq {
                if leq[a][b] != le(a, b) {
                    push(Law::LeqAgreesWithMeet, vec![a, b]);
                }
            }
            for c in 0..n {
                if m[m[a][b]][c] != m[a][m[b][c]] {
                    push(Law::MeetAssociative, vec![a, b, c]);
                }
                if j[j[a][b]][c] != j[a][j[b][c]] {
                    push(Law::JoinAssociative, vec![a, b, c]);
                }
                if m[a][j[b][c]] != j[m[a][b]][m[a][c]] {
                    push(Law::Distributive, vec![a, b, c]);
                }
                // meet(a, c) <= b  iff  c <= imp(a, b)
                if le(m[a][c], b) != le(c, imp[a][b]) {
                    push(Law::Residuation, vec![a, b, c]);
                }
            }
        }
    }
    if !(0..n).any(|t| (0..n).all(|x| j[t][x] == t)) {
        push(Law::GreatestElement, vec![]);
    }
    Ok(ValidationReport { violations: out })
}

/// A validated finite generalized Heyting algebra. Immutable once built.
#[derive(Clone, Debug)]
pub struct Algebra {
    tag: AlgebraTag,
    labels: Vec<String>,
    leq: Vec<bool>,
    meet: Vec<u16>,
    join: Vec<u16>,
    imp: Vec<u16>,
    neg_op: Option<Vec<u16>>,
    top: u16,
    bottom: u16,
}

impl Algebra {
    /// Validates the tables and rejects any law violation.
    pub fn from_tables(tables: AlgebraTables) -> Result<Self, AlgebraError> {
        let report = validate_algebra(&tables)?;
        if !report.is_empty() {
            return Err(AlgebraError::Invalid { report });
        }
        let n = tables.carrier.len();
        let flat = |t: &[Vec<usize>]| t.iter().flatten().map(|&v| v as u16).collect::<Vec<_>>();
        let meet = flat(&tables.meet);
        let leq = (0..n * n).map(|k| meet[k] as usize == k / n).collect();
        let top = (0..n).find(|&t| (0..n).all(|x| tables.join[t][x] == t)).unwrap() as u16;
        let bottom = (0..n).find(|&b| (0..n).all(|x| tables.meet[b][x] == b)).unwrap() as u16;
        Ok(Algebra {
            tag: AlgebraTag::fresh(),
            labels: tables.carrier,
            leq,
            meet,
            join: flat(&tables.join),
            imp: flat(&tables.imp),
            neg_op: tables.neg_op.map(|v| v.into_iter().map(|x| x as u16).collect()),
            top,
            bottom,
        })
    }

    /// Back to plain tables (fresh tag on rebuild).
    pub fn to_tables(&self) -> AlgebraTables {
        let n = self.size();
        let table = |t: &[u16]| {
            (0..n)
                .map(|a| (0..n).map(|b| t[a * n + b] as usize).collect())
                .collect()
        };
        AlgebraTables {
            carrier: self.labels.clone(),
            leq: None,
            meet: table(&self.meet),
            join: table(&self.join),
            imp: table(&self.imp),
            neg_op: self.neg_op.as_ref().map(|v| v.iter().map(|&x| x as usize).collect()),
        }
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn element(&self, index: usize) -> Element {
        assert!(index < self.size(), "element index {index} outside carrier");
        Element {
            tag: self.tag,
            index: index as u16,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.size()).map(move |i| self.element(i))
    }

    pub fn label(&self, e: Element) -> &str {
        self.check(e);
        &self.labels[e.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn element_by_label(&self, label: &str) -> Option<Element> {
        self.labels.iter().position(|l| l == label).map(|i| self.element(i))
    }

    pub fn owns(&self, e: Element) -> bool {
        e.tag == self.tag && e.index() < self.size()
    }

    #[inline]
    fn check(&self, e: Element) {
        assert!(e.tag == self.tag, "element from a different algebra");
    }

    #[inline]
    fn at(&self, table: &[u16], a: Element, b: Element) -> Element {
        self.check(a);
        self.check(b);
        Element {
            tag: self.tag,
            index: table[a.index() * self.size() + b.index()],
        }
    }

    pub fn top(&self) -> Element {
        Element {
            tag: self.tag,
            index: self.top,
        }
    }

    pub fn bottom(&self) -> Element {
        Element {
            tag: self.tag,
            index: self.bottom,
        }
    }

    #[inline]
    pub fn meet(&self, a: Element, b: Element) -> Element {
        self.at(&self.meet, a, b)
    }

    #[inline]
    pub fn join(&self, a: Element, b: Element) -> Element {
        self.at(&self.join, a, b)
    }

    #[inline]
    pub fn imp(&self, a: Element, b: Element) -> Element {
        self.at(&self.imp, a, b)
    }

    #[inline]
    pub fn leq(&self, a: Element, b: Element) -> bool {
        self.check(a);
        self.check(b);
        self.leq[a.index() * self.size() + b.index()]
    }

    pub fn has_neg_op(&self) -> bool {
        self.neg_op.is_some()
    }

    pub fn neg_op(&self, a: Element) -> Option<Element> {
        self.check(a);
        self.neg_op.as_ref().map(|t| Element {
            tag: self.tag,
            index: t[a.index()],
        })
    }

    /// Infimum; the empty meet is `top`.
    pub fn big_meet<I: IntoIterator<Item = Element>>(&self, items: I) -> Element {
        items.into_iter().fold(self.top(), |acc, x| self.meet(acc, x))
    }

    /// Supremum; the empty join is `bottom`.
    pub fn big_join<I: IntoIterator<Item = Element>>(&self, items: I) -> Element {
        items.into_iter().fold(self.bottom(), |acc, x| self.join(acc, x))
    }

    /// The maximal elements of `set`, in carrier order.
    ///
    /// The result is an antichain, refines `set` and has the same supremum.
    pub fn refine_antichain(&self, set: &[Element]) -> Vec<Element> {
        let mut distinct: Vec<Element> = set.to_vec();
        distinct.sort();
        distinct.dedup();
        distinct
            .iter()
            .copied()
            .filter(|&a| !distinct.iter().any(|&b| b != a && self.leq(a, b)))
            .collect()
    }

    /// Finite algebras are always refinable via [`Algebra::refine_antichain`].
    pub fn is_refinable(&self) -> bool {
        true
    }

    pub fn set_of(&self, set: ElementSet) -> Vec<Element> {
        set.indices()
            .filter(|&i| i < self.size())
            .map(|i| self.element(i))
            .collect()
    }

    pub fn down_set(&self, a: Element) -> ElementSet {
        ElementSet::from_indices(self.elements().filter(|&x| self.leq(x, a)).map(Element::index))
    }

    pub fn carrier_set(&self) -> ElementSet {
        ElementSet::from_indices(0..self.size())
    }
}

/// An injective map from the carrier of one algebra into another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    source: AlgebraTag,
    target: AlgebraTag,
    map: Vec<Element>,
}

impl Embedding {
    pub fn new(sub: &Algebra, sup: &Algebra, map: Vec<Element>) -> Result<Self, AlgebraError> {
        if map.len() != sub.size() {
            return Err(AlgebraError::BadEmbedding(format!(
                "map has {} entries for a carrier of {}",
                map.len(),
                sub.size()
            )));
        }
        if let Some(e) = map.iter().find(|e| !sup.owns(**e)) {
            return Err(AlgebraError::BadEmbedding(format!(
                "image {e:?} is not in the target algebra"
            )));
        }
        for i in 0..map.len() {
            if map[..i].contains(&map[i]) {
                return Err(AlgebraError::BadEmbedding(format!(
                    "not injective at {}",
                    sub.labels[i]
                )));
            }
        }
        Ok(Embedding {
            source: sub.tag,
            target: sup.tag,
            map,
        })
    }

    pub fn identity(alg: &Algebra) -> Self {
        Embedding {
            source: alg.tag,
            target: alg.tag,
            map: alg.elements().collect(),
        }
    }

    /// Builds the embedding from `(sub label, sup label)` pairs.
    pub fn by_labels(sub: &Algebra, sup: &Algebra, pairs: &[(&str, &str)]) -> Result<Self, AlgebraError> {
        let mut map = vec![None; sub.size()];
        for (from, to) in pairs {
            let f = sub
                .element_by_label(from)
                .ok_or_else(|| AlgebraError::UnknownLabel(from.to_string()))?;
            let t = sup
                .element_by_label(to)
                .ok_or_else(|| AlgebraError::UnknownLabel(to.to_string()))?;
            map[f.index()] = Some(t);
        }
        let map = map
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| AlgebraError::BadEmbedding(format!("{} is unmapped", sub.labels[i]))))
            .collect::<Result<Vec<_>, _>>()?;
        Embedding::new(sub, sup, map)
    }

    pub fn apply(&self, e: Element) -> Element {
        assert!(e.tag == self.source, "element is not in the embedding's domain");
        self.map[e.index()]
    }

    pub fn source(&self) -> AlgebraTag {
        self.source
    }

    pub fn target(&self) -> AlgebraTag {
        self.target
    }
}

/// First table entry where the embedding fails to commute, as `(operation, a, b)`.
pub fn subalgebra_mismatch(
    sub: &Algebra,
    sup: &Algebra,
    embedding: &Embedding,
) -> Option<(&'static str, Element, Element)> {
    if embedding.source != sub.tag || embedding.target != sup.tag {
        return Some(("tag", sub.top(), sub.top()));
    }
    if embedding.apply(sub.top()) != sup.top() {
        return Some(("top", sub.top(), sub.top()));
    }
    let f = |e| embedding.apply(e);
    for a in sub.elements() {
        for b in sub.elements() {
            if f(sub.meet(a, b)) != sup.meet(f(a), f(b)) {
                return Some(("meet", a, b));
            }
            if f(sub.join(a, b)) != sup.join(f(a), f(b)) {
                return Some(("join", a, b));
            }
            if f(sub.imp(a, b)) != sup.imp(f(a), f(b)) {
                return Some(("imp", a, b));
            }
        }
    }
    None
}

/// True iff the embedding commutes with meet, join and implication and keeps top.
pub fn is_subalgebra(sub: &Algebra, sup: &Algebra, embedding: &Embedding) -> bool {
    subalgebra_mismatch(sub, sup, embedding).is_none()
}

/// Built-in algebras.
pub mod builtin {
    use super::*;

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    fn chain_label(k: usize, n: usize) -> String {
        if k == 0 {
            "0".into()
        } else if k == n - 1 {
            "1".into()
        } else {
            let d = n - 1;
            let g = gcd(k, d);
            format!("{}/{}", k / g, d / g)
        }
    }

    /// The n-element Gödel chain `0 < 1/(n-1) < ... < 1`.
    pub fn chain(n: usize) -> Algebra {
        assert!(
            (1..=MAX_CARRIER).contains(&n),
            "chain length must be in 1..={MAX_CARRIER}"
        );
        let labels = if n == 1 {
            vec!["1".to_string()]
        } else {
            (0..n).map(|k| chain_label(k, n)).collect()
        };
        let leq = (0..n).map(|a| (0..n).map(|b| a <= b).collect()).collect();
        Algebra::from_tables(AlgebraTables::from_order(labels, leq).expect("chains are lattices"))
            .expect("chains are Heyting algebras")
    }

    /// The two-element Boolean algebra.
    pub fn boolean2() -> Algebra {
        chain(2)
    }

    /// The four-element Boolean algebra `{0, p, q, 1}` with atoms `p`, `q`.
    pub fn boolean4() -> Algebra {
        let labels = ["0", "p", "q", "1"].map(String::from).to_vec();
        let leq = order_from_pairs(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        Algebra::from_tables(AlgebraTables::from_order(labels, leq).unwrap()).unwrap()
    }

    /// The three-element chain with the dual pseudo-complement `~0 = ~1/2 = 1`, `~1 = 0`.
    pub fn h3_star() -> Algebra {
        let mut tables = chain(3).to_tables();
        tables.neg_op = Some(vec![2, 2, 0]);
        Algebra::from_tables(tables).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;

    fn e(alg: &Algebra, label: &str) -> Element {
        alg.element_by_label(label).unwrap()
    }

    fn diamond_order() -> Vec<Vec<bool>> {
        // 0 < a, b, c < 1, atoms pairwise incomparable
        order_from_pairs(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn three_chain_implication_matches_goedel_table() {
        let h = chain(3);
        let rows = [["1", "1", "1"], ["0", "1", "1"], ["0", "1/2", "1"]];
        for (a, row) in h.elements().zip(rows) {
            for (b, want) in h.elements().zip(row) {
                assert_eq!(h.label(h.imp(a, b)), want, "{} -> {}", h.label(a), h.label(b));
            }
        }
        assert_eq!(h.imp(e(&h, "1"), e(&h, "1/2")), e(&h, "1/2"));
        assert_eq!(h.imp(e(&h, "1/2"), e(&h, "0")), e(&h, "0"));
        assert_eq!(validate_algebra(&h.to_tables()).unwrap(), ValidationReport::default());
    }

    #[test]
    fn one_element_algebra_is_valid() {
        let one = chain(1);
        assert_eq!(one.top(), one.bottom());
        assert!(validate_algebra(&one.to_tables()).unwrap().is_empty());
    }

    #[test]
    fn altered_implication_reports_residuation_witness() {
        let mut t = chain(3).to_tables();
        t.imp[2][1] = 2; // imp(1, 1/2) := 1
        let report = validate_algebra(&t).unwrap();
        // Brute force over all 27 triples.
        let le = |a: usize, b: usize| a <= b;
        let mut expected = vec![];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    if le(a.min(c), b) != le(c, t.imp[a][b]) {
                        expected.push(vec![a, b, c]);
                    }
                }
            }
        }
        assert_eq!(expected, vec![vec![2, 1, 2]]);
        assert!(report.contains(Law::Residuation, &[2, 1, 2]));
        assert!(matches!(Algebra::from_tables(t), Err(AlgebraError::Invalid { .. })));
    }

    #[test]
    fn out_of_range_entry_is_malformed() {
        let mut t = chain(2).to_tables();
        t.join[0][1] = 7;
        assert!(matches!(
            validate_algebra(&t),
            Err(AlgebraError::MalformedTables { table: "join", .. })
        ));
    }

    #[test]
    fn residuum_of_every_element_with_itself_is_top() {
        for alg in [chain(2), chain(3), chain(5), boolean4()] {
            for a in alg.elements() {
                assert_eq!(alg.imp(a, a), alg.top());
            }
        }
    }

    #[test]
    fn nondistributive_diamond_has_no_residuum() {
        let leq = diamond_order();
        let (meet, _) = lattice_from_order(&leq).unwrap();
        // Enumerate candidate sets directly: {c : a & c <= b} for a = atom 1, b = 0.
        let set: Vec<usize> = (0..5).filter(|&c| leq[meet[1][c]][0]).collect();
        assert_eq!(set, vec![0, 2, 3]);
        assert!(!set.iter().any(|&m| set.iter().all(|&c| leq[c][m])));
        assert!(matches!(
            residuum_from_order(&leq, &meet),
            Err(AlgebraError::NoResiduum { .. })
        ));
    }

    #[test]
    fn big_meet_and_join_on_chain() {
        let h = chain(3);
        assert_eq!(h.big_join([]), e(&h, "0"));
        assert_eq!(h.big_meet([]), h.top());
        assert_eq!(h.big_meet([e(&h, "1/2"), e(&h, "1")]), e(&h, "1/2"));
        assert_eq!(h.big_join([e(&h, "0"), e(&h, "1/2")]), e(&h, "1/2"));
    }

    #[test]
    fn refine_antichain_examples() {
        let h = chain(3);
        assert_eq!(h.refine_antichain(&[e(&h, "0"), e(&h, "1/2")]), vec![e(&h, "1/2")]);
        assert_eq!(h.refine_antichain(&[e(&h, "0")]), vec![e(&h, "0")]);
        let b = boolean4();
        let atoms = [e(&b, "p"), e(&b, "q")];
        assert_eq!(b.refine_antichain(&atoms), atoms.to_vec());
        assert_eq!(b.big_join(atoms), b.top());
        assert!(b.is_refinable());
    }

    #[test]
    fn two_chain_embeddings_into_three_chain() {
        let two = chain(2);
        let three = chain(3);
        let ends = Embedding::by_labels(&two, &three, &[("0", "0"), ("1", "1")]).unwrap();
        assert!(is_subalgebra(&two, &three, &ends));
        assert!(is_subalgebra(&three, &three, &Embedding::identity(&three)));

        // 0 -> 1/2, 1 -> 1: brute-force commutation over all 4 entries of each table.
        let map = |i: usize| [1usize, 2][i];
        let mut commutes = true;
        for a in 0..2 {
            for b in 0..2 {
                commutes &= map(a.min(b)) == map(a).min(map(b));
                commutes &= map(a.max(b)) == map(a).max(map(b));
                let imp2 = if a <= b { 1 } else { b };
                let imp3 = if map(a) <= map(b) { 2 } else { map(b) };
                commutes &= map(imp2) == imp3;
            }
        }
        let shifted = Embedding::by_labels(&two, &three, &[("0", "1/2"), ("1", "1")]).unwrap();
        assert_eq!(is_subalgebra(&two, &three, &shifted), commutes);
        assert!(commutes);

        let bad = Embedding::by_labels(&two, &three, &[("0", "0"), ("1", "1/2")]).unwrap();
        assert_eq!(subalgebra_mismatch(&two, &three, &bad).map(|m| m.0), Some("top"));
    }

    #[test]
    fn h3_star_negation_table() {
        let h = h3_star();
        let neg: Vec<&str> = h.elements().map(|a| h.label(h.neg_op(a).unwrap())).collect();
        assert_eq!(neg, ["1", "1", "0"]);
        assert!(!chain(3).has_neg_op());
    }

    #[test]
    fn chain_labels() {
        assert_eq!(chain(4).labels(), ["0", "1/3", "2/3", "1"]);
        assert_eq!(chain(5).labels(), ["0", "1/4", "1/2", "3/4", "1"]);
    }

    #[test]
    #[should_panic(expected = "different algebra")]
    fn mixing_algebras_panics() {
        let a = chain(3);
        let b = chain(3);
        a.meet(a.top(), b.top());
    }
}
