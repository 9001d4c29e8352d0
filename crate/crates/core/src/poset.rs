//! Finite partially ordered sets.
//!
//! Elements are the dense indices `0..n`. The order is stored twice as bit
//! rows: `up[x]` is `{x}↑` and `down[x]` is `{x}↓`, so `x ≤ y` is a single
//! bit lookup and up/down closures of sets are unions of rows.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Hard cap on the size of constructed posets.
pub const DEFAULT_CAP: usize = 4096;

/// Cap on the number of decreasing sets enumerated by [`Poset::decreasing_sets`].
pub const DEFAULT_FAMILY_CAP: usize = 1 << 20;

/// A subset of a poset's elements, stored as a bit mask.
///
/// Sets compare as binary numbers with element 0 as the least significant
/// bit, so sorting a list of sets gives the canonical enumeration order used
/// throughout the crate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    n: usize,
    words: Vec<u64>,
}

impl ElementSet {
    pub fn empty(n: usize) -> Self {
        ElementSet { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for x in 0..n {
            s.insert(x);
        }
        s
    }

    pub fn singleton(n: usize, x: usize) -> Self {
        let mut s = Self::empty(n);
        s.insert(x);
        s
    }

    pub fn from_indices(n: usize, xs: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for x in xs {
            s.insert(x);
        }
        s
    }

    /// Set whose members are the bits of `mask` (element 0 = bit 0). Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "from_mask needs n <= 64");
        let mut s = Self::empty(n);
        if n > 0 {
            s.words[0] = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        }
        s
    }

    /// Inverse of [`ElementSet::from_mask`].
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.n && self.words[x / 64] >> (x % 64) & 1 == 1
    }

    pub fn insert(&mut self, x: usize) {
        assert!(x < self.n, "element {x} out of range 0..{}", self.n);
        self.words[x / 64] |= 1 << (x % 64);
    }

    pub fn remove(&mut self, x: usize) {
        if x < self.n {
            self.words[x / 64] &= !(1 << (x % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&x| self.contains(x))
    }

    pub fn union_with(&mut self, other: &ElementSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &ElementSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn complement(&self) -> ElementSet {
        let mut s = Self::full(self.n);
        for (a, b) in s.words.iter_mut().zip(&self.words) {
            *a &= !b;
        }
        s
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl Ord for ElementSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for ElementSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The first violated partial-order axiom, with a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum PosetViolation {
    Reflexivity { x: usize },
    Antisymmetry { x: usize, y: usize },
    Transitivity { x: usize, y: usize, z: usize },
}

impl fmt::Display for PosetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosetViolation::Reflexivity { x } => write!(f, "not reflexive at {x}"),
            PosetViolation::Antisymmetry { x, y } => {
                write!(f, "not antisymmetric: {x} <= {y} and {y} <= {x}")
            }
            PosetViolation::Transitivity { x, y, z } => {
                write!(f, "not transitive: {x} <= {y} <= {z} but not {x} <= {z}")
            }
        }
    }
}

/// Result of [`Poset::classify_subset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SubsetClass {
    pub increasing: bool,
    pub decreasing: bool,
    pub filter: bool,
    pub ideal: bool,
    pub principal_filter: bool,
    pub principal_ideal: bool,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    up: Vec<ElementSet>,
    down: Vec<ElementSet>,
    labels: Option<Vec<String>>,
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Poset").field("n", &self.n).field("covers", &self.covers()).finish()
    }
}

impl Poset {
    /// Builds a relation without checking the axioms; use [`Poset::validate`]
    /// or [`Poset::from_relation`] when the input is untrusted.
    pub fn from_relation_unchecked(n: usize, leq: impl Fn(usize, usize) -> bool) -> Self {
        let mut up = vec![ElementSet::empty(n); n];
        let mut down = vec![ElementSet::empty(n); n];
        for x in 0..n {
            for y in 0..n {
                if leq(x, y) {
                    up[x].insert(y);
                    down[y].insert(x);
                }
            }
        }
        Poset { n, up, down, labels: None }
    }

    pub fn from_relation(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        if n > DEFAULT_CAP {
            return Err(Error::TooLarge { n, cap: DEFAULT_CAP });
        }
        let p = Self::from_relation_unchecked(n, leq);
        p.validate().map_err(|v| Error::InvalidPoset(v.to_string()))?;
        Ok(p)
    }

    /// Reflexive-transitive closure of a cover (or any generating) relation.
    pub fn from_covers(n: usize, covers: &[(usize, usize)]) -> Result<Self> {
        if n > DEFAULT_CAP {
            return Err(Error::TooLarge { n, cap: DEFAULT_CAP });
        }
        let mut up: Vec<ElementSet> = (0..n).map(|x| ElementSet::singleton(n, x)).collect();
        for &(a, b) in covers {
            if a >= n || b >= n {
                return Err(Error::InvalidPoset(format!("cover ({a},{b}) out of range 0..{n}")));
            }
            up[a].insert(b);
        }
        // Warshall on bit rows.
        for k in 0..n {
            let row_k = up[k].clone();
            for row in up.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        let p = Self::from_relation_unchecked(n, |x, y| up[x].contains(y));
        p.validate().map_err(|v| Error::InvalidPoset(v.to_string()))?;
        Ok(p)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} labels for {} elements",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Total order `0 < 1 < … < n-1`.
    pub fn chain(n: usize) -> Self {
        Self::from_relation_unchecked(n, |x, y| x <= y)
    }

    /// `n` pairwise incomparable elements.
    pub fn antichain(n: usize) -> Self {
        Self::from_relation_unchecked(n, |x, y| x == y)
    }

    /// `{0,1}^k` with the product order; element index is the bit mask.
    pub fn boolean(k: usize) -> Result<Self> {
        product_poset(&vec![Self::chain(2); k])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.up[x].contains(y)
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    /// `{x}↑`.
    pub fn up_of(&self, x: usize) -> &ElementSet {
        &self.up[x]
    }

    /// `{x}↓`.
    pub fn down_of(&self, x: usize) -> &ElementSet {
        &self.down[x]
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.n).map(|x| self.label(x)).collect()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        (0..self.n).find(|&x| self.label(x) == label)
    }

    pub fn set_label(&self, set: &ElementSet) -> String {
        let parts: Vec<String> = set.iter().map(|x| self.label(x)).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Checks reflexivity, antisymmetry and transitivity in that order and
    /// reports the first violation (lexicographically smallest witness).
    pub fn validate(&self) -> std::result::Result<(), PosetViolation> {
        for x in 0..self.n {
            if !self.leq(x, x) {
                return Err(PosetViolation::Reflexivity { x });
            }
        }
        for x in 0..self.n {
            for y in 0..self.n {
                if x != y && self.leq(x, y) && self.leq(y, x) {
                    return Err(PosetViolation::Antisymmetry { x, y });
                }
            }
        }
        for x in 0..self.n {
            for y in self.up[x].iter() {
                for z in self.up[y].iter() {
                    if !self.leq(x, z) {
                        return Err(PosetViolation::Transitivity { x, y, z });
                    }
                }
            }
        }
        Ok(())
    }

    /// `A↑ = {x : x ≥ y for some y ∈ A}`.
    pub fn up_set(&self, a: &ElementSet) -> ElementSet {
        let mut out = ElementSet::empty(self.n);
        for y in a.iter() {
            out.union_with(&self.up[y]);
        }
        out
    }

    /// `A↓ = {x : x ≤ y for some y ∈ A}`.
    pub fn down_set(&self, a: &ElementSet) -> ElementSet {
        let mut out = ElementSet::empty(self.n);
        for y in a.iter() {
            out.union_with(&self.down[y]);
        }
        out
    }

    /// `A_max`: members of `A` with no strictly larger member of `A`.
    pub fn maximal_elements(&self, a: &ElementSet) -> ElementSet {
        let mut out = ElementSet::empty(self.n);
        for x in a.iter() {
            let mut above = self.up[x].intersection(a);
            above.remove(x);
            if above.is_empty() {
                out.insert(x);
            }
        }
        out
    }

    /// `A_min`: members of `A` with no strictly smaller member of `A`.
    pub fn minimal_elements(&self, a: &ElementSet) -> ElementSet {
        let mut out = ElementSet::empty(self.n);
        for x in a.iter() {
            let mut below = self.down[x].intersection(a);
            below.remove(x);
            if below.is_empty() {
                out.insert(x);
            }
        }
        out
    }

    pub fn is_increasing(&self, a: &ElementSet) -> bool {
        self.up_set(a).is_subset(a)
    }

    pub fn is_decreasing(&self, a: &ElementSet) -> bool {
        self.down_set(a).is_subset(a)
    }

    pub fn is_antichain(&self, a: &ElementSet) -> bool {
        a.iter().all(|x| a.iter().all(|y| x == y || !self.leq(x, y)))
    }

    pub fn classify_subset(&self, a: &ElementSet) -> SubsetClass {
        let increasing = self.is_increasing(a);
        let decreasing = self.is_decreasing(a);
        let nonempty = !a.is_empty();
        let members: Vec<usize> = a.iter().collect();
        let filter = nonempty
            && increasing
            && members.iter().all(|&x| {
                members.iter().all(|&y| !self.down[x].intersection(&self.down[y]).intersection(a).is_empty())
            });
        let ideal = nonempty
            && decreasing
            && members.iter().all(|&x| {
                members.iter().all(|&y| !self.up[x].intersection(&self.up[y]).intersection(a).is_empty())
            });
        let mins = self.minimal_elements(a);
        let maxs = self.maximal_elements(a);
        let principal_filter = mins.len() == 1 && &self.up[mins.iter().next().unwrap()] == a;
        let principal_ideal = maxs.len() == 1 && &self.down[maxs.iter().next().unwrap()] == a;
        SubsetClass { increasing, decreasing, filter, ideal, principal_filter, principal_ideal }
    }

    /// Immediate successor pairs (the Hasse diagram), lexicographically sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in self.up[x].iter() {
                if y == x {
                    continue;
                }
                let between = self.up[x]
                    .intersection(&self.down[y])
                    .iter()
                    .any(|z| z != x && z != y);
                if !between {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Same elements with every comparison reversed.
    pub fn reversed(&self) -> Poset {
        Poset { n: self.n, up: self.down.clone(), down: self.up.clone(), labels: self.labels.clone() }
    }

    /// Elements sorted so that every element comes after everything below it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&x| (self.down[x].len(), x));
        order
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.n).find(|&x| self.up[x].len() == self.n)
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.n).find(|&x| self.down[x].len() == self.n)
    }

    /// All decreasing subsets, in canonical (binary value) order.
    pub fn decreasing_sets(&self) -> Result<Vec<ElementSet>> {
        self.decreasing_sets_capped(DEFAULT_FAMILY_CAP)
    }

    pub fn decreasing_sets_capped(&self, cap: usize) -> Result<Vec<ElementSet>> {
        let order = self.linear_extension();
        let mut out = Vec::new();
        let mut current = ElementSet::empty(self.n);
        self.enumerate_dec(&order, 0, &mut current, &mut out, cap)?;
        out.sort();
        Ok(out)
    }

    fn enumerate_dec(
        &self,
        order: &[usize],
        pos: usize,
        current: &mut ElementSet,
        out: &mut Vec<ElementSet>,
        cap: usize,
    ) -> Result<()> {
        if pos == order.len() {
            if out.len() >= cap {
                return Err(Error::ClosureTooLarge { cap });
            }
            out.push(current.clone());
            return Ok(());
        }
        let x = order[pos];
        self.enumerate_dec(order, pos + 1, current, out, cap)?;
        let mut below = self.down[x].clone();
        below.remove(x);
        if below.is_subset(current) {
            current.insert(x);
            self.enumerate_dec(order, pos + 1, current, out, cap)?;
            current.remove(x);
        }
        Ok(())
    }

    /// All increasing subsets (complements of the decreasing ones), sorted.
    pub fn increasing_sets(&self) -> Result<Vec<ElementSet>> {
        let mut v: Vec<ElementSet> = self.decreasing_sets()?.iter().map(ElementSet::complement).collect();
        v.sort();
        Ok(v)
    }

    /// Induced order on `elements`, re-indexed `0..elements.len()` in the given order.
    pub fn subposet(&self, elements: &[usize]) -> Poset {
        let mut p = Self::from_relation_unchecked(elements.len(), |a, b| {
            self.leq(elements[a], elements[b])
        });
        if self.labels.is_some() {
            p.labels = Some(elements.iter().map(|&x| self.label(x)).collect());
        }
        p
    }

    /// Dual poset `S′` through the bijection `prime`; see [`DualPosetView`].
    pub fn dual_view(&self, prime: Vec<usize>) -> Result<DualPosetView> {
        DualPosetView::new(self.clone(), prime)
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson { n: self.n, cover: self.covers().into_iter().map(|(a, b)| [a, b]).collect(), labels: self.labels.clone() }
    }

    pub fn from_json(j: &PosetJson) -> Result<Self> {
        let covers: Vec<(usize, usize)> = j.cover.iter().map(|c| (c[0], c[1])).collect();
        let p = Self::from_covers(j.n, &covers)?;
        match &j.labels {
            Some(l) => p.with_labels(l.clone()),
            None => Ok(p),
        }
    }
}

/// Wire form of a poset: covers only (Hasse form); covers are transitively
/// closed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosetJson {
    pub n: usize,
    pub cover: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// A dual `S′` of a poset `S`: a bijection `x ↦ x′ = prime[x]` with
/// `x ≤ y ⇔ x′ ≥ y′`.
///
/// Element `a` of `S′` carries the label of element `a` of `S`; with the
/// usual choices (`S′ = S` as a set) this makes `x′` read naturally, e.g. the
/// complement of a subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPosetView {
    base: Poset,
    prime: Vec<usize>,
    unprime: Vec<usize>,
    dual: Poset,
}

impl DualPosetView {
    pub fn new(base: Poset, prime: Vec<usize>) -> Result<Self> {
        let n = base.len();
        if prime.len() != n {
            return Err(Error::NotBijective { n, detail: format!("length {}", prime.len()) });
        }
        let mut unprime = vec![usize::MAX; n];
        for (x, &y) in prime.iter().enumerate() {
            if y >= n {
                return Err(Error::NotBijective { n, detail: format!("{x} ↦ {y} out of range") });
            }
            if unprime[y] != usize::MAX {
                return Err(Error::NotBijective { n, detail: format!("{y} hit twice") });
            }
            unprime[y] = x;
        }
        let mut dual = Poset::from_relation_unchecked(n, |a, b| base.leq(unprime[b], unprime[a]));
        dual.labels = base.labels.clone();
        Ok(DualPosetView { base, prime, unprime, dual })
    }

    /// Reversed order with the identity bijection.
    pub fn reversed(base: Poset) -> Self {
        let n = base.len();
        Self::new(base, (0..n).collect()).expect("identity is a bijection")
    }

    pub fn base(&self) -> &Poset {
        &self.base
    }

    /// `S′` materialised as a poset.
    pub fn poset(&self) -> &Poset {
        &self.dual
    }

    /// `x ↦ x′` from `S` to `S′`.
    pub fn prime(&self, x: usize) -> usize {
        self.prime[x]
    }

    /// `y ↦ y′` from `S′` back to `S′′ = S`.
    pub fn unprime(&self, y: usize) -> usize {
        self.unprime[y]
    }

    pub fn prime_map(&self) -> &[usize] {
        &self.prime
    }

    /// `(S′)′` using the inverse bijection; equals the base poset.
    pub fn double_dual(&self) -> DualPosetView {
        DualPosetView::new(self.dual.clone(), self.unprime.clone()).expect("inverse is a bijection")
    }
}

/// Coordinatewise product with mixed-radix little-endian indexing: the
/// element with coordinates `(c_0, c_1, …)` has index
/// `c_0 + n_0·(c_1 + n_1·(c_2 + …))`, so factor 0 varies fastest.
/// Labels concatenate factor labels with factor 0 first.
pub fn product_poset(factors: &[Poset]) -> Result<Poset> {
    product_poset_capped(factors, DEFAULT_CAP)
}

pub fn product_poset_capped(factors: &[Poset], cap: usize) -> Result<Poset> {
    let mut total: usize = 1;
    for f in factors {
        total = total.checked_mul(f.len()).filter(|&t| t <= cap).ok_or(Error::TooLarge {
            n: factors.iter().map(Poset::len).fold(1usize, |a, b| a.saturating_mul(b)),
            cap,
        })?;
    }
    let coords = |mut idx: usize| -> Vec<usize> {
        factors
            .iter()
            .map(|f| {
                let c = idx % f.len();
                idx /= f.len();
                c
            })
            .collect()
    };
    let all: Vec<Vec<usize>> = (0..total).map(coords).collect();
    let mut p = Poset::from_relation_unchecked(total, |x, y| {
        factors.iter().enumerate().all(|(k, f)| f.leq(all[x][k], all[y][k]))
    });
    let short = factors.iter().all(|f| f.labels().iter().all(|l| l.chars().count() == 1));
    let sep = if short { "" } else { "," };
    p.labels = Some(
        all.iter()
            .map(|c| {
                c.iter().enumerate().map(|(k, &ck)| factors[k].label(ck)).collect::<Vec<_>>().join(sep)
            })
            .collect(),
    );
    Ok(p)
}

/// Coordinates of a product element (inverse of the mixed-radix index).
pub fn product_coords(sizes: &[usize], mut idx: usize) -> Vec<usize> {
    sizes
        .iter()
        .map(|&n| {
            let c = idx % n;
            idx /= n;
            c
        })
        .collect()
}

pub fn product_index(sizes: &[usize], coords: &[usize]) -> usize {
    let mut idx = 0;
    for (k, &n) in sizes.iter().enumerate().rev() {
        idx = idx * n + coords[k];
    }
    idx
}

/// Random poset: coin flips on the upper triangle of a random permutation,
/// then transitive closure. Uniformity is not a goal.
pub fn random_poset(rng: &mut SplitMix64, n: usize, edge_prob: f64) -> Poset {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.below(i + 1));
    }
    let mut covers = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.open01() < edge_prob {
                covers.push((perm[a], perm[b]));
            }
        }
    }
    Poset::from_covers(n, &covers).expect("upper-triangular relation is acyclic")
}
