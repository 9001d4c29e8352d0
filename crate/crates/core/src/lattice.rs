//! Lattice structure on finite posets: join/meet tables, distributivity,
//! Birkhoff representation, and the join-semilattice-of-sets embedding with
//! its additive-map extension.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poset::{ElementSet, Poset, PosetJson};

/// Join/meet tables and lattice flags of a poset.
#[derive(Debug, Clone)]
pub struct LatticeInfo {
    base: Poset,
    join: Vec<Option<usize>>,
    meet: Vec<Option<usize>>,
    bottom: Option<usize>,
    top: Option<usize>,
    pub is_join_semilattice: bool,
    pub is_meet_semilattice: bool,
    pub is_lattice: bool,
    pub is_distributive: bool,
    /// First `(x, y, z)` with `x∧(y∨z) ≠ (x∧y)∨(x∧z)`, for lattices only.
    pub distributivity_witness: Option<(usize, usize, usize)>,
}

/// Least element `z` of `U` if `{z}↑ = U`.
fn generator_of(up_rows: impl Fn(usize) -> ElementSet, u: &ElementSet) -> Option<usize> {
    let size = u.len();
    u.iter().find(|&z| up_rows(z).len() == size && up_rows(z).is_subset(u))
}

pub fn analyze_lattice(p: &Poset) -> LatticeInfo {
    let n = p.len();
    let mut join = vec![None; n * n];
    let mut meet = vec![None; n * n];
    for x in 0..n {
        for y in x..n {
            let u = p.up_of(x).intersection(p.up_of(y));
            let j = generator_of(|z| p.up_of(z).clone(), &u);
            let d = p.down_of(x).intersection(p.down_of(y));
            let m = generator_of(|z| p.down_of(z).clone(), &d);
            join[x * n + y] = j;
            join[y * n + x] = j;
            meet[x * n + y] = m;
            meet[y * n + x] = m;
        }
    }
    let is_join_semilattice = join.iter().all(Option::is_some);
    let is_meet_semilattice = meet.iter().all(Option::is_some);
    let is_lattice = n > 0 && is_join_semilattice && is_meet_semilattice;
    let mut info = LatticeInfo {
        base: p.clone(),
        join,
        meet,
        bottom: p.bottom(),
        top: p.top(),
        is_join_semilattice,
        is_meet_semilattice,
        is_lattice,
        is_distributive: false,
        distributivity_witness: None,
    };
    if is_lattice {
        info.distributivity_witness = info.find_distributivity_violation();
        info.is_distributive = info.distributivity_witness.is_none();
    }
    info
}

impl LatticeInfo {
    pub fn base(&self) -> &Poset {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn join(&self, x: usize, y: usize) -> Option<usize> {
        self.join[x * self.len() + y]
    }

    pub fn meet(&self, x: usize, y: usize) -> Option<usize> {
        self.meet[x * self.len() + y]
    }

    pub fn bottom(&self) -> Option<usize> {
        self.bottom
    }

    pub fn top(&self) -> Option<usize> {
        self.top
    }

    fn require_lattice(&self) -> Result<()> {
        if self.is_lattice {
            Ok(())
        } else {
            Err(Error::NotALattice(format!("{}-element poset has no join or meet table", self.len())))
        }
    }

    fn find_distributivity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        let j = |a, b| self.join(a, b).unwrap();
        let m = |a, b| self.meet(a, b).unwrap();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if m(x, j(y, z)) != j(m(x, y), m(x, z)) {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// Elements `x ≠ 0` such that `x = a∨b` forces `x ∈ {a, b}`.
    pub fn join_irreducibles(&self) -> Result<ElementSet> {
        self.require_lattice()?;
        let n = self.len();
        let bottom = self.bottom.expect("finite lattice has a bottom");
        let mut out = ElementSet::empty(n);
        for x in 0..n {
            if x == bottom {
                continue;
            }
            let reducible = (0..n).any(|a| (0..n).any(|b| a != x && b != x && self.join(a, b) == Some(x)));
            if !reducible {
                out.insert(x);
            }
        }
        Ok(out)
    }
}

/// A list of distinct subsets of a ground poset `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFamily {
    ground: Poset,
    sets: Vec<ElementSet>,
    index: HashMap<ElementSet, usize>,
}

impl SetFamily {
    /// Drops repeated sets, keeping the first occurrence's position.
    pub fn new(ground: Poset, sets: Vec<ElementSet>) -> Result<Self> {
        let n = ground.len();
        let mut out = SetFamily { ground, sets: Vec::new(), index: HashMap::new() };
        for s in sets {
            if s.universe() != n {
                return Err(Error::Dimension(format!("set over {} elements, ground has {n}", s.universe())));
            }
            out.push(s);
        }
        Ok(out)
    }

    /// `P_dec(Λ)` in canonical order.
    pub fn decreasing_sets(ground: Poset) -> Result<Self> {
        let sets = ground.decreasing_sets()?;
        Self::new(ground, sets)
    }

    fn push(&mut self, s: ElementSet) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        let i = self.sets.len();
        self.index.insert(s.clone(), i);
        self.sets.push(s);
        i
    }

    pub fn ground(&self) -> &Poset {
        &self.ground
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }

    pub fn get(&self, i: usize) -> &ElementSet {
        &self.sets[i]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn index_of(&self, s: &ElementSet) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn is_union_closed(&self) -> bool {
        self.index_of(&ElementSet::empty(self.ground.len())).is_some()
            && self.sets.iter().all(|a| self.sets.iter().all(|b| self.index.contains_key(&a.union(b))))
    }

    pub fn is_intersection_closed(&self) -> bool {
        self.sets.iter().all(|a| self.sets.iter().all(|b| self.index.contains_key(&a.intersection(b))))
    }

    pub fn is_decreasing_family(&self) -> bool {
        self.sets.iter().all(|s| self.ground.is_decreasing(s))
    }

    /// The family ordered by inclusion, indexed like [`SetFamily::sets`].
    pub fn inclusion_poset(&self) -> Poset {
        let mut p = Poset::from_relation_unchecked(self.len(), |a, b| self.sets[a].is_subset(&self.sets[b]));
        let labels = self.sets.iter().map(|s| self.ground.set_label(s)).collect();
        p = p.with_labels(labels).expect("one label per set");
        p
    }

    pub fn to_json(&self) -> SetFamilyJson {
        let g = self.ground.to_json();
        SetFamilyJson { ground_n: g.n, ground_cover: g.cover, sets: self.sets.iter().map(ElementSet::to_vec).collect() }
    }

    pub fn from_json(j: &SetFamilyJson) -> Result<Self> {
        let ground = Poset::from_json(&PosetJson { n: j.ground_n, cover: j.ground_cover.clone(), labels: None })?;
        let mut sets = Vec::new();
        for s in &j.sets {
            if let Some(&bad) = s.iter().find(|&&x| x >= j.ground_n) {
                return Err(Error::Dimension(format!("set member {bad} outside ground of size {}", j.ground_n)));
            }
            sets.push(ElementSet::from_indices(j.ground_n, s.iter().copied()));
        }
        Self::new(ground, sets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFamilyJson {
    pub ground_n: usize,
    pub ground_cover: Vec<[usize; 2]>,
    pub sets: Vec<Vec<usize>>,
}

/// Birkhoff representation of a distributive lattice.
#[derive(Debug, Clone)]
pub struct BirkhoffRep {
    /// Join-irreducible elements, in increasing index order.
    pub irreducibles: Vec<usize>,
    /// The irreducibles with the induced order, re-indexed `0..k`.
    pub lambda: Poset,
    /// `P_dec(Λ)` in canonical order.
    pub family: SetFamily,
    /// Lattice element → index into `family`.
    pub iso: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum BirkhoffOutcome {
    Represented(BirkhoffRep),
    NotDistributive { witness: (usize, usize, usize) },
}

/// `x ↦ {j join-irreducible : j ≤ x}`, verified to be a bijection onto
/// `P_dec(Λ)` carrying joins to unions and meets to intersections.
pub fn birkhoff_represent(l: &LatticeInfo) -> Result<BirkhoffOutcome> {
    l.require_lattice()?;
    if let Some(witness) = l.distributivity_witness {
        return Ok(BirkhoffOutcome::NotDistributive { witness });
    }
    let p = l.base();
    let irreducibles = l.join_irreducibles()?.to_vec();
    let lambda = p.subposet(&irreducibles);
    let family = SetFamily::decreasing_sets(lambda.clone())?;
    let k = irreducibles.len();
    let rep_of = |x: usize| {
        ElementSet::from_indices(k, (0..k).filter(|&a| p.leq(irreducibles[a], x)))
    };
    let sets: Vec<ElementSet> = (0..l.len()).map(rep_of).collect();
    let mut iso = Vec::with_capacity(l.len());
    for s in &sets {
        let i = family
            .index_of(s)
            .ok_or_else(|| Error::NotALattice(format!("{s:?} is not a decreasing set of irreducibles")))?;
        iso.push(i);
    }
    let mut hit = vec![false; family.len()];
    for &i in &iso {
        if std::mem::replace(&mut hit[i], true) {
            return Err(Error::NotBijective { n: l.len(), detail: format!("decreasing set {i} hit twice") });
        }
    }
    if hit.iter().any(|h| !h) {
        return Err(Error::NotBijective { n: l.len(), detail: "representation is not onto".into() });
    }
    for x in 0..l.len() {
        for y in 0..l.len() {
            let j = l.join(x, y).unwrap();
            let m = l.meet(x, y).unwrap();
            if sets[j] != sets[x].union(&sets[y]) || sets[m] != sets[x].intersection(&sets[y]) {
                return Err(Error::NotALattice(format!("representation breaks at ({x},{y})")));
            }
        }
    }
    Ok(BirkhoffOutcome::Represented(BirkhoffRep { irreducibles, lambda, family, iso }))
}

/// `x ↦ ({x}↑)^c` over ground `S` with its own order; member `x` of the
/// result is the image of lattice element `x`.
pub fn embed_join_semilattice(l: &LatticeInfo) -> Result<SetFamily> {
    if !l.is_join_semilattice || l.bottom().is_none() {
        return Err(Error::NotALattice("embedding needs joins and a bottom element".into()));
    }
    let p = l.base();
    let sets: Vec<ElementSet> = (0..p.len()).map(|x| p.up_of(x).complement()).collect();
    let family = SetFamily::new(p.clone(), sets.clone())?;
    if family.len() != p.len() || !sets[l.bottom().unwrap()].is_empty() {
        return Err(Error::NotBijective { n: p.len(), detail: "embedding is not a (0,∨)-isomorphism".into() });
    }
    for x in 0..p.len() {
        for y in 0..p.len() {
            if sets[l.join(x, y).unwrap()] != sets[x].union(&sets[y]) {
                return Err(Error::NotALattice(format!("embedding breaks the join of ({x},{y})")));
            }
        }
    }
    Ok(family)
}

/// An additive self-map of `P_dec(Λ)` given by image indices into `full`.
#[derive(Debug, Clone)]
pub struct AdditiveExtension {
    pub full: SetFamily,
    pub img: Vec<usize>,
}

fn check_additive_on_family(t: &SetFamily, m: &[usize]) -> Result<()> {
    let empty = t.index_of(&ElementSet::empty(t.ground().len())).expect("union-closed family holds ∅");
    if !t.get(m[empty]).is_empty() {
        return Err(Error::NotAdditive { map: "m".into(), detail: "m(∅) ≠ ∅".into() });
    }
    for a in 0..t.len() {
        for b in 0..t.len() {
            let ab = t.index_of(&t.get(a).union(t.get(b))).expect("union-closed");
            if *t.get(m[ab]) != t.get(m[a]).union(t.get(m[b])) {
                return Err(Error::NotAdditive {
                    map: "m".into(),
                    detail: format!("m({a} ∪ {b}) ≠ m({a}) ∪ m({b})"),
                });
            }
        }
    }
    Ok(())
}

/// Extends an additive self-map `m` of a union-closed family `T ⊂ P_dec(Λ)`
/// (images given as indices into `T`) to all of `P_dec(Λ)`.
///
/// Missing sets `x` are adjoined in ascending cardinality, ties by canonical
/// order. Each step sets `m̄(x∪y) = m(y) ∪ ⋂{m(z) : x ⊂ z ∈ T}` for every
/// `y` in the current family; an empty intersection is `Λ`.
pub fn extend_additive_map(t: &SetFamily, m: &[usize]) -> Result<AdditiveExtension> {
    if m.len() != t.len() {
        return Err(Error::Dimension(format!("map has {} images for {} sets", m.len(), t.len())));
    }
    if let Some(&bad) = m.iter().find(|&&i| i >= t.len()) {
        return Err(Error::Dimension(format!("image index {bad} outside the family")));
    }
    if !t.is_union_closed() || !t.is_decreasing_family() {
        return Err(Error::NotALattice("family must contain ∅, be union-closed and consist of decreasing sets".into()));
    }
    check_additive_on_family(t, m)?;
    let ground = t.ground().clone();
    let n = ground.len();
    let full = SetFamily::decreasing_sets(ground)?;

    let mut value: HashMap<ElementSet, ElementSet> =
        (0..t.len()).map(|i| (t.get(i).clone(), t.get(m[i]).clone())).collect();
    let mut current: Vec<ElementSet> = t.sets().to_vec();

    let mut pending: Vec<&ElementSet> = full.sets().iter().collect();
    pending.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    for x in pending {
        if value.contains_key(x) {
            continue;
        }
        let mut cap = ElementSet::full(n);
        for z in current.iter().filter(|z| x.is_subset(z)) {
            cap.intersect_with(&value[z]);
        }
        let mut added = Vec::new();
        for y in &current {
            let xy = x.union(y);
            if !value.contains_key(&xy) {
                let v = value[y].union(&cap);
                value.insert(xy.clone(), v);
                added.push(xy);
            }
        }
        current.extend(added);
    }
    let img = full
        .sets()
        .iter()
        .map(|s| full.index_of(&value[s]).expect("images are decreasing sets"))
        .collect();
    Ok(AdditiveExtension { full, img })
}

/// `M3`: bottom `0`, incomparable `a`, `b`, `c`, top `1`.
pub fn m3() -> Poset {
    Poset::from_covers(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)])
        .and_then(|p| p.with_labels(["0", "a", "b", "c", "1"].map(String::from).to_vec()))
        .expect("M3 fixture")
}

/// `N5`: bottom `0`, chain `a < b` beside `c`, top `1`.
pub fn n5() -> Poset {
    Poset::from_covers(5, &[(0, 1), (1, 2), (0, 3), (2, 4), (3, 4)])
        .and_then(|p| p.with_labels(["0", "a", "b", "c", "1"].map(String::from).to_vec()))
        .expect("N5 fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::product_poset;

    #[test]
    fn classification_examples() {
        let sq = analyze_lattice(&Poset::boolean(2).unwrap());
        assert!(sq.is_lattice && sq.is_distributive);
        assert_eq!(sq.join(1, 2), Some(3));
        assert_eq!(sq.meet(1, 2), Some(0));
        let m = analyze_lattice(&m3());
        assert!(m.is_lattice && !m.is_distributive);
        let (x, y, z) = m.distributivity_witness.unwrap();
        assert_ne!(m.meet(x, m.join(y, z).unwrap()), m.join(m.meet(x, y).unwrap(), m.meet(x, z).unwrap()));
        assert!(!analyze_lattice(&n5()).is_distributive);
        let a = analyze_lattice(&Poset::antichain(3));
        assert!(!a.is_join_semilattice && !a.is_lattice);
    }

    #[test]
    fn join_irreducible_examples() {
        let c = analyze_lattice(&Poset::chain(3));
        assert_eq!(c.join_irreducibles().unwrap().to_vec(), vec![1, 2]);
        let b = analyze_lattice(&Poset::boolean(2).unwrap());
        assert_eq!(b.join_irreducibles().unwrap().to_vec(), vec![1, 2]);
        let one = analyze_lattice(&Poset::chain(1));
        assert!(one.join_irreducibles().unwrap().is_empty());
        assert!(analyze_lattice(&Poset::antichain(2)).join_irreducibles().is_err());
    }

    #[test]
    fn birkhoff_chain_and_m3() {
        let c = analyze_lattice(&Poset::chain(3));
        let BirkhoffOutcome::Represented(rep) = birkhoff_represent(&c).unwrap() else { panic!() };
        assert_eq!(rep.lambda, Poset::chain(2));
        assert_eq!(rep.family.len(), 3);
        assert!(matches!(birkhoff_represent(&analyze_lattice(&m3())).unwrap(), BirkhoffOutcome::NotDistributive { .. }));
    }

    #[test]
    fn birkhoff_round_trip_on_decreasing_sets() {
        let ground = product_poset(&[Poset::chain(2), Poset::antichain(2)]).unwrap();
        let fam = SetFamily::decreasing_sets(ground).unwrap();
        let l = analyze_lattice(&fam.inclusion_poset());
        let BirkhoffOutcome::Represented(rep) = birkhoff_represent(&l).unwrap() else { panic!() };
        assert_eq!(rep.family.len(), fam.len());
        assert_eq!(rep.lambda.len(), fam.ground().len());
    }

    #[test]
    fn embedding_examples() {
        let c = embed_join_semilattice(&analyze_lattice(&Poset::chain(3))).unwrap();
        let got: Vec<Vec<usize>> = c.sets().iter().map(ElementSet::to_vec).collect();
        assert_eq!(got, vec![vec![], vec![0], vec![0, 1]]);
        for l in [m3(), n5()] {
            let f = embed_join_semilattice(&analyze_lattice(&l)).unwrap();
            assert_eq!(f.len(), 5);
            assert!(f.is_union_closed() && f.is_decreasing_family());
            assert!(!f.is_intersection_closed());
        }
        let one = embed_join_semilattice(&analyze_lattice(&Poset::chain(1))).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.get(0).is_empty());
    }

    fn assert_additive(ext: &AdditiveExtension) {
        let f = &ext.full;
        assert!(f.get(ext.img[f.index_of(&ElementSet::empty(f.ground().len())).unwrap()]).is_empty());
        for a in 0..f.len() {
            for b in 0..f.len() {
                let ab = f.index_of(&f.get(a).union(f.get(b))).unwrap();
                assert_eq!(*f.get(ext.img[ab]), f.get(ext.img[a]).union(f.get(ext.img[b])));
            }
        }
    }

    #[test]
    fn extension_of_full_family_is_unchanged() {
        let t = SetFamily::decreasing_sets(Poset::chain(2)).unwrap();
        let m = vec![0, 0, 1];
        let ext = extend_additive_map(&t, &m).unwrap();
        assert_eq!(ext.img, m);
    }

    #[test]
    fn extension_of_identity_on_m3_embedding() {
        let t = embed_join_semilattice(&analyze_lattice(&m3())).unwrap();
        let id: Vec<usize> = (0..t.len()).collect();
        let ext = extend_additive_map(&t, &id).unwrap();
        assert_additive(&ext);
        for (i, &j) in ext.img.iter().enumerate() {
            assert_eq!(i, j);
        }
    }

    #[test]
    fn extension_of_zero_map_on_m3_embedding() {
        let t = embed_join_semilattice(&analyze_lattice(&m3())).unwrap();
        let zero = vec![0; t.len()];
        let ext = extend_additive_map(&t, &zero).unwrap();
        assert_additive(&ext);
        let top = ext.full.index_of(&ElementSet::full(5)).unwrap();
        for (i, &j) in ext.img.iter().enumerate() {
            // no member of T contains the whole ground set: empty intersection
            if i == top {
                assert_eq!(ext.full.get(j), &ElementSet::full(5));
            } else {
                assert!(ext.full.get(j).is_empty(), "set {i}");
            }
        }
    }

    #[test]
    fn extension_rejects_non_additive() {
        let t = SetFamily::decreasing_sets(Poset::antichain(2)).unwrap();
        // swaps ∅ with {0}
        assert!(matches!(extend_additive_map(&t, &[1, 0, 2, 3]), Err(Error::NotAdditive { .. })));
    }

    #[test]
    fn set_family_json_round_trip() {
        let t = embed_join_semilattice(&analyze_lattice(&n5())).unwrap();
        let j = serde_json::to_string(&t.to_json()).unwrap();
        let back = SetFamily::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back.sets(), t.sets());
    }
}
