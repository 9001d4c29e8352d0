//! Total maps between finite posets and their monotone/additive classification.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{analyze_lattice, m3, n5, LatticeInfo};
use crate::poset::{product_poset, ElementSet, Poset, PosetJson};

/// Codomain size up to which the decreasing-set cross-check of monotonicity runs.
pub const PREIMAGE_CHECK_CAP: usize = 20;

#[derive(Clone, PartialEq)]
pub struct PosetMap {
    domain: Arc<Poset>,
    codomain: Arc<Poset>,
    img: Vec<usize>,
    name: String,
}

impl std::fmt::Debug for PosetMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{:?}", self.name, self.img)
    }
}

/// Witness against additivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdditiveViolation {
    /// `m(0) ≠ 0`.
    Zero { image: usize },
    /// `m(x∨y) ≠ m(x)∨m(y)`.
    Join { x: usize, y: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotoneReport {
    pub monotone: bool,
    /// First `(x, y)` with `x ≤ y` and `m(x) ≰ m(y)`.
    pub witness: Option<(usize, usize)>,
    /// Verdict of "preimages of decreasing sets are decreasing"; `None` when
    /// the codomain exceeds [`PREIMAGE_CHECK_CAP`].
    pub preimage_check: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdditiveReport {
    pub additive: bool,
    pub witness: Option<AdditiveViolation>,
    /// Verdict of "preimages of (principal) ideals are principal ideals".
    pub preimage_check: bool,
}

impl PosetMap {
    pub fn new(domain: Arc<Poset>, codomain: Arc<Poset>, img: Vec<usize>, name: impl Into<String>) -> Result<Self> {
        if img.len() != domain.len() {
            return Err(Error::Dimension(format!("{} images for {} domain elements", img.len(), domain.len())));
        }
        if let Some((x, &y)) = img.iter().enumerate().find(|(_, &y)| y >= codomain.len()) {
            return Err(Error::Dimension(format!("image of {x} is {y}, codomain has {}", codomain.len())));
        }
        Ok(PosetMap { domain, codomain, img, name: name.into() })
    }

    /// Self-map of `space`.
    pub fn endo(space: &Arc<Poset>, img: Vec<usize>, name: impl Into<String>) -> Result<Self> {
        Self::new(space.clone(), space.clone(), img, name)
    }

    pub fn from_fn(space: &Arc<Poset>, name: impl Into<String>, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::endo(space, (0..space.len()).map(f).collect(), name)
    }

    pub fn identity(space: &Arc<Poset>) -> Self {
        Self::from_fn(space, "id", |x| x).expect("identity is total")
    }

    pub fn constant(space: &Arc<Poset>, c: usize) -> Result<Self> {
        Self::from_fn(space, format!("const{c}"), |_| c)
    }

    pub fn domain(&self) -> &Arc<Poset> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Poset> {
        &self.codomain
    }

    pub fn img(&self) -> &[usize] {
        &self.img
    }

    pub fn apply(&self, x: usize) -> usize {
        self.img[x]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `m⁻¹(A) = {x : m(x) ∈ A}`.
    pub fn inverse_image(&self, a: &ElementSet) -> Result<ElementSet> {
        if a.universe() != self.codomain.len() {
            return Err(Error::Dimension(format!(
                "set over {} elements, codomain has {}",
                a.universe(),
                self.codomain.len()
            )));
        }
        Ok(ElementSet::from_indices(self.domain.len(), (0..self.domain.len()).filter(|&x| a.contains(self.img[x]))))
    }

    /// Definitional check of `x ≤ y ⇒ m(x) ≤ m(y)`, first violating pair.
    pub fn monotone_witness(&self) -> Option<(usize, usize)> {
        for x in 0..self.domain.len() {
            for y in self.domain.up_of(x).iter() {
                if !self.codomain.leq(self.img[x], self.img[y]) {
                    return Some((x, y));
                }
            }
        }
        None
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone_witness().is_none()
    }

    pub fn monotone_report(&self) -> MonotoneReport {
        let witness = self.monotone_witness();
        let preimage_check = (self.codomain.len() <= PREIMAGE_CHECK_CAP).then(|| {
            self.codomain.decreasing_sets().expect("small codomain").iter().all(|a| {
                self.domain.is_decreasing(&self.inverse_image(a).expect("same universe"))
            })
        });
        MonotoneReport { monotone: witness.is_none(), witness, preimage_check }
    }

    /// `m(0) = 0` and `m(x∨y) = m(x)∨m(y)`, with precomputed join tables.
    pub fn additive_witness_with(&self, dom: &LatticeInfo, cod: &LatticeInfo) -> Result<Option<AdditiveViolation>> {
        let (Some(z0), Some(z1)) = (dom.bottom(), cod.bottom()) else {
            return Err(Error::NotALattice("additivity needs posets bounded from below".into()));
        };
        if !dom.is_join_semilattice || !cod.is_join_semilattice {
            return Err(Error::NotALattice("additivity needs join-semilattices".into()));
        }
        if dom.len() != self.domain.len() || cod.len() != self.codomain.len() {
            return Err(Error::Dimension("lattice tables do not match the map".into()));
        }
        if self.img[z0] != z1 {
            return Ok(Some(AdditiveViolation::Zero { image: self.img[z0] }));
        }
        for x in 0..self.domain.len() {
            for y in 0..self.domain.len() {
                let lhs = self.img[dom.join(x, y).unwrap()];
                if Some(lhs) != cod.join(self.img[x], self.img[y]) {
                    return Ok(Some(AdditiveViolation::Join { x, y }));
                }
            }
        }
        Ok(None)
    }

    pub fn is_additive_with(&self, dom: &LatticeInfo, cod: &LatticeInfo) -> Result<bool> {
        Ok(self.additive_witness_with(dom, cod)?.is_none())
    }

    pub fn is_additive(&self) -> Result<bool> {
        let dom = analyze_lattice(&self.domain);
        let cod = if Arc::ptr_eq(&self.domain, &self.codomain) { dom.clone() } else { analyze_lattice(&self.codomain) };
        self.is_additive_with(&dom, &cod)
    }

    /// Definitional check plus the preimage characterisation: in a finite
    /// join-semilattice every ideal is principal, so it suffices that each
    /// `m⁻¹({z}↓)` is a principal ideal.
    pub fn additive_report(&self) -> Result<AdditiveReport> {
        let dom = analyze_lattice(&self.domain);
        let cod = analyze_lattice(&self.codomain);
        let witness = self.additive_witness_with(&dom, &cod)?;
        let preimage_check = (0..self.codomain.len()).all(|z| {
            let pre = self.inverse_image(self.codomain.down_of(z)).expect("same universe");
            !pre.is_empty() && self.domain.classify_subset(&pre).principal_ideal
        });
        Ok(AdditiveReport { additive: witness.is_none(), witness, preimage_check })
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PosetMap) -> Result<PosetMap> {
        compose(self, first)
    }

    pub fn to_json(&self, domain: PosetRef) -> MapJson {
        MapJson { domain, img: self.img.clone(), name: Some(self.name.clone()) }
    }
}

/// `(m2 ∘ m1)(x) = m2(m1(x))`.
pub fn compose(m2: &PosetMap, m1: &PosetMap) -> Result<PosetMap> {
    if !(Arc::ptr_eq(&m1.codomain, &m2.domain) || m1.codomain == m2.domain) {
        return Err(Error::Dimension(format!("cannot compose {} after {}: posets differ", m2.name, m1.name)));
    }
    let img = m1.img.iter().map(|&y| m2.img[y]).collect();
    PosetMap::new(m1.domain.clone(), m2.codomain.clone(), img, format!("{}∘{}", m2.name, m1.name))
}

/// A poset given inline or by a builtin name: `chain:N`, `antichain:N`,
/// `bool:K`, `grid:AxBx…` (product of chains), `m3`, `n5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PosetRef {
    Builtin(String),
    Inline(PosetJson),
}

impl PosetRef {
    pub fn resolve(&self) -> Result<Poset> {
        match self {
            PosetRef::Inline(j) => Poset::from_json(j),
            PosetRef::Builtin(name) => builtin_poset(name),
        }
    }
}

pub fn builtin_poset(name: &str) -> Result<Poset> {
    let bad = || Error::Parse(format!("unknown poset `{name}`"));
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    match name.split_once(':') {
        None => match name {
            "m3" => Ok(m3()),
            "n5" => Ok(n5()),
            _ => Err(bad()),
        },
        Some(("chain", k)) => Ok(Poset::chain(num(k)?)),
        Some(("antichain", k)) => Ok(Poset::antichain(num(k)?)),
        Some(("bool", k)) => Poset::boolean(num(k)?),
        Some(("grid", dims)) => {
            let factors = dims.split('x').map(|d| num(d).map(Poset::chain)).collect::<Result<Vec<_>>>()?;
            product_poset(&factors)
        }
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub domain: PosetRef,
    pub img: Vec<usize>,
    #[serde(default)]
    pub name: Option<String>,
}

impl MapJson {
    pub fn resolve(&self) -> Result<PosetMap> {
        let p = Arc::new(self.domain.resolve()?);
        PosetMap::endo(&p, self.img.clone(), self.name.clone().unwrap_or_else(|| "m".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(p: Poset) -> Arc<Poset> {
        Arc::new(p)
    }

    /// Copy site 0 onto site 1 on `{0,1}^2`.
    fn vot01(s: &Arc<Poset>) -> PosetMap {
        PosetMap::from_fn(s, "vot01", |x| (x & 1) | ((x & 1) << 1)).unwrap()
    }

    /// Site 0 jumps to site 1 on `{0,1}^2`.
    fn rw01(s: &Arc<Poset>) -> PosetMap {
        PosetMap::from_fn(s, "rw01", |x| if x & 1 == 1 { (x & !1) | 2 } else { x }).unwrap()
    }

    /// `x(2) |= x(0) & x(1)` on `{0,1}^3`.
    fn b012(s: &Arc<Poset>) -> PosetMap {
        PosetMap::from_fn(s, "b012", |x| if x & 3 == 3 { x | 4 } else { x }).unwrap()
    }

    #[test]
    fn inverse_image_examples() {
        let s = arc(Poset::boolean(2).unwrap());
        let a = ElementSet::from_indices(4, [1, 3]);
        assert_eq!(PosetMap::identity(&s).inverse_image(&a).unwrap(), a);
        let c = PosetMap::constant(&s, 2).unwrap();
        assert_eq!(c.inverse_image(&ElementSet::singleton(4, 2)).unwrap(), ElementSet::full(4));
        assert!(c.inverse_image(&a).unwrap().is_empty());
        assert_eq!(vot01(&s).inverse_image(&ElementSet::singleton(4, 0)).unwrap().to_vec(), vec![0, 2]);
        assert!(c.inverse_image(&ElementSet::empty(3)).is_err());
    }

    #[test]
    fn monotone_examples() {
        let c2 = arc(Poset::chain(2));
        assert!(PosetMap::identity(&c2).is_monotone());
        let swap = PosetMap::endo(&c2, vec![1, 0], "swap").unwrap();
        let r = swap.monotone_report();
        assert_eq!(r.witness, Some((0, 1)));
        assert_eq!(r.preimage_check, Some(false));
        let cube = arc(Poset::boolean(3).unwrap());
        let r = b012(&cube).monotone_report();
        assert!(r.monotone && r.preimage_check == Some(true));
    }

    #[test]
    fn additive_examples() {
        let cube = arc(Poset::boolean(3).unwrap());
        assert!(PosetMap::identity(&cube).is_additive().unwrap());
        let r = b012(&cube).additive_report().unwrap();
        // x = 100, y = 010 in site-0-first labels
        assert_eq!(r.witness, Some(AdditiveViolation::Join { x: 1, y: 2 }));
        assert!(!r.preimage_check);
        let sq = arc(Poset::boolean(2).unwrap());
        for m in [vot01(&sq), rw01(&sq)] {
            let r = m.additive_report().unwrap();
            assert!(r.additive && r.preimage_check);
        }
        let anti = arc(Poset::antichain(2));
        assert!(PosetMap::identity(&anti).is_additive().is_err());
    }

    #[test]
    fn compose_examples() {
        let sq = arc(Poset::boolean(2).unwrap());
        let id = PosetMap::identity(&sq);
        let rw = rw01(&sq);
        assert_eq!(compose(&id, &rw).unwrap().img(), rw.img());
        assert_eq!(compose(&rw, &id).unwrap().img(), rw.img());
        assert_eq!(compose(&rw, &rw).unwrap().img(), rw.img());
        let other = PosetMap::identity(&arc(Poset::chain(3)));
        assert!(compose(&other, &rw).is_err());
    }

    #[test]
    fn map_json_round_trip() {
        let j: MapJson = serde_json::from_str(r#"{"domain":"bool:2","img":[0,3,2,3],"name":"vot01"}"#).unwrap();
        let m = j.resolve().unwrap();
        assert_eq!(m.img(), &[0, 3, 2, 3]);
        let j2: MapJson =
            serde_json::from_str(r#"{"domain":{"n":2,"cover":[[0,1]]},"img":[1,1]}"#).unwrap();
        assert_eq!(j2.resolve().unwrap().name(), "m");
        assert!(builtin_poset("grid:3x3").unwrap().len() == 9);
        assert!(builtin_poset("nope").is_err());
    }
}
