//! Built-in interacting particle systems and constructive decompositions into
//! monotone maps.
//!
//! Configurations of `{0,1}^Λ` are bitmasks with bit `i` for site `i`; their
//! labels are words `x(0)x(1)…`. Configurations of `{0,1,2}^Λ` use mixed-radix
//! indices with site 0 varying fastest.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::duality::{Antichain, DualityPairing, MonotoneDualKind, PsiTable};
use crate::error::{Error, Result};
use crate::flow::FlowSystem;
use crate::markov::{dual_rep_additive, dual_rep_monotone, GeneratorMatrix, RandomMappingRep, DEFAULT_CLOSURE_CAP};
use crate::maps::{PosetMap, PosetRef};
use crate::num::{Matrix, Scalar};
use crate::percolation::{map_to_mset, DecreasingSpace, MSet};
use crate::poset::{product_coords, product_index, product_poset, ElementSet, Poset};

/// A model: a random mapping representation with the pairing that defines its dual.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub rep: RandomMappingRep<f64>,
    pub pairing: DualityPairing,
    pub additive: bool,
    pub monotone: bool,
    /// Closed-form dual maps, aligned with the entries of `rep`, where known.
    pub stated_duals: Option<Vec<PosetMap>>,
    /// A user-supplied dual representation on `S′` that replaces the computed additive dual.
    pub proposed_dual: Option<RandomMappingRep<f64>>,
}

/// Which dual process a model is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualVariant {
    /// Additive dual maps on `S′`.
    Prime,
    Dagger,
    Star,
    Circ,
    Bullet,
}

impl DualVariant {
    pub fn monotone_kind(self) -> Option<MonotoneDualKind> {
        match self {
            DualVariant::Prime => None,
            DualVariant::Dagger => Some(MonotoneDualKind::Dagger),
            DualVariant::Star => Some(MonotoneDualKind::Star),
            DualVariant::Circ => Some(MonotoneDualKind::Circ),
            DualVariant::Bullet => Some(MonotoneDualKind::Bullet),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "prime" => Ok(DualVariant::Prime),
            "dagger" => Ok(DualVariant::Dagger),
            "star" => Ok(DualVariant::Star),
            "circ" => Ok(DualVariant::Circ),
            "bullet" => Ok(DualVariant::Bullet),
            _ => Err(Error::Parse(format!("unknown dual variant `{s}`"))),
        }
    }
}

/// A dual process ready for simulation: map `k` of the model has dual map
/// `dual_of[k]` in `system`, and `psi[x][j]` pairs model state `x` with dual state `j`.
#[derive(Debug, Clone)]
pub struct DualSystem {
    pub variant: DualVariant,
    pub system: FlowSystem,
    pub psi: PsiTable,
    pub dual_of: Vec<usize>,
    /// Dual states as antichains of `S′` (singletons for the additive dual).
    pub states: Vec<Antichain>,
}

impl Model {
    pub fn new(name: impl Into<String>, rep: RandomMappingRep<f64>, pairing: DualityPairing) -> Result<Self> {
        if **rep.space() != **pairing.space() {
            return Err(Error::Dimension("pairing and representation act on different spaces".into()));
        }
        // additivity is undefined without joins, so such models are not additive
        let additive = match rep.all_additive() {
            Ok(a) => a,
            Err(Error::NotALattice(_)) => false,
            Err(e) => return Err(e),
        };
        let monotone = rep.all_monotone();
        Ok(Model { name: name.into(), rep, pairing, additive, monotone, stated_duals: None, proposed_dual: None })
    }

    fn with_stated_duals(mut self, duals: Vec<PosetMap>) -> Self {
        self.stated_duals = Some(duals);
        self
    }

    pub fn space(&self) -> &Arc<Poset> {
        self.rep.space()
    }

    pub fn state_count(&self) -> usize {
        self.space().len()
    }

    pub fn map_count(&self) -> usize {
        self.rep.len()
    }

    pub fn system(&self) -> FlowSystem {
        FlowSystem::from_rep(&self.rep)
    }

    /// The default dual: additive when every map is additive, `m*` otherwise.
    pub fn default_variant(&self) -> DualVariant {
        if self.additive {
            DualVariant::Prime
        } else {
            DualVariant::Star
        }
    }

    /// All antichains of `S′`, as maximal elements of its decreasing sets.
    pub fn dual_antichains(&self) -> Result<Vec<Antichain>> {
        let d = self.pairing.dual_space();
        Ok(d.decreasing_sets()?.iter().map(|s| Antichain::from_set(s).maximal(d)).collect())
    }

    /// The dual process. Monotone variants close all antichains of `S′` under the dual maps.
    pub fn dual_system(&self, variant: DualVariant) -> Result<DualSystem> {
        let n = self.map_count();
        match variant.monotone_kind() {
            None => {
                let dual = match &self.proposed_dual {
                    Some(d) if d.len() == n => d.clone(),
                    Some(d) => return Err(Error::Dimension(format!("{} proposed dual maps for {n} maps", d.len()))),
                    None => dual_rep_additive(&self.pairing, &self.rep)?,
                };
                let states = (0..self.pairing.dual_space().len()).map(Antichain::singleton).collect();
                Ok(DualSystem {
                    variant,
                    system: FlowSystem::from_rep(&dual),
                    psi: self.pairing.pairing_table(),
                    dual_of: (0..n).collect(),
                    states,
                })
            }
            Some(kind) => {
                let seeds = self.dual_antichains()?;
                let dual = dual_rep_monotone(&self.pairing, &self.rep, &seeds, kind, DEFAULT_CLOSURE_CAP)?;
                let psi = if kind.uses_phi_tilde() {
                    self.pairing.phi_tilde_table(&dual.states)
                } else {
                    self.pairing.phi_table(&dual.states)
                };
                Ok(DualSystem { variant, system: FlowSystem::from_monotone_dual(&dual), psi, dual_of: (0..n).collect(), states: dual.states })
            }
        }
    }
}

fn check_rate(name: &str, r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::NegativeRate { map: name.to_string(), rate: r.to_string() });
    }
    Ok(())
}

fn push_map(entries: &mut Vec<(PosetMap, f64)>, map: PosetMap, rate: f64) -> Result<()> {
    check_rate(map.name(), rate)?;
    if rate > 0.0 {
        entries.push((map, rate));
    }
    Ok(())
}

fn bit(x: usize, i: usize) -> bool {
    x >> i & 1 == 1
}

fn set_bit(x: usize, i: usize, v: bool) -> usize {
    if v {
        x | 1 << i
    } else {
        x & !(1 << i)
    }
}

/// `{0,1}^Λ` with the complement pairing `x′ = 1 − x`, so `⟨x,y⟩ = 1{x ∧ y = 0}`.
pub fn spin_space(sites: usize) -> Result<(Arc<Poset>, DualityPairing)> {
    if sites > 12 {
        return Err(Error::TooLarge { n: 1 << sites.min(30), cap: 1 << 12 });
    }
    let space = Arc::new(Poset::boolean(sites)?);
    let full = (1usize << sites) - 1;
    let prime = (0..space.len()).map(|x| full & !x).collect();
    let pairing = DualityPairing::new(space.clone(), prime)?;
    Ok((space, pairing))
}

/// `vot_ij`: copies site `i` onto site `j`.
pub fn vot(space: &Arc<Poset>, i: usize, j: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("vot{i}{j}"), |x| set_bit(x, j, bit(x, i)))
}

/// `rw_ji`: a particle at `j` jumps to `i`, coalescing with one already there.
pub fn rw(space: &Arc<Poset>, j: usize, i: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("rw{j}{i}"), |x| if bit(x, j) { set_bit(set_bit(x, j, false), i, true) } else { x })
}

/// Branching `i → j`: if `i` is occupied, `j` becomes occupied.
pub fn branch(space: &Arc<Poset>, i: usize, j: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("bra{i}{j}"), |x| if bit(x, i) { set_bit(x, j, true) } else { x })
}

/// Death at `i`.
pub fn death(space: &Arc<Poset>, i: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("d{i}"), |x| set_bit(x, i, false))
}

/// Exclusion: swaps sites `i` and `j`.
pub fn exclusion(space: &Arc<Poset>, i: usize, j: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("e{i}{j}"), |x| set_bit(set_bit(x, i, bit(x, j)), j, bit(x, i)))
}

/// Voter model with rate `rates[i][j]` for `vot_ij`; dual maps `rw_ji`.
pub fn build_voter(sites: usize, rates: &[Vec<f64>]) -> Result<Model> {
    if rates.len() != sites || rates.iter().any(|r| r.len() != sites) {
        return Err(Error::Dimension(format!("voter rates must be {sites}×{sites}")));
    }
    let (space, pairing) = spin_space(sites)?;
    let mut entries = Vec::new();
    let mut duals = Vec::new();
    for i in 0..sites {
        for j in (0..sites).filter(|&j| j != i) {
            check_rate(&format!("vot{i}{j}"), rates[i][j])?;
            if rates[i][j] > 0.0 {
                entries.push((vot(&space, i, j)?, rates[i][j]));
                duals.push(rw(&space, j, i)?);
            }
        }
    }
    let rep = RandomMappingRep::new(space, entries)?;
    Ok(Model::new("voter", rep, pairing)?.with_stated_duals(duals))
}

pub fn uniform_rates(sites: usize, rate: f64) -> Vec<Vec<f64>> {
    (0..sites).map(|i| (0..sites).map(|j| if i == j { 0.0 } else { rate }).collect()).collect()
}

/// Contact process: branching `i → j` at `birth`, death at `death`. Self-dual.
pub fn build_contact(sites: usize, birth: f64, death_rate: f64) -> Result<Model> {
    let (space, pairing) = spin_space(sites)?;
    let mut entries = Vec::new();
    let mut duals = Vec::new();
    for i in 0..sites {
        for j in (0..sites).filter(|&j| j != i) {
            check_rate("birth", birth)?;
            if birth > 0.0 {
                entries.push((branch(&space, i, j)?, birth));
                duals.push(branch(&space, j, i)?);
            }
        }
    }
    for i in 0..sites {
        check_rate("death", death_rate)?;
        if death_rate > 0.0 {
            entries.push((death(&space, i)?, death_rate));
            duals.push(death(&space, i)?);
        }
    }
    let rep = RandomMappingRep::new(space, entries)?;
    Ok(Model::new("contact", rep, pairing)?.with_stated_duals(duals))
}

/// Rates of the five Krone map families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KroneRates {
    #[serde(default = "KroneRates::default_a")]
    pub a: f64,
    #[serde(default = "KroneRates::default_b")]
    pub b: f64,
    #[serde(default = "KroneRates::default_c")]
    pub c: f64,
    #[serde(default = "KroneRates::default_d")]
    pub d: f64,
    #[serde(default = "KroneRates::default_e")]
    pub e: f64,
}

impl KroneRates {
    fn default_a() -> f64 {
        1.0
    }
    fn default_b() -> f64 {
        1.0
    }
    fn default_c() -> f64 {
        0.5
    }
    fn default_d() -> f64 {
        0.25
    }
    fn default_e() -> f64 {
        0.125
    }
}

impl Default for KroneRates {
    fn default() -> Self {
        KroneRates { a: 1.0, b: 1.0, c: 0.5, d: 0.25, e: 0.125 }
    }
}

/// `{0,1,2}^Λ` with `x′(i) = 2 − x(i)`, so `⟨x,y⟩ = 1{x(i) + y(i) ≤ 2 ∀i}`.
pub fn krone_space(sites: usize) -> Result<(Arc<Poset>, DualityPairing)> {
    if sites > 8 {
        return Err(Error::TooLarge { n: 3usize.pow(sites.min(20) as u32), cap: 3usize.pow(8) });
    }
    let space = Arc::new(product_poset(&vec![Poset::chain(3); sites])?);
    let sizes = vec![3; sites];
    let prime = (0..space.len())
        .map(|x| {
            let c: Vec<usize> = product_coords(&sizes, x).iter().map(|v| 2 - v).collect();
            product_index(&sizes, &c)
        })
        .collect();
    let pairing = DualityPairing::new(space.clone(), prime)?;
    Ok((space, pairing))
}

fn krone_map(space: &Arc<Poset>, sites: usize, name: String, f: impl Fn(&mut [usize])) -> Result<PosetMap> {
    let sizes = vec![3; sites];
    PosetMap::from_fn(space, name, |x| {
        let mut c = product_coords(&sizes, x);
        f(&mut c);
        product_index(&sizes, &c)
    })
}

/// Grow up: `x(i) = 1 → 2`.
pub fn krone_a(space: &Arc<Poset>, sites: usize, i: usize) -> Result<PosetMap> {
    krone_map(space, sites, format!("a{i}"), |c| {
        if c[i] == 1 {
            c[i] = 2
        }
    })
}

/// Give birth: if `x(i) = 2` and `x(j) = 0`, then `x(j) = 1`.
pub fn krone_b(space: &Arc<Poset>, sites: usize, i: usize, j: usize) -> Result<PosetMap> {
    krone_map(space, sites, format!("b{i}{j}"), |c| {
        if c[i] == 2 && c[j] == 0 {
            c[j] = 1
        }
    })
}

/// Young dies: `x(i) = 1 → 0`.
pub fn krone_c(space: &Arc<Poset>, sites: usize, i: usize) -> Result<PosetMap> {
    krone_map(space, sites, format!("c{i}"), |c| {
        if c[i] == 1 {
            c[i] = 0
        }
    })
}

/// Death: `x(i) → 0`.
pub fn krone_d(space: &Arc<Poset>, sites: usize, i: usize) -> Result<PosetMap> {
    krone_map(space, sites, format!("d{i}"), |c| c[i] = 0)
}

/// Grow younger: `x(i) = 2 → 1`.
pub fn krone_e(space: &Arc<Poset>, sites: usize, i: usize) -> Result<PosetMap> {
    krone_map(space, sites, format!("e{i}"), |c| {
        if c[i] == 2 {
            c[i] = 1
        }
    })
}

/// Two-stage contact process on `{0,1,2}^Λ`. Dual maps: `a′_i = a_i`,
/// `b′_ij = b_ji`, `c′_i = e_i`, `d′_i = d_i`, `e′_i = c_i`.
pub fn build_krone(sites: usize, rates: KroneRates) -> Result<Model> {
    let (space, pairing) = krone_space(sites)?;
    let mut entries = Vec::new();
    let mut duals = Vec::new();
    let mut add = |m: PosetMap, dual: PosetMap, r: f64| -> Result<()> {
        check_rate(m.name(), r)?;
        if r > 0.0 {
            entries.push((m, r));
            duals.push(dual);
        }
        Ok(())
    };
    for i in 0..sites {
        add(krone_a(&space, sites, i)?, krone_a(&space, sites, i)?, rates.a)?;
    }
    for i in 0..sites {
        for j in (0..sites).filter(|&j| j != i) {
            add(krone_b(&space, sites, i, j)?, krone_b(&space, sites, j, i)?, rates.b)?;
        }
    }
    for i in 0..sites {
        add(krone_c(&space, sites, i)?, krone_e(&space, sites, i)?, rates.c)?;
    }
    for i in 0..sites {
        add(krone_d(&space, sites, i)?, krone_d(&space, sites, i)?, rates.d)?;
    }
    for i in 0..sites {
        add(krone_e(&space, sites, i)?, krone_c(&space, sites, i)?, rates.e)?;
    }
    let rep = RandomMappingRep::new(space, entries)?;
    Ok(Model::new("krone", rep, pairing)?.with_stated_duals(duals))
}

/// The set coding of `{0,1,2}^Λ`: `x(i) = 0, 1, 2` is `{σ : (i,σ) ∈ x} = ∅, {0}, {0,1}`
/// in `P_dec(Λ×{0,1})`, and for the dual `∅, {1}, {0,1}` in `P_inc(Λ×{0,1})`.
/// Site `(i,σ)` has index `i + |Λ|·σ`.
#[derive(Debug, Clone)]
pub struct KroneSetCoding {
    pub sites: usize,
    pub space: DecreasingSpace,
    /// Product index to index in `space`.
    pub to_set: Vec<usize>,
    /// `P_dec` of the reversed ground, i.e. the increasing sets.
    pub dual_space: DecreasingSpace,
    /// Dual product index to index in `dual_space`.
    pub dual_to_set: Vec<usize>,
}

impl KroneSetCoding {
    pub fn new(sites: usize) -> Result<Self> {
        let ground = Arc::new(product_poset(&[Poset::antichain(sites), Poset::chain(2)])?);
        let space = DecreasingSpace::new(ground.clone())?;
        let dual_space = DecreasingSpace::new(Arc::new(ground.reversed()))?;
        let sizes = vec![3; sites];
        let total = 3usize.pow(sites as u32);
        let encode = |levels: &[usize], top: bool| {
            ElementSet::from_indices(
                2 * sites,
                (0..sites).flat_map(|i| (0..levels[i]).map(move |b| i + sites * if top { 1 - b } else { b })),
            )
        };
        let to_set = (0..total)
            .map(|x| space.index_of(&encode(&product_coords(&sizes, x), false)).expect("levels give decreasing sets"))
            .collect::<Vec<_>>();
        let dual_to_set = (0..total)
            .map(|y| dual_space.index_of(&encode(&product_coords(&sizes, y), true)).expect("levels give increasing sets"))
            .collect::<Vec<_>>();
        let coding = KroneSetCoding { sites, space, to_set, dual_space, dual_to_set };
        coding.verify()?;
        Ok(coding)
    }

    /// Both codings are order isomorphisms onto all of `P_dec`, and the
    /// complement pairing agrees with `x(i) + y(i) ≤ 2`.
    pub fn verify(&self) -> Result<()> {
        let (product, pairing) = krone_space(self.sites)?;
        let n = product.len();
        let onto = |v: &[usize], len: usize| {
            let mut seen = vec![false; len];
            v.iter().for_each(|&i| seen[i] = true);
            v.len() == len && seen.iter().all(|&s| s)
        };
        if !onto(&self.to_set, self.space.len()) || !onto(&self.dual_to_set, self.dual_space.len()) {
            return Err(Error::NotBijective { n, detail: "set coding is not onto".into() });
        }
        for x in 0..n {
            for y in 0..n {
                let (a, b) = (self.space.set(self.to_set[x]), self.space.set(self.to_set[y]));
                if product.leq(x, y) != a.is_subset(b) {
                    return Err(Error::NotBijective { n, detail: format!("order not preserved at ({x},{y})") });
                }
                let yd = pairing.prime(y);
                let dual = self.dual_space.set(self.dual_to_set[yd]);
                if (pairing.pairing_value(x, yd) == 1) != a.is_disjoint(dual) {
                    return Err(Error::NotBijective { n, detail: format!("pairing differs at ({x},{y})") });
                }
            }
        }
        Ok(())
    }

    /// Transports a self-map of the product coding to the set coding.
    pub fn transport(&self, m: &PosetMap) -> Result<PosetMap> {
        let mut img = vec![0; self.space.len()];
        for (x, &sx) in self.to_set.iter().enumerate() {
            img[sx] = self.to_set[m.apply(x)];
        }
        PosetMap::endo(self.space.space(), img, m.name())
    }

    /// Pair sets drawing each map of `rep` as arrows and blocking symbols on `Λ×{0,1}`.
    pub fn msets(&self, rep: &RandomMappingRep<f64>) -> Result<Vec<MSet>> {
        rep.entries().iter().map(|(m, _)| map_to_mset(&self.space, &self.transport(m)?)).collect()
    }
}

/// Pair sets of an additive model on `{0,1}^Λ = P(Λ)`.
pub fn spin_msets(rep: &RandomMappingRep<f64>, sites: usize) -> Result<(DecreasingSpace, Vec<MSet>)> {
    let ds = DecreasingSpace::new(Arc::new(Poset::antichain(sites)))?;
    let to_set: Vec<usize> = (0..1usize << sites)
        .map(|x| ds.index_of(&ElementSet::from_mask(sites, x as u64)).expect("all subsets"))
        .collect();
    let msets = rep
        .entries()
        .iter()
        .map(|(m, _)| {
            let mut img = vec![0; ds.len()];
            for (x, &sx) in to_set.iter().enumerate() {
                img[sx] = to_set[m.apply(x)];
            }
            map_to_mset(&ds, &PosetMap::endo(ds.space(), img, m.name())?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ds, msets))
}

/// Rates of the cooperative branching system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoopRates {
    /// `b_ijk` for every ordered triple of distinct sites.
    #[serde(default = "one")]
    pub branching: f64,
    /// `c_ij`, coalescing random walk.
    #[serde(default = "one")]
    pub rw: f64,
    /// `d_i`.
    #[serde(default)]
    pub death: f64,
    /// `e_ij` for `i < j`.
    #[serde(default)]
    pub exclusion: f64,
    /// `a_ij`, voter move.
    #[serde(default)]
    pub voter: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for CoopRates {
    fn default() -> Self {
        CoopRates { branching: 1.0, rw: 1.0, death: 0.0, exclusion: 0.0, voter: 0.0 }
    }
}

/// `b_ijk`: `x(ijk) = 110 → 111`.
pub fn coop_b(space: &Arc<Poset>, i: usize, j: usize, k: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("b{i}{j}{k}"), |x| if bit(x, i) && bit(x, j) && !bit(x, k) { set_bit(x, k, true) } else { x })
}

/// `b⁽¹⁾_ijk`: `x(ijk) = 001 → 011`.
pub fn coop_b1(space: &Arc<Poset>, i: usize, j: usize, k: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("b1_{i}{j}{k}"), |x| if !bit(x, i) && !bit(x, j) && bit(x, k) { set_bit(x, j, true) } else { x })
}

/// `b⁽²⁾_ijk`: `x(ijk) = 001 → 101`.
pub fn coop_b2(space: &Arc<Poset>, i: usize, j: usize, k: usize) -> Result<PosetMap> {
    PosetMap::from_fn(space, format!("b2_{i}{j}{k}"), |x| if !bit(x, i) && !bit(x, j) && bit(x, k) { set_bit(x, i, true) } else { x })
}

/// `a_ij = vot_ji`: `x(ij) = 10 → 00`, `01 → 11`.
pub fn coop_a(space: &Arc<Poset>, i: usize, j: usize) -> Result<PosetMap> {
    Ok(vot(space, j, i)?.with_name(format!("a{i}{j}")))
}

/// `c_ij = rw_ij`: `x(ij) = 11 → 01`, `10 → 01`.
pub fn coop_c(space: &Arc<Poset>, i: usize, j: usize) -> Result<PosetMap> {
    Ok(rw(space, i, j)?.with_name(format!("c{i}{j}")))
}

fn distinct_triples(sites: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..sites).flat_map(move |i| {
        (0..sites).flat_map(move |j| (0..sites).filter(move |&k| i != j && j != k && i != k).map(move |k| (i, j, k)))
    })
}

/// Cooperative branching with coalescing walks, optional deaths, exclusion and voter moves.
pub fn build_coop(sites: usize, rates: CoopRates) -> Result<Model> {
    if sites < 3 && rates.branching > 0.0 {
        return Err(Error::InvalidModel("cooperative branching needs three distinct sites".into()));
    }
    let (space, pairing) = spin_space(sites)?;
    let mut entries = Vec::new();
    for (i, j, k) in distinct_triples(sites) {
        push_map(&mut entries, coop_b(&space, i, j, k)?, rates.branching)?;
    }
    for i in 0..sites {
        for j in (0..sites).filter(|&j| j != i) {
            push_map(&mut entries, coop_c(&space, i, j)?, rates.rw)?;
            push_map(&mut entries, coop_a(&space, i, j)?, rates.voter)?;
        }
    }
    for i in 0..sites {
        push_map(&mut entries, death(&space, i)?, rates.death)?;
    }
    for i in 0..sites {
        for j in i + 1..sites {
            push_map(&mut entries, exclusion(&space, i, j)?, rates.exclusion)?;
        }
    }
    let rep = RandomMappingRep::new(space, entries)?;
    Model::new("coop", rep, pairing)
}

/// `min(x+1, n)` away from the trap at 0.
pub fn siegmund_up(space: &Arc<Poset>) -> Result<PosetMap> {
    let n = space.len() - 1;
    PosetMap::from_fn(space, "up", |x| if x == 0 { 0 } else { (x + 1).min(n) })
}

pub fn siegmund_down(space: &Arc<Poset>) -> Result<PosetMap> {
    PosetMap::from_fn(space, "down", |x| x.saturating_sub(1))
}

/// A chain `{0,…,n}` paired with itself by `⟨x,y⟩ = 1{x ≤ y}`. Every map
/// must be monotone with `m(0) = 0`, which on a chain is additivity.
pub fn build_siegmund(n: usize, maps: Option<&[Vec<usize>]>, rates: Option<&[f64]>) -> Result<Model> {
    let space = Arc::new(Poset::chain(n + 1));
    let pairing = DualityPairing::reversed(space.clone());
    let list: Vec<PosetMap> = match maps {
        None => vec![siegmund_up(&space)?, siegmund_down(&space)?],
        Some(tables) => tables
            .iter()
            .enumerate()
            .map(|(k, t)| PosetMap::endo(&space, t.clone(), format!("m{k}")))
            .collect::<Result<_>>()?,
    };
    let rates: Vec<f64> = match rates {
        None => vec![1.0; list.len()],
        Some(r) if r.len() == list.len() => r.to_vec(),
        Some(r) => return Err(Error::Dimension(format!("{} rates for {} maps", r.len(), list.len()))),
    };
    let mut entries = Vec::new();
    for (m, r) in list.into_iter().zip(rates) {
        if let Some((x, y)) = m.monotone_witness() {
            return Err(Error::NotMonotone { map: m.name().to_string(), x, y });
        }
        if m.apply(0) != 0 {
            return Err(Error::NotAdditive { map: m.name().to_string(), detail: format!("m(0) = {}", m.apply(0)) });
        }
        push_map(&mut entries, m, r)?;
    }
    let rep = RandomMappingRep::new(space, entries)?;
    Model::new("siegmund", rep, pairing)
}

/// `f(x) = Σ r_A 1{x ∈ A}` over the level sets `A_k = {f ≥ r_k}` of a
/// monotone `f`: the first term is `min f` on all of `S`, every later
/// coefficient is a positive gap between consecutive values.
pub fn monotone_indicator_decomposition<R: Scalar>(p: &Poset, f: &[R]) -> Result<Vec<(R, ElementSet)>> {
    if f.len() != p.len() {
        return Err(Error::Dimension(format!("{} values on {} elements", f.len(), p.len())));
    }
    for x in 0..p.len() {
        for y in p.up_of(x).iter() {
            if f[x] > f[y] {
                return Err(Error::FunctionNotMonotone { x, y });
            }
        }
    }
    let mut values: Vec<R> = Vec::new();
    for v in f {
        if !values.contains(v) {
            values.push(v.clone());
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let mut out = Vec::with_capacity(values.len());
    for (k, r) in values.iter().enumerate() {
        let coeff = if k == 0 { r.clone() } else { r.clone() - values[k - 1].clone() };
        let level = ElementSet::from_indices(p.len(), (0..p.len()).filter(|&x| f[x] >= *r));
        out.push((coeff, level));
    }
    Ok(out)
}

/// Generator `Σ_i β_i(x)(f(x ∨ ε_i) − f(x)) + Σ_i δ_i(x)(f(x ∧ (1−ε_i)) − f(x))`.
pub fn spin_generator<R: Scalar>(sites: usize, beta: &[Vec<R>], delta: &[Vec<R>]) -> Result<GeneratorMatrix<R>> {
    let n = check_spin_tables(sites, beta, delta)?;
    let mut q = Matrix::zeros(n, n);
    for x in 0..n {
        for i in 0..sites {
            let (rate, y) = if bit(x, i) { (&delta[i][x], set_bit(x, i, false)) } else { (&beta[i][x], set_bit(x, i, true)) };
            q.add_at(x, y, rate.clone());
            q.add_at(x, x, -rate.clone());
        }
    }
    GeneratorMatrix::new(q)
}

fn check_spin_tables<R: Scalar>(sites: usize, beta: &[Vec<R>], delta: &[Vec<R>]) -> Result<usize> {
    if sites > 12 {
        return Err(Error::TooLarge { n: 1 << sites.min(30), cap: 1 << 12 });
    }
    let n = 1usize << sites;
    if beta.len() != sites || delta.len() != sites || beta.iter().chain(delta).any(|t| t.len() != n) {
        return Err(Error::Dimension(format!("birth and death tables must be {sites} rows of {n}")));
    }
    for (kind, tables) in [("birth", beta), ("death", delta)] {
        for (i, t) in tables.iter().enumerate() {
            if let Some(x) = (0..n).find(|&x| t[x] < R::zero()) {
                return Err(Error::NegativeRate { map: format!("{kind}{i}"), rate: format!("{} at {x}", t[x]) });
            }
        }
    }
    Ok(n)
}

/// Monotone maps `x ↦ x ∨ ε_i` on a level set of `β_i` and `x ↦ x ∧ (1−ε_i)`
/// on a level set of `δ_i` (taken in the reversed order) whose rates sum to
/// the spin generator. Zero-rate terms are dropped.
pub fn decompose_attractive_spin<R: Scalar>(sites: usize, beta: &[Vec<R>], delta: &[Vec<R>]) -> Result<RandomMappingRep<R>> {
    check_spin_tables(sites, beta, delta)?;
    let space = Arc::new(Poset::boolean(sites)?);
    let reversed = space.reversed();
    let mut entries = Vec::new();
    for i in 0..sites {
        let terms = monotone_indicator_decomposition(&space, &beta[i]).map_err(|e| match e {
            Error::FunctionNotMonotone { x, y } => Error::NotAttractive(format!(
                "birth rate at site {i} decreases from {} to {}",
                space.label(x),
                space.label(y)
            )),
            e => e,
        })?;
        for (r, a) in terms.into_iter().filter(|(r, a)| !r.is_zero() && !a.is_empty()) {
            let m = PosetMap::from_fn(&space, format!("up{i}{}", space.set_label(&a)), |x| if a.contains(x) { set_bit(x, i, true) } else { x })?;
            entries.push((m, r));
        }
        let terms = monotone_indicator_decomposition(&reversed, &delta[i]).map_err(|e| match e {
            Error::FunctionNotMonotone { x, y } => Error::NotAttractive(format!(
                "death rate at site {i} increases from {} to {}",
                space.label(y),
                space.label(x)
            )),
            e => e,
        })?;
        for (r, a) in terms.into_iter().filter(|(r, a)| !r.is_zero() && !a.is_empty()) {
            let m = PosetMap::from_fn(&space, format!("down{i}{}", space.set_label(&a)), |x| if a.contains(x) { set_bit(x, i, false) } else { x })?;
            entries.push((m, r));
        }
    }
    RandomMappingRep::new(space, entries)
}

/// Contact-type attractive tables: `β_i(x) = birth·#{j ≠ i : x(j) = 1}`, `δ_i = death`.
pub fn contact_spin_tables(sites: usize, birth: f64, death_rate: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = 1usize << sites;
    let beta = (0..sites).map(|i| (0..n).map(|x| birth * (0..sites).filter(|&j| j != i && bit(x, j)).count() as f64).collect()).collect();
    let delta = vec![vec![death_rate; n]; sites];
    (beta, delta)
}

pub fn build_spin(sites: usize, beta: &[Vec<f64>], delta: &[Vec<f64>]) -> Result<Model> {
    let (_, pairing) = spin_space(sites)?;
    let rep = decompose_attractive_spin(sites, beta, delta)?;
    let rep = RandomMappingRep::new(pairing.space().clone(), rep.entries().to_vec())?;
    Model::new("spin", rep, pairing)
}

/// Quantile coupling of a monotone kernel on the chain `0 < 1 < … < n−1`:
/// with `F(x,y) = Σ_{z≤y} K(x,z)` and the distinct values `0 = u_0 < u_1 <
/// … < u_L = 1` of `F`, map `l` is `x ↦ min{y : F(x,y) ≥ u_l}` with
/// probability `u_l − u_{l−1}`. Rows must sum to one within `slack`.
pub fn represent_monotone_kernel_chain<R: Scalar>(k: &Matrix<R>, slack: &R) -> Result<Vec<(R, PosetMap)>> {
    let n = k.rows();
    if k.cols() != n || n == 0 {
        return Err(Error::Dimension("kernel must be a nonempty square matrix".into()));
    }
    let mut cdf: Vec<Vec<R>> = Vec::with_capacity(n);
    for x in 0..n {
        let mut acc = R::zero();
        let mut row = Vec::with_capacity(n);
        for y in 0..n {
            if *k.get(x, y) < R::zero() {
                return Err(Error::NotStochastic(format!("negative entry at ({x},{y})")));
            }
            acc = acc + k.get(x, y).clone();
            row.push(acc.clone());
        }
        if (acc.clone() - R::one()).abs() > *slack {
            return Err(Error::NotStochastic(format!("row {x} sums to {acc}")));
        }
        row[n - 1] = R::one();
        cdf.push(row);
    }
    for x in 1..n {
        if (0..n).any(|y| cdf[x][y] > cdf[x - 1][y]) {
            return Err(Error::NotMonotone { map: "kernel".into(), x: x - 1, y: x });
        }
    }
    let mut breaks: Vec<R> = Vec::new();
    for row in &cdf {
        for v in row {
            if *v > R::zero() && !breaks.contains(v) {
                breaks.push(v.clone());
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let space = Arc::new(Poset::chain(n));
    let mut out: Vec<(R, PosetMap)> = Vec::new();
    let mut prev = R::zero();
    for u in breaks {
        let img: Vec<usize> = (0..n).map(|x| (0..n).find(|&y| cdf[x][y] >= u).expect("last entry is one")).collect();
        let p = u.clone() - prev;
        prev = u;
        if let Some(entry) = out.iter_mut().find(|(_, m)| m.img() == img.as_slice()) {
            entry.0 = entry.0.clone() + p;
        } else {
            let name = format!("q{}", out.len());
            out.push((p, PosetMap::endo(&space, img, name)?));
        }
    }
    Ok(out)
}

/// `Σ_k p_k 1{m_k(x) = y}`.
pub fn mixture_kernel<R: Scalar>(n: usize, mix: &[(R, PosetMap)]) -> Matrix<R> {
    let mut k = Matrix::zeros(n, n);
    for (p, m) in mix {
        for x in 0..n {
            k.add_at(x, m.apply(x), p.clone());
        }
    }
    k
}

/// A map of a custom model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomMap {
    pub img: Vec<usize>,
    pub rate: f64,
    #[serde(default)]
    pub name: Option<String>,
}

/// Model description with a `"model"` discriminator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Voter {
        sites: usize,
        #[serde(default = "one")]
        rate: f64,
        /// `rates[i][j]` for `vot_ij`; overrides `rate`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rates: Option<Vec<Vec<f64>>>,
    },
    Krone {
        sites: usize,
        #[serde(default)]
        rates: KroneRates,
    },
    Coop {
        sites: usize,
        #[serde(default)]
        rates: CoopRates,
    },
    Siegmund {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        maps: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rates: Option<Vec<f64>>,
    },
    Contact {
        sites: usize,
        #[serde(default = "one")]
        birth: f64,
        #[serde(default = "one")]
        death: f64,
    },
    Spin {
        sites: usize,
        /// Per site, the birth rate in every configuration; defaults to contact-type rates.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        birth: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        death: Option<Vec<Vec<f64>>>,
    },
    Custom {
        space: PosetRef,
        /// The bijection `x ↦ x′`; defaults to the identity with the reversed order.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prime: Option<Vec<usize>>,
        maps: Vec<CustomMap>,
        /// Dual maps on `S′`, one per map, used in place of the computed additive dual.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dual: Option<Vec<CustomMap>>,
    },
}

pub const BUILTIN_MODELS: [(&str, &str); 6] = [
    ("voter", "voter model on {0,1}^Λ, rate 1 per ordered pair; dual: coalescing random walks"),
    ("krone", "two-stage contact process on {0,1,2}^Λ, rates a=1 b=1 c=0.5 d=0.25 e=0.125"),
    ("coop", "cooperative branching (rate 1 per triple) with coalescing walks (rate 1); monotone, not additive"),
    ("siegmund", "chain {0,…,n} with up/down maps fixing 0; additive"),
    ("contact", "contact process, birth 1 per ordered pair, death 1; self-dual"),
    ("spin", "attractive spin system with contact-type rates, decomposed into monotone maps"),
];

impl ModelSpec {
    /// `name` or `name:N` with the default parameters of each builtin.
    pub fn builtin(arg: &str) -> Result<Self> {
        let (name, size) = match arg.split_once(':') {
            Some((n, s)) => (n, Some(s.parse::<usize>().map_err(|_| Error::Parse(format!("bad size in `{arg}`")))?)),
            None => (arg, None),
        };
        Ok(match name {
            "voter" => ModelSpec::Voter { sites: size.unwrap_or(3), rate: 1.0, rates: None },
            "krone" => ModelSpec::Krone { sites: size.unwrap_or(2), rates: KroneRates::default() },
            "coop" => ModelSpec::Coop { sites: size.unwrap_or(3), rates: CoopRates::default() },
            "siegmund" => ModelSpec::Siegmund { n: size.unwrap_or(4), maps: None, rates: None },
            "contact" => ModelSpec::Contact { sites: size.unwrap_or(2), birth: 1.0, death: 1.0 },
            "spin" => ModelSpec::Spin { sites: size.unwrap_or(2), birth: None, death: None },
            _ => return Err(Error::Parse(format!("unknown builtin model `{name}`"))),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            ModelSpec::Voter { sites, rate, rates } => {
                let table = rates.clone().unwrap_or_else(|| uniform_rates(*sites, *rate));
                build_voter(*sites, &table)
            }
            ModelSpec::Krone { sites, rates } => build_krone(*sites, *rates),
            ModelSpec::Coop { sites, rates } => build_coop(*sites, *rates),
            ModelSpec::Siegmund { n, maps, rates } => build_siegmund(*n, maps.as_deref(), rates.as_deref()),
            ModelSpec::Contact { sites, birth, death } => build_contact(*sites, *birth, *death),
            ModelSpec::Spin { sites, birth, death } => {
                let (b0, d0) = contact_spin_tables(*sites, 1.0, 1.0);
                build_spin(*sites, birth.as_ref().unwrap_or(&b0), death.as_ref().unwrap_or(&d0))
            }
            ModelSpec::Custom { space, prime, maps, dual } => {
                let space = Arc::new(space.resolve()?);
                let pairing = match prime {
                    Some(p) => DualityPairing::new(space.clone(), p.clone())?,
                    None => DualityPairing::reversed(space.clone()),
                };
                let mut entries = Vec::new();
                for (k, m) in maps.iter().enumerate() {
                    let name = m.name.clone().unwrap_or_else(|| format!("m{k}"));
                    check_rate(&name, m.rate)?;
                    entries.push((PosetMap::endo(&space, m.img.clone(), name)?, m.rate));
                }
                let proposed = match dual {
                    None => None,
                    Some(list) => {
                        let dual_space = pairing.dual_space().clone();
                        let mut entries = Vec::new();
                        for (k, m) in list.iter().enumerate() {
                            let name = m.name.clone().unwrap_or_else(|| format!("m{k}'"));
                            check_rate(&name, m.rate)?;
                            entries.push((PosetMap::endo(&dual_space, m.img.clone(), name)?, m.rate));
                        }
                        Some(RandomMappingRep::new(dual_space, entries)?)
                    }
                };
                let mut model = Model::new("custom", RandomMappingRep::new(space, entries)?, pairing)?;
                model.proposed_dual = proposed;
                Ok(model)
            }
        }
    }

    pub fn sites(&self) -> Option<usize> {
        match self {
            ModelSpec::Voter { sites, .. }
            | ModelSpec::Krone { sites, .. }
            | ModelSpec::Coop { sites, .. }
            | ModelSpec::Contact { sites, .. }
            | ModelSpec::Spin { sites, .. } => Some(*sites),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{verify_map_duality, DualityMode};
    use crate::markov::build_generator;
    use crate::num::{rational, Rational};

    fn idx(word: &str) -> usize {
        word.chars().enumerate().filter(|(_, c)| *c == '1').map(|(i, _)| 1 << i).sum()
    }

    #[test]
    fn voter_examples() {
        let m = build_voter(1, &[vec![0.0]]).unwrap();
        assert_eq!(m.map_count(), 0);
        let m = build_voter(2, &uniform_rates(2, 1.0)).unwrap();
        assert!(m.additive);
        let v01 = m.rep.map(0);
        assert_eq!(v01.name(), "vot01");
        assert_eq!(v01.apply(idx("10")), idx("11"));
        assert_eq!(v01.apply(idx("01")), idx("00"));
        let duals = m.stated_duals.as_ref().unwrap();
        for (k, (map, _)) in m.rep.entries().iter().enumerate() {
            assert_eq!(m.pairing.additive_dual(map).unwrap().img(), duals[k].img());
        }
    }

    #[test]
    fn krone_examples() {
        let m = build_krone(2, KroneRates::default()).unwrap();
        assert!(m.additive);
        let (space, _) = krone_space(2).unwrap();
        let sizes = [3, 3];
        let a0 = krone_a(&space, 2, 0).unwrap();
        assert_eq!(a0.apply(product_index(&sizes, &[1, 0])), product_index(&sizes, &[2, 0]));
        let b01 = krone_b(&space, 2, 0, 1).unwrap();
        assert_eq!(b01.apply(product_index(&sizes, &[2, 0])), product_index(&sizes, &[2, 1]));
        assert_eq!(b01.apply(product_index(&sizes, &[1, 0])), product_index(&sizes, &[1, 0]));
        assert_eq!(b01.apply(product_index(&sizes, &[2, 2])), product_index(&sizes, &[2, 2]));
        let duals = m.stated_duals.as_ref().unwrap();
        let psi = m.pairing.pairing_table();
        for (k, (map, _)) in m.rep.entries().iter().enumerate() {
            assert_eq!(m.pairing.additive_dual(map).unwrap().img(), duals[k].img(), "{}", map.name());
            let r = verify_map_duality(&psi, map.img(), duals[k].img(), DualityMode::Equal).unwrap();
            assert!(r.ok);
        }
    }

    #[test]
    fn krone_set_coding() {
        let coding = KroneSetCoding::new(2).unwrap();
        let sizes = [3, 3];
        let x = product_index(&sizes, &[1, 0]);
        assert_eq!(coding.space.set(coding.to_set[x]), &ElementSet::from_indices(4, [0]));
        let m = build_krone(2, KroneRates::default()).unwrap();
        let msets = coding.msets(&m.rep).unwrap();
        assert_eq!(msets.len(), m.map_count());
        // grow up draws an arrow (0,0) → (0,1)
        assert!(msets[0].contains(0, 2));
        // young dies blocks (0,0)
        let c0 = m.rep.entries().iter().position(|(mm, _)| mm.name() == "c0").unwrap();
        assert_eq!(msets[c0].blocked_sites(), vec![0]);
    }

    #[test]
    fn coop_examples() {
        let m = build_coop(3, CoopRates { voter: 1.0, death: 1.0, exclusion: 1.0, ..Default::default() }).unwrap();
        assert!(!m.additive && m.monotone);
        let space = m.space().clone();
        let b1 = coop_b1(&space, 0, 1, 2).unwrap();
        let b2 = coop_b2(&space, 0, 1, 2).unwrap();
        assert_eq!(b1.apply(idx("001")), idx("011"));
        assert_eq!(b2.apply(idx("001")), idx("101"));
        let c = coop_c(&space, 0, 1).unwrap();
        assert_eq!(c.apply(idx("110")), idx("010"));
        assert_eq!(c.apply(idx("100")), idx("010"));
        assert_eq!(coop_a(&space, 0, 1).unwrap().img(), vot(&space, 1, 0).unwrap().img());
        let b = coop_b(&space, 0, 1, 2).unwrap();
        assert!(b.is_monotone() && !b.is_additive().unwrap());
        for map in [coop_a(&space, 0, 1), coop_c(&space, 0, 1), death(&space, 0), exclusion(&space, 0, 1)] {
            assert!(map.unwrap().is_additive().unwrap());
        }
        assert!(build_coop(2, CoopRates::default()).is_err());
    }

    #[test]
    fn siegmund_examples() {
        let bad = build_siegmund(4, Some(&[vec![1, 2, 3, 4, 4]]), None);
        assert!(matches!(bad, Err(Error::NotAdditive { .. })));
        let m = build_siegmund(4, Some(&[vec![0, 0, 1, 2, 3]]), None).unwrap();
        let dual = m.pairing.additive_dual(m.rep.map(0)).unwrap();
        assert_eq!(dual.apply(4), 4);
        let id = build_siegmund(4, Some(&[vec![0, 1, 2, 3, 4]]), None).unwrap();
        assert_eq!(id.pairing.additive_dual(id.rep.map(0)).unwrap().img(), &[0, 1, 2, 3, 4]);
        assert!(build_siegmund(4, None, None).unwrap().additive);
    }

    #[test]
    fn decomposition_examples() {
        let p = Poset::boolean(2).unwrap();
        let c = monotone_indicator_decomposition(&p, &[2.0; 4]).unwrap();
        assert_eq!(c, vec![(2.0, ElementSet::full(4))]);
        let a = ElementSet::from_indices(4, [1, 3]);
        let c = monotone_indicator_decomposition(&p, &[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(c, vec![(0.0, ElementSet::full(4)), (1.0, a)]);
        let card: Vec<f64> = (0..4usize).map(|x| x.count_ones() as f64).collect();
        let c = monotone_indicator_decomposition(&p, &card).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[1], (1.0, ElementSet::from_indices(4, [1, 2, 3])));
        assert_eq!(c[2], (1.0, ElementSet::from_indices(4, [3])));
        assert!(matches!(monotone_indicator_decomposition(&p, &[1.0, 0.0, 0.0, 0.0]), Err(Error::FunctionNotMonotone { .. })));
    }

    #[test]
    fn spin_examples() {
        let zero = vec![vec![0.0; 4]; 2];
        assert!(decompose_attractive_spin(2, &zero, &zero).unwrap().is_empty());
        let beta = vec![(0..4).map(|x| bit(x, 1) as u8 as f64).collect(), vec![0.0; 4]];
        let rep = decompose_attractive_spin(2, &beta, &zero).unwrap();
        assert_eq!(rep.len(), 1);
        assert_eq!(*rep.rate(0), 1.0);
        assert_eq!(rep.map(0).apply(idx("01")), idx("11"));
        assert_eq!(rep.map(0).apply(idx("00")), idx("00"));
        let bad = vec![vec![1.0, 0.0, 1.0, 1.0], vec![0.0; 4]];
        assert!(matches!(decompose_attractive_spin(2, &bad, &zero), Err(Error::NotAttractive(_))));
    }

    #[test]
    fn contact_spin_matches_additive_contact() {
        let (b, d) = contact_spin_tables(3, 1.0, 1.0);
        let rep = decompose_attractive_spin(3, &b, &d).unwrap();
        let direct = build_contact(3, 1.0, 1.0).unwrap();
        let lhs = build_generator(&rep.to_exact().unwrap()).unwrap();
        let rhs = build_generator(&direct.rep.to_exact().unwrap()).unwrap();
        assert!(lhs.matrix() == rhs.matrix());
        let spin: GeneratorMatrix<Rational> = spin_generator(3, &to_exact(&b), &to_exact(&d)).unwrap();
        assert!(spin.matrix() == lhs.matrix());
    }

    fn to_exact(t: &[Vec<f64>]) -> Vec<Vec<Rational>> {
        t.iter().map(|r| r.iter().map(|v| crate::num::rational_from_f64(*v).unwrap()).collect()).collect()
    }

    #[test]
    fn kernel_examples() {
        let id = Matrix::<Rational>::identity(3);
        let mix = represent_monotone_kernel_chain(&id, &rational(0, 1)).unwrap();
        assert_eq!(mix.len(), 1);
        assert_eq!(mix[0].1.img(), &[0, 1, 2]);
        let h = rational(1, 2);
        let z = rational(0, 1);
        let o = rational(1, 1);
        let k = Matrix::from_rows(vec![
            vec![h.clone(), h.clone(), z.clone()],
            vec![z.clone(), h.clone(), h.clone()],
            vec![z.clone(), z.clone(), o.clone()],
        ])
        .unwrap();
        let mix = represent_monotone_kernel_chain(&k, &z).unwrap();
        assert_eq!(mix.len(), 2);
        assert_eq!(mix[0].1.img(), &[0, 1, 2]);
        assert_eq!(mix[1].1.img(), &[1, 2, 2]);
        assert!(mix.iter().all(|(p, m)| *p == h && m.is_monotone()));
        assert!(mixture_kernel(3, &mix) == k);
        let det = Matrix::from_rows(vec![vec![z.clone(), o.clone()], vec![z.clone(), o.clone()]]).unwrap();
        let mix = represent_monotone_kernel_chain(&det, &z).unwrap();
        assert_eq!((mix.len(), mix[0].1.img()), (1, &[1usize, 1][..]));
        let anti = Matrix::from_rows(vec![vec![z.clone(), o.clone()], vec![o.clone(), z.clone()]]).unwrap();
        assert!(matches!(represent_monotone_kernel_chain(&anti, &z), Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn spec_json_round_trip() {
        for (name, _) in BUILTIN_MODELS {
            let spec = ModelSpec::builtin(name).unwrap();
            let back = ModelSpec::from_json(&spec.to_json().unwrap()).unwrap();
            assert_eq!(back, spec);
            let m = back.build().unwrap();
            assert!(m.monotone, "{name}");
        }
        let custom = ModelSpec::from_json(r#"{"model":"custom","space":"chain:3","maps":[{"img":[0,0,1],"rate":2.0}]}"#).unwrap();
        let m = custom.build().unwrap();
        assert!(m.additive);
        assert!(ModelSpec::from_json(r#"{"model":"nope"}"#).is_err());
        assert!(ModelSpec::builtin("voter:x").is_err());
    }

    #[test]
    fn dual_systems() {
        let m = ModelSpec::builtin("coop").unwrap().build().unwrap();
        let d = m.dual_system(DualVariant::Star).unwrap();
        assert_eq!(d.system.tables.len(), m.map_count());
        assert_eq!(d.psi.rows(), 8);
        let v = ModelSpec::builtin("voter:2").unwrap().build().unwrap();
        let d = v.dual_system(DualVariant::Prime).unwrap();
        assert_eq!(d.system.states(), 4);
    }
}
