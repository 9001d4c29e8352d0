//! Duality pairings and the dual maps they induce on additive and monotone
//! maps, with exhaustive checks and a path-enumeration oracle for spin systems.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::PosetMap;
use crate::poset::{DualPosetView, ElementSet, Poset};

/// A subset `B ⊂ S′`, stored sorted and deduplicated. It is in minimal form
/// when `B = B_min`, i.e. when it is an antichain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Antichain(Vec<usize>);

impl Antichain {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Antichain(members)
    }

    pub fn empty() -> Self {
        Antichain(Vec::new())
    }

    pub fn singleton(y: usize) -> Self {
        Antichain(vec![y])
    }

    pub fn from_set(s: &ElementSet) -> Self {
        Antichain(s.to_vec())
    }

    pub fn to_set(&self, n: usize) -> ElementSet {
        ElementSet::from_indices(n, self.0.iter().copied())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, y: usize) -> bool {
        self.0.binary_search(&y).is_ok()
    }

    pub fn union(&self, other: &Antichain) -> Antichain {
        Antichain::new(self.0.iter().chain(&other.0).copied().collect())
    }

    /// `B_min` in the given order.
    pub fn minimal(&self, p: &Poset) -> Antichain {
        Antichain::from_set(&p.minimal_elements(&self.to_set(p.len())))
    }

    /// `B_max` in the given order.
    pub fn maximal(&self, p: &Poset) -> Antichain {
        Antichain::from_set(&p.maximal_elements(&self.to_set(p.len())))
    }

    pub fn is_minimal_form(&self, p: &Poset) -> bool {
        p.is_antichain(&self.to_set(p.len()))
    }

    pub fn label(&self, p: &Poset) -> String {
        p.set_label(&self.to_set(p.len()))
    }
}

impl fmt::Debug for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.0).finish()
    }
}

/// A poset `S`, a dual `S′`, and the pairing `⟨x,y⟩ = 1{x ≤ y′} = 1{y ≤ x′}`.
#[derive(Debug, Clone)]
pub struct DualityPairing {
    space: Arc<Poset>,
    dual_space: Arc<Poset>,
    view: Arc<DualPosetView>,
}

impl DualityPairing {
    pub fn new(space: Arc<Poset>, prime: Vec<usize>) -> Result<Self> {
        let view = DualPosetView::new((*space).clone(), prime)?;
        Ok(DualityPairing { dual_space: Arc::new(view.poset().clone()), space, view: Arc::new(view) })
    }

    /// `S′ = S` with the reversed order and the identity bijection.
    pub fn reversed(space: Arc<Poset>) -> Self {
        let n = space.len();
        Self::new(space, (0..n).collect()).expect("identity is a bijection")
    }

    pub fn space(&self) -> &Arc<Poset> {
        &self.space
    }

    pub fn dual_space(&self) -> &Arc<Poset> {
        &self.dual_space
    }

    pub fn view(&self) -> &DualPosetView {
        &self.view
    }

    pub fn prime(&self, x: usize) -> usize {
        self.view.prime(x)
    }

    pub fn unprime(&self, y: usize) -> usize {
        self.view.unprime(y)
    }

    /// `A′ = {x′ : x ∈ A}` for `A ⊂ S`.
    pub fn prime_set(&self, a: &ElementSet) -> Antichain {
        Antichain::new(a.iter().map(|x| self.prime(x)).collect())
    }

    /// `B′ = {y′ : y ∈ B} ⊂ S` for `B ⊂ S′`.
    pub fn unprime_set(&self, b: &Antichain) -> ElementSet {
        ElementSet::from_indices(self.space.len(), b.members().iter().map(|&y| self.unprime(y)))
    }

    /// `⟨x,y⟩`.
    pub fn pairing_value(&self, x: usize, y: usize) -> u8 {
        self.space.leq(x, self.unprime(y)) as u8
    }

    /// `φ(x,B) = 1{x ≤ y′ for some y ∈ B}`.
    pub fn phi_value(&self, x: usize, b: &Antichain) -> u8 {
        b.members().iter().any(|&y| self.space.leq(x, self.unprime(y))) as u8
    }

    /// `φ̃(x,B) = 1{x ≥ y′ for some y ∈ B}`.
    pub fn phi_tilde_value(&self, x: usize, b: &Antichain) -> u8 {
        b.members().iter().any(|&y| self.space.leq(self.unprime(y), x)) as u8
    }

    pub fn pairing_table(&self) -> PsiTable {
        PsiTable::from_fn(self.space.len(), self.dual_space.len(), |x, y| self.pairing_value(x, y) as f64)
    }

    pub fn phi_table(&self, dual_states: &[Antichain]) -> PsiTable {
        PsiTable::from_fn(self.space.len(), dual_states.len(), |x, j| self.phi_value(x, &dual_states[j]) as f64)
    }

    pub fn phi_tilde_table(&self, dual_states: &[Antichain]) -> PsiTable {
        PsiTable::from_fn(self.space.len(), dual_states.len(), |x, j| self.phi_tilde_value(x, &dual_states[j]) as f64)
    }

    fn check_domain(&self, m: &PosetMap) -> Result<()> {
        if **m.domain() != *self.space || **m.codomain() != *self.space {
            return Err(Error::Dimension(format!("map {} does not act on the paired space", m.name())));
        }
        Ok(())
    }

    /// The additive dual `m′ : S′ → S′`, defined by `m⁻¹({y′}↓) = {m′(y)′}↓`.
    /// Fails at the first `y` whose preimage is not a principal ideal.
    pub fn additive_dual(&self, m: &PosetMap) -> Result<PosetMap> {
        self.check_domain(m)?;
        let mut img = Vec::with_capacity(self.dual_space.len());
        for y in 0..self.dual_space.len() {
            let a = m.inverse_image(self.space.down_of(self.unprime(y)))?;
            let top = self.space.maximal_elements(&a);
            let z = match top.len() {
                1 => top.iter().next().unwrap(),
                _ => usize::MAX,
            };
            if z == usize::MAX || self.space.down_of(z) != &a {
                return Err(Error::NotAdditive {
                    map: m.name().to_string(),
                    detail: format!(
                        "preimage of the ideal below {} is not a principal ideal",
                        self.space.label(self.unprime(y))
                    ),
                });
            }
            img.push(self.prime(z));
        }
        PosetMap::endo(&self.dual_space, img, format!("{}'", m.name()))
    }

    pub fn monotone_dualizer(&self, m: &PosetMap) -> Result<MonotoneDualizer> {
        MonotoneDualizer::new(self.clone(), m)
    }
}

/// Precomputed preimages of principal ideals and filters of a monotone map,
/// evaluating the four monotone dual maps on `P(S′)`:
///
/// * `m†(B)′ = (m⁻¹(B′↓))_max`
/// * `m*(B)′ = ⋃_{y∈B} (m⁻¹({y′}↓))_max`
/// * `m°(B)′ = (m⁻¹(B′↑))_min`
/// * `m•(B)′ = ⋃_{y∈B} (m⁻¹({y′}↑))_min`
#[derive(Debug, Clone)]
pub struct MonotoneDualizer {
    pairing: DualityPairing,
    name: String,
    pre_down: Vec<ElementSet>,
    pre_up: Vec<ElementSet>,
    star_single: Vec<Antichain>,
    bullet_single: Vec<Antichain>,
}

impl MonotoneDualizer {
    pub fn new(pairing: DualityPairing, m: &PosetMap) -> Result<Self> {
        pairing.check_domain(m)?;
        if let Some((x, y)) = m.monotone_witness() {
            return Err(Error::NotMonotone { map: m.name().to_string(), x, y });
        }
        let s = pairing.space.clone();
        let mut pre_down = Vec::new();
        let mut pre_up = Vec::new();
        let mut star_single = Vec::new();
        let mut bullet_single = Vec::new();
        for y in 0..pairing.dual_space.len() {
            let z = pairing.unprime(y);
            let d = m.inverse_image(s.down_of(z))?;
            let u = m.inverse_image(s.up_of(z))?;
            star_single.push(pairing.prime_set(&s.maximal_elements(&d)));
            bullet_single.push(pairing.prime_set(&s.minimal_elements(&u)));
            pre_down.push(d);
            pre_up.push(u);
        }
        Ok(MonotoneDualizer { pairing, name: m.name().to_string(), pre_down, pre_up, star_single, bullet_single })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pairing(&self) -> &DualityPairing {
        &self.pairing
    }

    fn union_of(&self, table: &[ElementSet], b: &Antichain) -> ElementSet {
        let mut a = ElementSet::empty(self.pairing.space.len());
        for &y in b.members() {
            a.union_with(&table[y]);
        }
        a
    }

    pub fn dagger(&self, b: &Antichain) -> Antichain {
        let a = self.union_of(&self.pre_down, b);
        self.pairing.prime_set(&self.pairing.space.maximal_elements(&a))
    }

    pub fn star(&self, b: &Antichain) -> Antichain {
        b.members().iter().fold(Antichain::empty(), |acc, &y| acc.union(&self.star_single[y]))
    }

    pub fn circ(&self, b: &Antichain) -> Antichain {
        let a = self.union_of(&self.pre_up, b);
        self.pairing.prime_set(&self.pairing.space.minimal_elements(&a))
    }

    pub fn bullet(&self, b: &Antichain) -> Antichain {
        b.members().iter().fold(Antichain::empty(), |acc, &y| acc.union(&self.bullet_single[y]))
    }

    pub fn apply(&self, kind: MonotoneDualKind, b: &Antichain) -> Antichain {
        match kind {
            MonotoneDualKind::Dagger => self.dagger(b),
            MonotoneDualKind::Star => self.star(b),
            MonotoneDualKind::Circ => self.circ(b),
            MonotoneDualKind::Bullet => self.bullet(b),
        }
    }
}

/// Which of the four monotone dual maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonotoneDualKind {
    Dagger,
    Star,
    Circ,
    Bullet,
}

impl MonotoneDualKind {
    /// Dagger and star pair through `φ`; circ and bullet through `φ̃`.
    pub fn uses_phi_tilde(self) -> bool {
        matches!(self, MonotoneDualKind::Circ | MonotoneDualKind::Bullet)
    }
}

pub fn dual_dagger(d: &DualityPairing, m: &PosetMap, b: &Antichain) -> Result<Antichain> {
    Ok(d.monotone_dualizer(m)?.dagger(b))
}

pub fn dual_star(d: &DualityPairing, m: &PosetMap, b: &Antichain) -> Result<Antichain> {
    Ok(d.monotone_dualizer(m)?.star(b))
}

pub fn dual_circ(d: &DualityPairing, m: &PosetMap, b: &Antichain) -> Result<Antichain> {
    Ok(d.monotone_dualizer(m)?.circ(b))
}

pub fn dual_bullet(d: &DualityPairing, m: &PosetMap, b: &Antichain) -> Result<Antichain> {
    Ok(d.monotone_dualizer(m)?.bullet(b))
}

/// An explicit duality function `ψ : S × T → ℝ`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl PsiTable {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for x in 0..rows {
            for y in 0..cols {
                values.push(f(x, y));
            }
        }
        PsiTable { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.cols + y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DualityMode {
    Equal,
    Subdual,
    Superdual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counterexample {
    pub x: usize,
    pub y: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub mode: DualityMode,
    pub ok: bool,
    pub counterexample: Option<Counterexample>,
    pub pairs_checked: u64,
}

/// Compares `ψ(m(x),y)` with `ψ(x,m̂(y))` for every pair: equal, `≤`
/// (subdual) or `≥` (superdual). Stops at the first counterexample.
pub fn verify_map_duality(psi: &PsiTable, m: &[usize], mhat: &[usize], mode: DualityMode) -> Result<DualityReport> {
    if m.len() != psi.rows || mhat.len() != psi.cols {
        return Err(Error::Dimension(format!(
            "pairing is {}×{}, maps have {} and {} states",
            psi.rows,
            psi.cols,
            m.len(),
            mhat.len()
        )));
    }
    if m.iter().any(|&v| v >= psi.rows) || mhat.iter().any(|&v| v >= psi.cols) {
        return Err(Error::Dimension("map image outside the pairing table".into()));
    }
    let mut pairs_checked = 0;
    for x in 0..psi.rows {
        for y in 0..psi.cols {
            pairs_checked += 1;
            let lhs = psi.get(m[x], y);
            let rhs = psi.get(x, mhat[y]);
            let holds = match mode {
                DualityMode::Equal => lhs == rhs,
                DualityMode::Subdual => lhs <= rhs,
                DualityMode::Superdual => lhs >= rhs,
            };
            if !holds {
                return Ok(DualityReport {
                    mode,
                    ok: false,
                    counterexample: Some(Counterexample { x, y, lhs, rhs }),
                    pairs_checked,
                });
            }
        }
    }
    Ok(DualityReport { mode, ok: true, counterexample: None, pairs_checked })
}

/// Default cap on `|S|^(events+1)` for [`gray_zeta_oracle`].
pub const DEFAULT_GRAY_BUDGET: u128 = 1 << 24;

fn check_events(events: &[(PosetMap, f64)], space: &Arc<Poset>, s: f64, u: f64) -> Result<()> {
    let mut last = s;
    for (m, t) in events {
        if !(*t > last && *t <= u) {
            return Err(Error::Horizon { t: *t, s, u });
        }
        last = *t;
        if **m.domain() != **space || **m.codomain() != **space {
            return Err(Error::Dimension(format!("event map {} acts on another space", m.name())));
        }
    }
    Ok(())
}

/// Start states of all `[s,u]`-paths ending at `y`.
///
/// Candidates are the paths constant between event times, `π_k` on the
/// `k`-th segment with `π_n = y`. A candidate satisfies the path condition
/// when `(m_l∘…∘m_{k+1})(π_k) ≥ π_l` for all `k < l`; it is kept when no
/// other accepted candidate lies pointwise below it. Every path below a
/// piecewise-constant one can be sampled once per segment into a
/// piecewise-constant path, so minimality among these candidates is
/// minimality among all cadlag paths.
pub fn gray_zeta_oracle(
    space: &Arc<Poset>,
    events: &[(PosetMap, f64)],
    y: usize,
    s: f64,
    u: f64,
    budget: u128,
) -> Result<ElementSet> {
    check_events(events, space, s, u)?;
    let n_states = space.len();
    let n = events.len();
    let needed = (n_states as u128).checked_pow(n as u32 + 1).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    // comp[k][l] = m_l ∘ … ∘ m_{k+1} as a table, for k < l.
    let mut comp = vec![vec![Vec::new(); n + 1]; n + 1];
    for k in 0..n {
        let mut table: Vec<usize> = (0..n_states).collect();
        for l in k + 1..=n {
            let m = &events[l - 1].0;
            table = table.iter().map(|&v| m.apply(v)).collect();
            comp[k][l] = table.clone();
        }
    }
    let mut accepted: Vec<Vec<usize>> = Vec::new();
    let mut path = vec![0usize; n + 1];
    path[n] = y;
    enumerate_paths(space, &comp, n, 0, &mut path, &mut accepted);
    let mut out = ElementSet::empty(n_states);
    for p in &accepted {
        let dominated = accepted.iter().any(|q| q != p && q.iter().zip(p).all(|(&a, &b)| space.leq(a, b)));
        if !dominated {
            out.insert(p[0]);
        }
    }
    Ok(out)
}

fn enumerate_paths(
    space: &Poset,
    comp: &[Vec<Vec<usize>>],
    n: usize,
    pos: usize,
    path: &mut Vec<usize>,
    accepted: &mut Vec<Vec<usize>>,
) {
    let fits = |path: &[usize], l: usize| (0..l).all(|k| space.leq(path[l], comp[k][l][path[k]]));
    if pos == n {
        if fits(path, n) {
            accepted.push(path.clone());
        }
        return;
    }
    for v in 0..space.len() {
        path[pos] = v;
        if fits(path, pos) {
            enumerate_paths(space, comp, n, pos + 1, path, accepted);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrayCheck {
    pub ok: bool,
    pub oracle: Vec<usize>,
    pub bullet: Vec<usize>,
}

/// Compares the path oracle with `m_1•(…m_n•({y}))`, where `•` is taken
/// with `S′ = S` reversed and the identity bijection.
pub fn check_gray_equivalence(
    space: &Arc<Poset>,
    events: &[(PosetMap, f64)],
    y: usize,
    s: f64,
    u: f64,
    budget: u128,
) -> Result<GrayCheck> {
    let oracle = gray_zeta_oracle(space, events, y, s, u, budget)?.to_vec();
    let pairing = DualityPairing::reversed(space.clone());
    let mut b = Antichain::singleton(y);
    for (m, _) in events.iter().rev() {
        b = pairing.monotone_dualizer(m)?.bullet(&b);
    }
    let bullet = b.members().to_vec();
    Ok(GrayCheck { ok: oracle == bullet, oracle, bullet })
}
