//! Additive maps on decreasing sets as pair sets, drawn as arrow diagrams
//! whose open paths give the graphical form of the duality.
//!
//! An additive self-map `m` of `P_dec(Λ)` is the same thing as a pair set
//! `M ⊂ Λ×Λ` that is increasing in its first and decreasing in its second
//! coordinate, via `m(x) = {j : (i,j) ∈ M for some i ∈ x}`. In a diagram each
//! event draws an arrow `i → j` for every `(i,j) ∈ M` with `i ≠ j` and a
//! blocking symbol at `i` whenever `(i,i) ∉ M`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::EventLog;
use crate::lattice::SetFamily;
use crate::maps::{PosetMap, PosetRef};
use crate::poset::{ElementSet, Poset};

/// `P_dec(Λ)` together with its inclusion poset, shared by all maps on it.
#[derive(Debug, Clone)]
pub struct DecreasingSpace {
    ground: Arc<Poset>,
    family: SetFamily,
    space: Arc<Poset>,
}

impl DecreasingSpace {
    pub fn new(ground: Arc<Poset>) -> Result<Self> {
        let family = SetFamily::decreasing_sets((*ground).clone())?;
        let space = Arc::new(family.inclusion_poset());
        Ok(DecreasingSpace { ground, family, space })
    }

    pub fn ground(&self) -> &Arc<Poset> {
        &self.ground
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn space(&self) -> &Arc<Poset> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    pub fn set(&self, i: usize) -> &ElementSet {
        self.family.get(i)
    }

    pub fn index_of(&self, s: &ElementSet) -> Option<usize> {
        self.family.index_of(s)
    }
}

/// `M ⊂ Λ×Λ` with `(i,j) ∈ M, i ≤ ĩ ⇒ (ĩ,j) ∈ M` and `(i,j) ∈ M, j̃ ≤ j ⇒ (i,j̃) ∈ M`.
/// Row `i` holds `{j : (i,j) ∈ M}`.
#[derive(Clone, PartialEq, Eq)]
pub struct MSet {
    ground: Arc<Poset>,
    rows: Vec<ElementSet>,
}

impl std::fmt::Debug for MSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MSet").field("pairs", &self.pairs()).finish()
    }
}

impl MSet {
    pub fn new(ground: Arc<Poset>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = ground.len();
        let mut rows = vec![ElementSet::empty(n); n];
        for (i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::Dimension(format!("pair ({i}, {j}) outside a ground of size {n}")));
            }
            rows[i].insert(j);
        }
        let m = MSet { ground, rows };
        if let Some((i, j, k, l)) = m.property_witness() {
            return Err(Error::MSetProperty { i, j, k, l });
        }
        Ok(m)
    }

    /// `{(k,k)}`; valid only when no two sites are comparable.
    pub fn diagonal(ground: Arc<Poset>) -> Result<Self> {
        let n = ground.len();
        Self::new(ground, (0..n).map(|k| (k, k)))
    }

    /// `{(i,j) : j ≤ i}`, the pair set of the identity.
    pub fn identity(ground: Arc<Poset>) -> Self {
        let rows = (0..ground.len()).map(|i| ground.down_of(i).clone()).collect();
        MSet { ground, rows }
    }

    pub fn empty(ground: Arc<Poset>) -> Self {
        let n = ground.len();
        MSet { rows: vec![ElementSet::empty(n); n], ground }
    }

    /// A member `(i,j)` and a missing pair `(k,l)` that the closure rules force.
    pub fn property_witness(&self) -> Option<(usize, usize, usize, usize)> {
        let g = &self.ground;
        for i in 0..g.len() {
            for j in self.rows[i].iter() {
                for k in g.up_of(i).iter() {
                    if !self.rows[k].contains(j) {
                        return Some((i, j, k, j));
                    }
                }
                for l in g.down_of(j).iter() {
                    if !self.rows[i].contains(l) {
                        return Some((i, j, i, l));
                    }
                }
            }
        }
        None
    }

    pub fn ground(&self) -> &Arc<Poset> {
        &self.ground
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn row(&self, i: usize) -> &ElementSet {
        &self.rows[i]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |j| (i, j))).collect()
    }

    /// `{j : (i,j) ∈ M for some i ∈ x}`.
    pub fn apply_set(&self, x: &ElementSet) -> ElementSet {
        let mut out = ElementSet::empty(self.ground.len());
        for i in x.iter() {
            out.union_with(&self.rows[i]);
        }
        out
    }

    /// `{i : (i,j) ∈ M for some j ∈ y}`.
    pub fn pull_set(&self, y: &ElementSet) -> ElementSet {
        let n = self.ground.len();
        ElementSet::from_indices(n, (0..n).filter(|&i| !self.rows[i].is_disjoint(y)))
    }

    /// Arrows `i → j` for `(i,j) ∈ M`, `i ≠ j`.
    pub fn arrows(&self) -> Vec<(usize, usize)> {
        self.pairs().into_iter().filter(|(i, j)| i != j).collect()
    }

    /// Sites `i` with `(i,i) ∉ M`.
    pub fn blocked_sites(&self) -> Vec<usize> {
        (0..self.ground.len()).filter(|&i| !self.rows[i].contains(i)).collect()
    }
}

/// `M = {(i,j) : j ∈ m({i}↓)}`, or `NotAdditive` when `m` is not additive.
pub fn map_to_mset(space: &DecreasingSpace, m: &PosetMap) -> Result<MSet> {
    if m.img().len() != space.len() {
        return Err(Error::Dimension(format!("map has {} images for {} decreasing sets", m.img().len(), space.len())));
    }
    let g = space.ground().clone();
    let rows: Vec<ElementSet> = (0..g.len())
        .map(|i| {
            let x = space.index_of(g.down_of(i)).expect("principal ideals are decreasing");
            space.set(m.apply(x)).clone()
        })
        .collect();
    let candidate = MSet { ground: g, rows };
    let not_additive = |detail: String| Error::NotAdditive { map: m.name().to_string(), detail };
    if let Some((i, j, k, l)) = candidate.property_witness() {
        return Err(not_additive(format!("pair ({i},{j}) present but ({k},{l}) missing")));
    }
    for x in 0..space.len() {
        if space.set(m.apply(x)) != &candidate.apply_set(space.set(x)) {
            return Err(not_additive(format!("image of {} is not the union of images of its points", space.space().label(x))));
        }
    }
    Ok(candidate)
}

/// `m(x) = {j : (i,j) ∈ M for some i ∈ x}` as a self-map of `P_dec(Λ)`.
pub fn mset_to_map(space: &DecreasingSpace, mset: &MSet, name: impl Into<String>) -> Result<PosetMap> {
    if **space.ground() != **mset.ground() {
        return Err(Error::Dimension("pair set and space have different grounds".into()));
    }
    let img = (0..space.len())
        .map(|x| space.index_of(&mset.apply_set(space.set(x))).expect("property keeps images decreasing"))
        .collect();
    PosetMap::endo(space.space(), img, name)
}

/// `M′ = {(j,i) : (i,j) ∈ M}` over the reversed ground order.
pub fn transpose_mset(m: &MSet) -> MSet {
    let n = m.ground.len();
    let mut rows = vec![ElementSet::empty(n); n];
    for (i, j) in m.pairs() {
        rows[j].insert(i);
    }
    MSet { ground: Arc::new(m.ground.reversed()), rows }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramEvent {
    pub t: f64,
    pub mset: MSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arrow {
    pub t: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub t: f64,
    pub site: usize,
}

/// Time-sorted pair-set events on `Λ × [s,u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    ground: Arc<Poset>,
    s: f64,
    u: f64,
    events: Vec<DiagramEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Sites reachable at `u` from the given sites at `s`.
    Forward,
    /// Sites at `s` from which the given sites at `u` are reachable.
    Backward,
}

impl Diagram {
    pub fn new(ground: Arc<Poset>, s: f64, u: f64, mut events: Vec<DiagramEvent>) -> Result<Self> {
        if !(s <= u) {
            return Err(Error::Horizon { t: u, s, u });
        }
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        for (k, e) in events.iter().enumerate() {
            if !(e.t >= s && e.t <= u) {
                return Err(Error::Horizon { t: e.t, s, u });
            }
            if k > 0 && events[k - 1].t == e.t {
                return Err(Error::Parse(format!("two events at time {}", e.t)));
            }
            if *e.mset.ground != *ground {
                return Err(Error::Dimension(format!("event at {} uses a different ground", e.t)));
            }
        }
        Ok(Diagram { ground, s, u, events })
    }

    /// The diagram of an event log whose map `k` has pair set `msets[k]`.
    pub fn from_log(ground: Arc<Poset>, log: &EventLog, msets: &[MSet]) -> Result<Self> {
        let events = log
            .events
            .iter()
            .map(|e| {
                msets
                    .get(e.map)
                    .map(|m| DiagramEvent { t: e.t, mset: m.clone() })
                    .ok_or_else(|| Error::Dimension(format!("event refers to map {} of {}", e.map, msets.len())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ground, log.s, log.u, events)
    }

    pub fn ground(&self) -> &Arc<Poset> {
        &self.ground
    }

    pub fn horizon(&self) -> (f64, f64) {
        (self.s, self.u)
    }

    pub fn events(&self) -> &[DiagramEvent] {
        &self.events
    }

    pub fn arrows(&self) -> Vec<Arrow> {
        self.events
            .iter()
            .flat_map(|e| e.mset.arrows().into_iter().map(move |(from, to)| Arrow { t: e.t, from, to }))
            .collect()
    }

    pub fn blocks(&self) -> Vec<Block> {
        self.events
            .iter()
            .flat_map(|e| e.mset.blocked_sites().into_iter().map(move |site| Block { t: e.t, site }))
            .collect()
    }

    fn check_window(&self, s: f64, u: f64) -> Result<()> {
        for v in [s, u] {
            if !(v >= self.s && v <= self.u) {
                return Err(Error::Horizon { t: v, s: self.s, u: self.u });
            }
        }
        if s > u {
            return Err(Error::Horizon { t: s, s: self.s, u });
        }
        Ok(())
    }

    fn in_window(&self, lo: f64, hi: f64, include_hi: bool) -> impl DoubleEndedIterator<Item = &DiagramEvent> {
        self.events.iter().filter(move |e| e.t > lo && (e.t < hi || (include_hi && e.t == hi)))
    }

    fn check_sites(&self, x: &ElementSet) -> Result<()> {
        if x.universe() != self.ground.len() {
            return Err(Error::Dimension(format!("site set over {} sites, ground has {}", x.universe(), self.ground.len())));
        }
        Ok(())
    }
}

/// Open-path reachability over the events in `(s,u]`.
pub fn reach(d: &Diagram, x: &ElementSet, s: f64, u: f64, direction: Direction) -> Result<ElementSet> {
    d.check_window(s, u)?;
    d.check_sites(x)?;
    let mut cur = x.clone();
    match direction {
        Direction::Forward => d.in_window(s, u, true).for_each(|e| cur = e.mset.apply_set(&cur)),
        Direction::Backward => d.in_window(s, u, true).rev().for_each(|e| cur = e.mset.pull_set(&cur)),
    }
    Ok(cur)
}

/// Reference oracle: enumerates every site sequence (one site per segment
/// between events in `(s,u]`) and tests it against the open-path rules.
pub fn open_path_exists(d: &Diagram, i: usize, j: usize, s: f64, u: f64, budget: u128) -> Result<bool> {
    d.check_window(s, u)?;
    let events: Vec<&DiagramEvent> = d.in_window(s, u, true).collect();
    let n = d.ground.len();
    let needed = (n as u128).checked_pow(events.len() as u32 + 1).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut path = vec![0usize; events.len() + 1];
    for code in 0..needed {
        let mut c = code;
        for slot in path.iter_mut() {
            *slot = (c % n as u128) as usize;
            c /= n as u128;
        }
        if path[0] != i || path[events.len()] != j {
            continue;
        }
        let open = events.iter().enumerate().all(|(k, e)| {
            let (before, after) = (path[k], path[k + 1]);
            if before != after {
                e.mset.contains(before, after)
            } else {
                e.mset.contains(before, before)
            }
        });
        if open {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphicalReport {
    pub ok: bool,
    /// Some open path joins `x` at `s` to `y` at `u`.
    pub connected: bool,
    /// First check time at which `X_{s,t−}(x) ∩ Y_{−u,−t}(y) = ∅` disagrees
    /// with the absence of open paths.
    pub witness: Option<f64>,
    /// `(t, X_{s,t−}(x) ∩ Y_{−u,−t}(y) = ∅)` at `s`, each event time in `(s,u)` and `u`.
    pub values: Vec<(f64, bool)>,
}

/// Checks `1{X_{s,t−}(x) ∩ Y_{−u,−t}(y) = ∅} = 1{no open path from x to y}`
/// where the dual flow applies transposed pair sets of events in `[t,u)`.
pub fn check_graphical_duality(d: &Diagram, x: &ElementSet, y: &ElementSet, s: f64, u: f64) -> Result<GraphicalReport> {
    d.check_sites(x)?;
    d.check_sites(y)?;
    let connected = !reach(d, x, s, u, Direction::Forward)?.is_disjoint(y);
    let inner: Vec<&DiagramEvent> = d.in_window(s, u, false).collect();
    let mut xs = vec![x.clone()];
    for e in &inner {
        let next = e.mset.apply_set(xs.last().unwrap());
        xs.push(next);
    }
    let mut ys = vec![y.clone(); inner.len() + 1];
    for k in (0..inner.len()).rev() {
        ys[k] = inner[k].mset.pull_set(&ys[k + 1]);
    }
    let mut values = vec![(s, xs[0].is_disjoint(&ys[0]))];
    for (k, e) in inner.iter().enumerate() {
        values.push((e.t, xs[k].is_disjoint(&ys[k])));
    }
    values.push((u, xs[inner.len()].is_disjoint(y)));
    let witness = values.iter().find(|(_, v)| *v == connected).map(|(t, _)| *t);
    Ok(GraphicalReport { ok: witness.is_none(), connected, witness, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramEventJson {
    pub t: f64,
    pub pairs: Vec<[usize; 2]>,
}

/// `{"ground": poset-ref, "events": [{"t": .., "pairs": [[i,j],..]},..]}`
/// with optional horizon `s` (default 0) and `u` (default the larger of 1
/// and the last event time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub ground: PosetRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    pub events: Vec<DiagramEventJson>,
}

impl DiagramJson {
    pub fn resolve(&self) -> Result<Diagram> {
        let ground = Arc::new(self.ground.resolve()?);
        let last = self.events.iter().map(|e| e.t).fold(f64::NEG_INFINITY, f64::max);
        let first = self.events.iter().map(|e| e.t).fold(f64::INFINITY, f64::min);
        let s = self.s.unwrap_or(first.min(0.0));
        let u = self.u.unwrap_or(last.max(1.0));
        let events = self
            .events
            .iter()
            .map(|e| Ok(DiagramEvent { t: e.t, mset: MSet::new(ground.clone(), e.pairs.iter().map(|p| (p[0], p[1])))? }))
            .collect::<Result<Vec<_>>>()?;
        Diagram::new(ground, s, u, events)
    }
}

impl Diagram {
    pub fn to_json(&self, ground: PosetRef) -> DiagramJson {
        DiagramJson {
            ground,
            s: Some(self.s),
            u: Some(self.u),
            events: self
                .events
                .iter()
                .map(|e| DiagramEventJson { t: e.t, pairs: e.mset.pairs().into_iter().map(|(i, j)| [i, j]).collect() })
                .collect(),
        }
    }
}

const PANEL_TOP: f64 = 40.0;
const PANEL_HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;
const SITE_GAP: f64 = 40.0;
const PAIR_GAP: f64 = 14.0;

/// Horizontal site positions. Labels of equal length `≥ 2` are grouped by all
/// but their last character and drawn as closely spaced parallel lines.
fn site_positions(g: &Poset) -> (Vec<f64>, f64) {
    let labels = g.labels();
    let len = labels.first().map(|l| l.chars().count()).unwrap_or(0);
    let grouped = len >= 2 && labels.iter().all(|l| l.chars().count() == len);
    let key = |i: usize| -> (String, String) {
        if grouped {
            let cut = labels[i].char_indices().last().map(|(b, _)| b).unwrap_or(0);
            (labels[i][..cut].to_string(), labels[i][cut..].to_string())
        } else {
            (format!("{i:08}"), String::new())
        }
    };
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by_key(|&i| key(i));
    let mut xs = vec![0.0; g.len()];
    let mut pos = MARGIN;
    for (k, &i) in order.iter().enumerate() {
        if k > 0 {
            pos += if key(order[k - 1]).0 == key(i).0 { PAIR_GAP } else { SITE_GAP };
        }
        xs[i] = pos;
    }
    (xs, pos + MARGIN)
}

/// Sites on some open path from `x` at `s` to `y` at `u`, per segment
/// between consecutive events.
fn open_path_segments(d: &Diagram, x: &ElementSet, y: &ElementSet) -> Vec<ElementSet> {
    let k = d.events.len();
    let mut fwd = vec![x.clone()];
    for e in &d.events {
        let next = e.mset.apply_set(fwd.last().unwrap());
        fwd.push(next);
    }
    let mut bwd = vec![y.clone(); k + 1];
    for i in (0..k).rev() {
        bwd[i] = d.events[i].mset.pull_set(&bwd[i + 1]);
    }
    fwd.iter().zip(&bwd).map(|(f, b)| f.intersection(b)).collect()
}

/// Two-panel SVG: the forward picture with time upward and the dual picture
/// with time reversed and arrows reversed. Arrows `i → j` with `j < i` in the
/// ground order are implied by the order and not drawn. With `highlight =
/// (x, y)` the open paths from `x` to `y` are overlaid.
pub fn render_svg(d: &Diagram, highlight: Option<(&ElementSet, &ElementSet)>) -> Result<String> {
    if let Some((x, y)) = highlight {
        d.check_sites(x)?;
        d.check_sites(y)?;
    }
    let g = &d.ground;
    let (xs, panel_width) = site_positions(g);
    let width = 2.0 * panel_width;
    let height = PANEL_TOP + PANEL_HEIGHT + 40.0;
    let span = if d.u > d.s { d.u - d.s } else { 1.0 };
    let y_of = |t: f64, dual: bool| {
        let frac = (t - d.s) / span;
        if dual {
            PANEL_TOP + PANEL_HEIGHT * frac
        } else {
            PANEL_TOP + PANEL_HEIGHT * (1.0 - frac)
        }
    };
    let bottom = PANEL_TOP + PANEL_HEIGHT;
    let overlay = highlight.map(|(x, y)| open_path_segments(d, x, y));

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(
        out,
        r#"<defs><marker id="head" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="black"/></marker></defs>"#
    );
    let _ = writeln!(out, r#"<style>.site{{stroke:#555;stroke-width:1}} .arrow{{stroke:black;stroke-width:1.5}} .block{{stroke:black;stroke-width:4}} .path{{stroke:#c0392b;stroke-width:4;opacity:0.7}}</style>"#);
    for (panel, dual) in [(0.0, false), (panel_width, true)] {
        let title = if dual { "dual" } else { "forward" };
        let _ = writeln!(out, r#"<g class="panel-{title}">"#);
        let _ = writeln!(out, r#"<text x="{:.2}" y="20" text-anchor="middle">{title}</text>"#, panel + panel_width / 2.0);
        for i in 0..g.len() {
            let x = panel + xs[i];
            let _ = writeln!(out, r#"<line class="site" x1="{x:.2}" y1="{PANEL_TOP:.2}" x2="{x:.2}" y2="{bottom:.2}"/>"#);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#, bottom + 16.0, g.label(i));
        }
        if let Some(segs) = &overlay {
            let times: Vec<f64> = std::iter::once(d.s).chain(d.events.iter().map(|e| e.t)).chain(std::iter::once(d.u)).collect();
            for (k, on) in segs.iter().enumerate() {
                for i in on.iter() {
                    let x = panel + xs[i];
                    let (y1, y2) = (y_of(times[k], dual), y_of(times[k + 1], dual));
                    let _ = writeln!(out, r#"<line class="path" x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{y2:.2}"/>"#);
                }
                if k < d.events.len() {
                    let y = y_of(d.events[k].t, dual);
                    for (a, b) in d.events[k].mset.arrows() {
                        if on.contains(a) && segs[k + 1].contains(b) {
                            let (x1, x2) = (panel + xs[a], panel + xs[b]);
                            let _ = writeln!(out, r#"<line class="path" x1="{x1:.2}" y1="{y:.2}" x2="{x2:.2}" y2="{y:.2}"/>"#);
                        }
                    }
                }
            }
        }
        for e in &d.events {
            let y = y_of(e.t, dual);
            for (a, b) in e.mset.arrows() {
                if g.lt(b, a) {
                    continue;
                }
                let (from, to) = if dual { (b, a) } else { (a, b) };
                let (x1, x2) = (panel + xs[from], panel + xs[to]);
                let _ = writeln!(out, r#"<line class="arrow" x1="{x1:.2}" y1="{y:.2}" x2="{x2:.2}" y2="{y:.2}" marker-end="url(#head)"/>"#);
            }
            for i in e.mset.blocked_sites() {
                let x = panel + xs[i];
                let _ = writeln!(out, r#"<line class="block" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, x - 6.0, x + 6.0);
            }
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Sets of a union-closed family that an extended map sends back into the family.
pub fn family_is_invariant(full: &SetFamily, img: &[usize], t: &SetFamily) -> bool {
    t.sets().iter().all(|x| full.index_of(x).map(|i| t.index_of(full.get(img[i])).is_some()).unwrap_or(false))
}

/// Distinct pairs of a pair set, for display.
pub fn pair_labels(m: &MSet) -> BTreeSet<(String, String)> {
    m.pairs().into_iter().map(|(i, j)| (m.ground.label(i), m.ground.label(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::DualityPairing;
    use crate::lattice::{analyze_lattice, embed_join_semilattice, extend_additive_map, m3, n5};
    use crate::poset::product_poset;
    use crate::rng::SplitMix64;

    fn antichain(n: usize) -> Arc<Poset> {
        Arc::new(Poset::antichain(n))
    }

    fn set(n: usize, xs: &[usize]) -> ElementSet {
        ElementSet::from_indices(n, xs.iter().copied())
    }

    /// `vot_ij` on `P(Λ)`: copies site `i` onto site `j`.
    fn vot(sp: &DecreasingSpace, i: usize, j: usize) -> PosetMap {
        PosetMap::from_fn(sp.space(), format!("vot{i}{j}"), |x| {
            let mut s = sp.set(x).clone();
            if s.contains(i) {
                s.insert(j)
            } else {
                s.remove(j)
            }
            sp.index_of(&s).unwrap()
        })
        .unwrap()
    }

    fn vot_mset(g: &Arc<Poset>, i: usize, j: usize) -> MSet {
        MSet::new(g.clone(), (0..g.len()).filter(|&k| k != j).map(|k| (k, k)).chain([(i, j)])).unwrap()
    }

    #[test]
    fn encoding_examples() {
        let g = antichain(3);
        let sp = DecreasingSpace::new(g.clone()).unwrap();
        let id = PosetMap::identity(sp.space());
        assert_eq!(map_to_mset(&sp, &id).unwrap(), MSet::diagonal(g.clone()).unwrap());
        assert_eq!(map_to_mset(&sp, &vot(&sp, 0, 2)).unwrap(), vot_mset(&g, 0, 2));
        // rw_{ji} moves a particle from j to i
        let rw = MSet::new(g.clone(), [(0, 0), (1, 1), (2, 0)]).unwrap();
        let rw_map = mset_to_map(&sp, &rw, "rw20").unwrap();
        assert_eq!(sp.set(rw_map.apply(sp.index_of(&set(3, &[2])).unwrap())), &set(3, &[0]));
        assert_eq!(mset_to_map(&sp, &MSet::diagonal(g.clone()).unwrap(), "id").unwrap().img(), id.img());
        let zero = mset_to_map(&sp, &MSet::empty(g.clone()), "0").unwrap();
        assert!(zero.img().iter().all(|&v| sp.set(v).is_empty()));
        let swap = PosetMap::from_fn(sp.space(), "swap01", |x| {
            let s = sp.set(x);
            let t = ElementSet::from_indices(3, s.iter().map(|k| [1, 0, 2][k]));
            sp.index_of(&t).unwrap()
        })
        .unwrap();
        assert!(map_to_mset(&sp, &swap).is_ok());
        let not_additive = PosetMap::from_fn(sp.space(), "full", |x| if sp.set(x).len() >= 2 { sp.len() - 1 } else { x }).unwrap();
        assert!(map_to_mset(&sp, &not_additive).is_err());
    }

    #[test]
    fn property_violation_is_reported() {
        let g = Arc::new(Poset::chain(2));
        assert!(matches!(MSet::diagonal(g.clone()), Err(Error::MSetProperty { .. })));
        assert!(MSet::new(g, [(0, 0), (1, 0), (1, 1)]).is_ok());
    }

    fn krone_ground(sites: usize) -> Arc<Poset> {
        Arc::new(product_poset(&[Poset::antichain(sites), Poset::chain(2)]).unwrap())
    }

    /// Krone level of site `i` in a decreasing set of `Λ×{0,1}`.
    fn level(s: &ElementSet, sites: usize, i: usize) -> usize {
        s.contains(i) as usize + s.contains(i + sites) as usize
    }

    fn krone_map(sp: &DecreasingSpace, sites: usize, name: &str, f: impl Fn(&mut Vec<usize>)) -> PosetMap {
        PosetMap::from_fn(sp.space(), name, |x| {
            let s = sp.set(x);
            let mut lv: Vec<usize> = (0..sites).map(|i| level(s, sites, i)).collect();
            f(&mut lv);
            let idx = (0..sites).flat_map(|i| (0..lv[i]).map(move |b| i + sites * b));
            sp.index_of(&ElementSet::from_indices(2 * sites, idx)).unwrap()
        })
        .unwrap()
    }

    #[test]
    fn krone_grow_up_from_arrows() {
        let g = krone_ground(2);
        let sp = DecreasingSpace::new(g.clone()).unwrap();
        let pairs = MSet::identity(g.clone()).pairs().into_iter().chain([(0, 2)]);
        let m = mset_to_map(&sp, &MSet::new(g.clone(), pairs).unwrap(), "a0").unwrap();
        let a0 = krone_map(&sp, 2, "a0", |lv| {
            if lv[0] == 1 {
                lv[0] = 2
            }
        });
        assert_eq!(m.img(), a0.img());
    }

    #[test]
    fn krone_young_dies_transposes_to_grow_younger() {
        let sites = 2;
        let g = krone_ground(sites);
        let sp = DecreasingSpace::new(g.clone()).unwrap();
        let c0 = krone_map(&sp, sites, "c0", |lv| {
            if lv[0] == 1 {
                lv[0] = 0
            }
        });
        let mc = map_to_mset(&sp, &c0).unwrap();
        assert_eq!(mc.blocked_sites(), vec![0]);
        let mt = transpose_mset(&mc);
        let dual_sp = DecreasingSpace::new(mt.ground().clone()).unwrap();
        let dual_map = mset_to_map(&dual_sp, &mt, "c0'").unwrap();
        // an increasing set of Λ×{0,1} at Krone level k holds the top k points of each site
        let e0 = PosetMap::from_fn(dual_sp.space(), "e0", |y| {
            let s = dual_sp.set(y);
            let mut lv: Vec<usize> = (0..sites).map(|i| level(s, sites, i)).collect();
            if lv[0] == 2 {
                lv[0] = 1
            }
            let idx = (0..sites).flat_map(|i| (0..lv[i]).map(move |b| i + sites * (1 - b)));
            dual_sp.index_of(&ElementSet::from_indices(2 * sites, idx)).unwrap()
        })
        .unwrap();
        assert_eq!(dual_map.img(), e0.img());
    }

    /// Pairing of `P_dec(Λ)` with `P_dec(Λ′)` by complements.
    fn complement_pairing(sp: &DecreasingSpace, dual_sp: &DecreasingSpace) -> DualityPairing {
        let prime = (0..sp.len())
            .map(|x| dual_sp.index_of(&sp.set(x).complement()).unwrap())
            .collect::<Vec<_>>();
        DualityPairing::new(sp.space().clone(), prime).unwrap()
    }

    fn all_msets(g: &Arc<Poset>) -> Vec<MSet> {
        let n = g.len();
        (0u32..1 << (n * n))
            .filter_map(|bits| MSet::new(g.clone(), (0..n * n).filter(|b| bits >> b & 1 == 1).map(|b| (b / n, b % n))).ok())
            .collect()
    }

    fn small_grounds() -> Vec<Arc<Poset>> {
        vec![
            antichain(2),
            antichain(3),
            Arc::new(Poset::chain(2)),
            Arc::new(Poset::chain(3)),
            Arc::new(Poset::from_covers(3, &[(0, 2), (1, 2)]).unwrap()),
            Arc::new(Poset::from_covers(3, &[(0, 1), (0, 2)]).unwrap()),
            Arc::new(Poset::from_covers(3, &[(0, 1)]).unwrap()),
        ]
    }

    #[test]
    fn bijection_and_transpose_exhaustive() {
        for g in small_grounds() {
            let sp = DecreasingSpace::new(g.clone()).unwrap();
            let dual_sp = DecreasingSpace::new(Arc::new(g.reversed())).unwrap();
            let pairing = complement_pairing(&sp, &dual_sp);
            let msets = all_msets(&g);
            assert!(!msets.is_empty());
            for m in &msets {
                let map = mset_to_map(&sp, m, "m").unwrap();
                assert_eq!(&map_to_mset(&sp, &map).unwrap(), m);
                let mt = transpose_mset(m);
                assert_eq!(&transpose_mset(&mt).pairs(), &m.pairs());
                assert!(mt.property_witness().is_none());
                let dual_map = mset_to_map(&dual_sp, &mt, "m'").unwrap();
                let ad = pairing.additive_dual(&map).unwrap();
                for y in 0..pairing.dual_space().len() {
                    // dual element y stands for the complement of the set unprime(y)
                    let yset = sp.set(pairing.unprime(y)).complement();
                    let image = sp.set(pairing.unprime(ad.apply(y))).complement();
                    assert_eq!(dual_sp.set(dual_map.apply(dual_sp.index_of(&yset).unwrap())), &image);
                }
            }
        }
    }

    fn random_voter_diagram(rng: &mut SplitMix64, g: &Arc<Poset>, max_events: usize) -> Diagram {
        let n = g.len();
        let k = rng.below(max_events + 1);
        let events = (0..k)
            .map(|e| {
                let i = rng.below(n);
                let mut j = rng.below(n - 1);
                if j >= i {
                    j += 1;
                }
                let mset = if rng.below(4) == 0 {
                    MSet::new(g.clone(), (0..n).filter(|&k| k != i).map(|k| (k, k))).unwrap()
                } else {
                    vot_mset(g, i, j)
                };
                DiagramEvent { t: (e + 1) as f64 / (k + 1) as f64, mset }
            })
            .collect();
        Diagram::new(g.clone(), 0.0, 1.0, events).unwrap()
    }

    #[test]
    fn reach_examples() {
        let g = antichain(3);
        let empty = Diagram::new(g.clone(), 0.0, 1.0, vec![]).unwrap();
        let x = set(3, &[0, 2]);
        assert_eq!(reach(&empty, &x, 0.0, 1.0, Direction::Forward).unwrap(), x);
        let kill = MSet::new(g.clone(), [(1, 1), (2, 2)]).unwrap();
        let d = Diagram::new(g.clone(), 0.0, 1.0, vec![DiagramEvent { t: 0.5, mset: kill }]).unwrap();
        assert!(reach(&d, &set(3, &[0]), 0.0, 1.0, Direction::Forward).unwrap().is_empty());
        assert!(reach(&d, &set(3, &[0]), 0.0, 2.0, Direction::Forward).is_err());
    }

    #[test]
    fn reach_matches_oracle_and_splits() {
        let g = antichain(3);
        let mut rng = SplitMix64::new(11);
        for _ in 0..60 {
            let d = random_voter_diagram(&mut rng, &g, 4);
            for i in 0..3 {
                let fwd = reach(&d, &set(3, &[i]), 0.0, 1.0, Direction::Forward).unwrap();
                for j in 0..3 {
                    assert_eq!(fwd.contains(j), open_path_exists(&d, i, j, 0.0, 1.0, 1 << 20).unwrap());
                    let bwd = reach(&d, &set(3, &[j]), 0.0, 1.0, Direction::Backward).unwrap();
                    assert_eq!(bwd.contains(i), fwd.contains(j));
                }
            }
            for bits in 0..8u64 {
                let x = ElementSet::from_mask(3, bits);
                let whole = reach(&d, &x, 0.0, 1.0, Direction::Forward).unwrap();
                let mid = reach(&d, &x, 0.0, 0.45, Direction::Forward).unwrap();
                assert_eq!(reach(&d, &mid, 0.45, 1.0, Direction::Forward).unwrap(), whole);
            }
        }
    }

    #[test]
    fn graphical_duality_examples() {
        let g = antichain(3);
        let empty = Diagram::new(g.clone(), 0.0, 1.0, vec![]).unwrap();
        let r = check_graphical_duality(&empty, &set(3, &[0]), &set(3, &[1]), 0.0, 1.0).unwrap();
        assert!(r.ok && !r.connected && r.values.iter().all(|v| v.1));
        let arrow = Diagram::new(g.clone(), 0.0, 1.0, vec![DiagramEvent { t: 0.5, mset: vot_mset(&g, 0, 1) }]).unwrap();
        let r = check_graphical_duality(&arrow, &set(3, &[0]), &set(3, &[1]), 0.0, 1.0).unwrap();
        assert!(r.ok && r.connected && r.values.iter().all(|v| !v.1));
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let d = random_voter_diagram(&mut rng, &g, 8);
            for a in 0..8u64 {
                for b in 0..8u64 {
                    let r = check_graphical_duality(&d, &ElementSet::from_mask(3, a), &ElementSet::from_mask(3, b), 0.0, 1.0).unwrap();
                    assert!(r.ok, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = antichain(3);
        let d = Diagram::new(g.clone(), 0.0, 2.0, vec![DiagramEvent { t: 0.5, mset: vot_mset(&g, 0, 1) }]).unwrap();
        let j = d.to_json(PosetRef::Builtin("antichain:3".into()));
        let text = serde_json::to_string(&j).unwrap();
        let back: DiagramJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.resolve().unwrap(), d);
        let bare: DiagramJson = serde_json::from_str(r#"{"ground":"antichain:2","events":[{"t":0.3,"pairs":[[0,1],[0,0]]}]}"#).unwrap();
        assert_eq!(bare.resolve().unwrap().horizon(), (0.0, 1.0));
        let bad: DiagramJson = serde_json::from_str(r#"{"ground":"chain:2","events":[{"t":0.3,"pairs":[[0,0]]}]}"#).unwrap();
        assert!(matches!(bad.resolve(), Err(Error::MSetProperty { .. })));
    }

    #[test]
    fn svg_glyph_counts() {
        let g = antichain(3);
        let empty = Diagram::new(g.clone(), 0.0, 1.0, vec![]).unwrap();
        let svg = render_svg(&empty, None).unwrap();
        assert_eq!(svg.matches(r#"class="site""#).count(), 6);
        assert_eq!(svg.matches(r#"class="arrow""#).count(), 0);
        let mut rng = SplitMix64::new(3);
        let d = random_voter_diagram(&mut rng, &g, 8);
        let svg = render_svg(&d, Some((&set(3, &[0]), &set(3, &[1, 2])))).unwrap();
        assert_eq!(svg.matches(r#"class="arrow""#).count(), 2 * d.arrows().len());
        assert_eq!(svg.matches(r#"class="block""#).count(), 2 * d.blocks().len());
        assert_eq!(svg, render_svg(&d, Some((&set(3, &[0]), &set(3, &[1, 2])))).unwrap());
    }

    #[test]
    fn svg_pairs_krone_sites() {
        let g = krone_ground(3);
        let (xs, _) = site_positions(&g);
        for i in 0..3 {
            assert!((xs[i + 3] - xs[i]).abs() == PAIR_GAP);
        }
        assert!(xs[1] - xs[3] == SITE_GAP);
    }

    #[test]
    fn extension_leaves_family_invariant() {
        for l in [m3(), n5()] {
            let info = analyze_lattice(&l);
            let t = embed_join_semilattice(&info).unwrap();
            let n = l.len();
            let mut checked = 0;
            for code in 0..n.pow(n as u32) {
                let img: Vec<usize> = (0..n).map(|k| code / n.pow(k as u32) % n).collect();
                let space = Arc::new(l.clone());
                let m = PosetMap::endo(&space, img.clone(), "m").unwrap();
                if !m.is_additive_with(&info, &info).unwrap() {
                    continue;
                }
                // element k of the lattice is set k of the family
                let ext = extend_additive_map(&t, &img).unwrap();
                assert!(family_is_invariant(&ext.full, &ext.img, &t));
                checked += 1;
            }
            assert!(checked > 0);
        }
    }
}
