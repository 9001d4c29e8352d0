//! Poisson event logs, stochastic flows, reversed dual logs and pathwise checks.
//!
//! Sampling uses [`SplitMix64`] in a fixed draw order (event count, then per
//! event its time followed by its map), so a seed determines a log on every
//! platform.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::PsiTable;
use crate::error::{Error, Result};
use crate::markov::{MonotoneDualRep, RandomMappingRep};
use crate::num::Scalar;
use crate::rng::SplitMix64;

/// Image tables and rates of a random mapping representation, detached from
/// the poset structure.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSystem {
    pub tables: Vec<Vec<usize>>,
    pub rates: Vec<f64>,
    pub names: Vec<String>,
    pub labels: Vec<String>,
}

impl FlowSystem {
    pub fn from_rep<R: Scalar>(rep: &RandomMappingRep<R>) -> Self {
        FlowSystem {
            tables: rep.entries().iter().map(|(m, _)| m.img().to_vec()).collect(),
            rates: rep.rates_f64(),
            names: rep.entries().iter().map(|(m, _)| m.name().to_string()).collect(),
            labels: rep.space().labels(),
        }
    }

    pub fn from_monotone_dual<R: Scalar>(d: &MonotoneDualRep<R>) -> Self {
        FlowSystem {
            tables: d.tables.clone(),
            rates: d.rates.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
            names: d.names.clone(),
            labels: d.labels.clone(),
        }
    }

    pub fn states(&self) -> usize {
        self.labels.len()
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub map: usize,
    pub t: f64,
}

/// Events of a Poisson point set on a horizon `[s,u]`, sorted by time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub s: f64,
    pub u: f64,
    pub events: Vec<Event>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl EventLog {
    pub fn new(s: f64, u: f64, mut events: Vec<Event>) -> Result<Self> {
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        let log = EventLog { s, u, events, seed: None };
        log.validate()?;
        Ok(log)
    }

    pub fn empty(s: f64, u: f64) -> Self {
        EventLog { s, u, events: Vec::new(), seed: None }
    }

    /// Strictly increasing times inside `[s,u]`.
    pub fn validate(&self) -> Result<()> {
        if !(self.s <= self.u) {
            return Err(Error::Horizon { t: self.u, s: self.s, u: self.u });
        }
        let mut last = f64::NEG_INFINITY;
        for e in &self.events {
            if !(e.t >= self.s && e.t <= self.u) {
                return Err(Error::Horizon { t: e.t, s: self.s, u: self.u });
            }
            if e.t <= last {
                return Err(Error::Parse(format!("event times must be distinct and sorted, {} after {last}", e.t)));
            }
            last = e.t;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let log: EventLog = serde_json::from_str(text)?;
        log.validate()?;
        Ok(log)
    }
}

/// Samples `Δ ∩ (s,u)` for maps with the given rates.
pub fn sample_events(rates: &[f64], s: f64, u: f64, seed: u64) -> Result<EventLog> {
    if !(s <= u) {
        return Err(Error::Horizon { t: u, s, u });
    }
    if let Some((k, r)) = rates.iter().enumerate().find(|(_, r)| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::NegativeRate { map: format!("#{k}"), rate: r.to_string() });
    }
    let total: f64 = rates.iter().sum();
    let mut rng = SplitMix64::new(seed);
    let mut log = EventLog { s, u, events: Vec::new(), seed: Some(seed) };
    if total == 0.0 || s == u {
        return Ok(log);
    }
    let count = rng.poisson(total * (u - s));
    loop {
        log.events.clear();
        for _ in 0..count {
            let t = loop {
                let t = s + (u - s) * rng.open01();
                if t > s && t < u {
                    break t;
                }
            };
            let mut target = rng.open01() * total;
            let mut map = rates.len() - 1;
            for (k, &r) in rates.iter().enumerate() {
                if target < r {
                    map = k;
                    break;
                }
                target -= r;
            }
            while rates[map] == 0.0 {
                map -= 1;
            }
            log.events.push(Event { map, t });
        }
        log.events.sort_by(|a, b| a.t.total_cmp(&b.t));
        if log.events.windows(2).all(|w| w[0].t < w[1].t) {
            return Ok(log);
        }
    }
}

pub fn sample_event_log<R: Scalar>(rep: &RandomMappingRep<R>, s: f64, u: f64, seed: u64) -> Result<EventLog> {
    sample_events(&rep.rates_f64(), s, u, seed)
}

/// Which events at the right end of the interval count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Events in `(s,t]`.
    Right,
    /// Events in `(s,t)`: the left limit `X_{s,t−}`.
    Left,
}

/// `X_{s,t}(x)` (or `X_{s,t−}(x)`): the maps of the selected events applied in time order.
pub fn flow_eval(log: &EventLog, sys: &FlowSystem, s: f64, t: f64, x: usize, side: Side) -> Result<usize> {
    for v in [s, t] {
        if !(v >= log.s && v <= log.u) {
            return Err(Error::Horizon { t: v, s: log.s, u: log.u });
        }
    }
    if s > t {
        return Err(Error::Horizon { t: s, s: log.s, u: t });
    }
    if x >= sys.states() {
        return Err(Error::Dimension(format!("state {x} outside 0..{}", sys.states())));
    }
    let mut state = x;
    for e in &log.events {
        let inside = e.t > s && (e.t < t || (side == Side::Right && e.t == t));
        if inside {
            state = sys.tables[e.map][state];
        }
    }
    Ok(state)
}

/// `Δ̂ = {(m̂, −t)}` on `[−u,−s]`, with `dualizer` sending a map index of the
/// source system to one of the dual system.
pub fn dual_event_log<E>(log: &EventLog, mut dualizer: impl FnMut(usize) -> std::result::Result<usize, E>) -> std::result::Result<EventLog, E> {
    let mut events = Vec::with_capacity(log.len());
    for e in log.events.iter().rev() {
        events.push(Event { map: dualizer(e.map)?, t: -e.t });
    }
    Ok(EventLog { s: -log.u, u: -log.s, events, seed: log.seed })
}

/// One evaluation of `ψ(X_{s,t−}(x), Y_{−u,−t}(y))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub t: f64,
    pub x: usize,
    pub y: usize,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathwiseReport {
    pub ok: bool,
    /// First check time at which the value differs from the value at `s`.
    pub first_violation: Option<f64>,
    /// `ψ(x, Y_{−u,−s}(y)) = ψ(X_{s,u}(x), y)`.
    pub endpoints_ok: bool,
    pub points: Vec<PathPoint>,
}

/// Evaluates `t ↦ ψ(X_{s,t−}(x), Y_{−u,−t}(y))` at `s`, every event time in
/// `(s,u)` and `u`. The dual flow reuses the same events: `Y_{−u,−t}`
/// applies the dual maps of events in `[t,u)` from the latest to the
/// earliest. `dual_of[k]` indexes the dual of map `k` in `dual`.
#[allow(clippy::too_many_arguments)]
pub fn check_pathwise_constancy(
    log: &EventLog,
    sys: &FlowSystem,
    dual: &FlowSystem,
    dual_of: &[usize],
    psi: &PsiTable,
    x: usize,
    y: usize,
    s: f64,
    u: f64,
) -> Result<PathwiseReport> {
    if !(s >= log.s && u <= log.u && s <= u) {
        return Err(Error::Horizon { t: u, s: log.s, u: log.u });
    }
    if psi.rows() != sys.states() || psi.cols() != dual.states() || x >= sys.states() || y >= dual.states() {
        return Err(Error::Dimension("pairing table does not match the two systems".into()));
    }
    if dual_of.len() != sys.tables.len() {
        return Err(Error::Dimension("one dual map per map required".into()));
    }
    let inner: Vec<&Event> = log.events.iter().filter(|e| e.t > s && e.t < u).collect();
    let mut xs = Vec::with_capacity(inner.len() + 1);
    xs.push(x);
    for e in &inner {
        xs.push(sys.tables[e.map][*xs.last().unwrap()]);
    }
    let mut ys = vec![y; inner.len() + 1];
    for k in (0..inner.len()).rev() {
        ys[k] = dual.tables[dual_of[inner[k].map]][ys[k + 1]];
    }
    let mut points = vec![PathPoint { t: s, x, y: ys[0], psi: psi.get(x, ys[0]) }];
    for (k, e) in inner.iter().enumerate() {
        points.push(PathPoint { t: e.t, x: xs[k], y: ys[k], psi: psi.get(xs[k], ys[k]) });
    }
    let last = *xs.last().unwrap();
    points.push(PathPoint { t: u, x: last, y, psi: psi.get(last, y) });
    let first_violation = points.iter().find(|p| p.psi != points[0].psi).map(|p| p.t);
    let x_su = flow_eval(log, sys, s, u, x, Side::Right)?;
    let endpoints_ok = psi.get(x, ys[0]) == psi.get(x_su, y);
    Ok(PathwiseReport { ok: first_violation.is_none() && endpoints_ok, first_violation, endpoints_ok, points })
}

/// Trace CSV with columns `replica,t,X,Y,psi`.
pub fn trace_csv(rows: &[(usize, PathPoint)], sys: &FlowSystem, dual: &FlowSystem) -> String {
    let mut out = String::from("replica,t,X,Y,psi\n");
    for (r, p) in rows {
        out.push_str(&format!("{r},{},{},{},{}\n", p.t, sys.labels[p.x], dual.labels[p.y], p.psi));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// Mean of `ψ(X_t, y0)` with `X_0 = x0`.
    pub mean_lhs: f64,
    /// Mean of `ψ(x0, Y_t)` with `Y_0 = y0`.
    pub mean_rhs: f64,
    /// `sqrt((s_lhs² + s_rhs²)/N)` from the sample variances.
    pub stderr: f64,
    pub n: u64,
}

impl McEstimate {
    /// `|mean_lhs − mean_rhs| ≤ k · stderr`.
    pub fn within(&self, k: f64) -> bool {
        (self.mean_lhs - self.mean_rhs).abs() <= k * self.stderr
    }
}

fn endpoint_state(sys: &FlowSystem, t: f64, x: usize, seed: u64) -> Result<usize> {
    let log = sample_events(&sys.rates, 0.0, t, seed)?;
    flow_eval(&log, sys, 0.0, t, x, Side::Right)
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Independent simulations of both sides of `E ψ(X_t, y0) = E ψ(x0, Y_t)`.
/// Replica `i` of the forward side uses seed `seed + i`, of the dual side
/// `seed + n + i`. Results do not depend on `jobs`.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_duality(
    sys: &FlowSystem,
    dual: &FlowSystem,
    psi: &PsiTable,
    x0: usize,
    y0: usize,
    t: f64,
    n: u64,
    seed: u64,
    jobs: usize,
) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::InvalidModel("at least one replica is required".into()));
    }
    if psi.rows() != sys.states() || psi.cols() != dual.states() || x0 >= sys.states() || y0 >= dual.states() {
        return Err(Error::Dimension("pairing table does not match the two systems".into()));
    }
    let run = |i: u64| -> Result<(f64, f64)> {
        let xt = endpoint_state(sys, t, x0, seed.wrapping_add(i))?;
        let yt = endpoint_state(dual, t, y0, seed.wrapping_add(n).wrapping_add(i))?;
        Ok((psi.get(xt, y0), psi.get(x0, yt)))
    };
    let pairs: Vec<(f64, f64)> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        pool.install(|| (0..n).into_par_iter().map(run).collect::<Result<Vec<_>>>())?
    } else {
        (0..n).map(run).collect::<Result<Vec<_>>>()?
    };
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (mean_lhs, var_lhs) = mean_and_var(&lhs);
    let (mean_rhs, var_rhs) = mean_and_var(&rhs);
    Ok(McEstimate { mean_lhs, mean_rhs, stderr: ((var_lhs + var_rhs) / n as f64).sqrt(), n })
}
