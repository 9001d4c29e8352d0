//! Model loading and the report-producing operations shared by the CLI and
//! the C bindings. Every report is deterministic given its inputs and seed.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::duality::{verify_map_duality, Antichain, DualityMode};
use crate::error::{Error, Result};
use crate::flow::{check_pathwise_constancy, monte_carlo_duality, sample_events, trace_csv, FlowSystem, PathPoint};
use crate::maps::{AdditiveViolation, PosetRef};
use crate::markov::{build_generator, check_intertwining, generator_from_tables, psi_matrix, semigroup_duality_check, transition_matrix};
use crate::models::{spin_msets, DualSystem, DualVariant, KroneSetCoding, Model, ModelSpec, BUILTIN_MODELS};
use crate::num::{rational_from_f64, Rational};
use crate::percolation::{render_svg, Diagram, DiagramJson, MSet};
use crate::poset::{Poset, PosetJson};

/// Environment variable naming a directory for memoized monotone closures.
pub const CACHE_ENV: &str = "ORDERDUAL_CACHE";

/// Truncation tolerance of every uniformized semigroup.
pub const UNIFORMIZATION_TOL: f64 = 1e-12;

/// A model together with the description it was built from.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub spec: ModelSpec,
    pub model: Model,
}

impl LoadedModel {
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        let model = spec.build()?;
        Ok(LoadedModel { spec, model })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(ModelSpec::from_json(text)?)
    }

    /// `variant` or the model's default.
    pub fn variant(&self, variant: Option<DualVariant>) -> DualVariant {
        variant.unwrap_or_else(|| self.model.default_variant())
    }

    /// The dual process, read from and written to the closure cache for monotone variants.
    pub fn dual_system(&self, variant: DualVariant) -> Result<DualSystem> {
        match (variant.monotone_kind(), std::env::var_os(CACHE_ENV)) {
            (Some(_), Some(dir)) if !dir.is_empty() => self.cached_dual_system(variant, Path::new(&dir)),
            _ => self.model.dual_system(variant),
        }
    }

    fn cache_path(&self, variant: DualVariant, dir: &Path) -> Result<PathBuf> {
        let mut h = DefaultHasher::new();
        self.spec.to_json()?.hash(&mut h);
        let tag = serde_json::to_string(&variant)?;
        Ok(dir.join(format!("closure-{}-{}-{:016x}.json", env!("CARGO_PKG_VERSION"), tag.trim_matches('"'), h.finish())))
    }

    fn cached_dual_system(&self, variant: DualVariant, dir: &Path) -> Result<DualSystem> {
        let path = self.cache_path(variant, dir)?;
        if let Some(ds) = std::fs::read_to_string(&path).ok().and_then(|t| self.restore(variant, &t)) {
            return Ok(ds);
        }
        let ds = self.model.dual_system(variant)?;
        let entry = CachedClosure {
            states: ds.states.iter().map(|a| a.members().to_vec()).collect(),
            tables: ds.system.tables.clone(),
            rates: ds.system.rates.clone(),
            names: ds.system.names.clone(),
            labels: ds.system.labels.clone(),
        };
        // a cache that cannot be written only costs recomputation
        if std::fs::create_dir_all(dir).is_ok() {
            let tmp = path.with_extension("tmp");
            if std::fs::write(&tmp, serde_json::to_string(&entry)?).is_ok() {
                let _ = std::fs::rename(&tmp, &path);
            }
        }
        Ok(ds)
    }

    /// Rebuilds a cached closure; `None` when it does not fit this model.
    fn restore(&self, variant: DualVariant, text: &str) -> Option<DualSystem> {
        let c: CachedClosure = serde_json::from_str(text).ok()?;
        let kind = variant.monotone_kind()?;
        let n = c.states.len();
        let maps = self.model.map_count();
        let dual_n = self.model.pairing.dual_space().len();
        let fits = c.tables.len() == maps
            && c.rates.len() == maps
            && c.names.len() == maps
            && c.labels.len() == n
            && c.tables.iter().all(|t| t.len() == n && t.iter().all(|&j| j < n))
            && c.states.iter().all(|s| s.iter().all(|&y| y < dual_n));
        if !fits {
            return None;
        }
        let states: Vec<Antichain> = c.states.into_iter().map(Antichain::new).collect();
        let psi = if kind.uses_phi_tilde() {
            self.model.pairing.phi_tilde_table(&states)
        } else {
            self.model.pairing.phi_table(&states)
        };
        let system = FlowSystem { tables: c.tables, rates: c.rates, names: c.names, labels: c.labels };
        Some(DualSystem { variant, system, psi, dual_of: (0..maps).collect(), states })
    }
}

#[derive(Serialize, Deserialize)]
struct CachedClosure {
    states: Vec<Vec<usize>>,
    tables: Vec<Vec<usize>>,
    rates: Vec<f64>,
    names: Vec<String>,
    labels: Vec<String>,
}

/// A path to a JSON model file, or a builtin `name[:N]`.
pub fn load_model(arg: &str) -> Result<LoadedModel> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let spec = ModelSpec::from_json(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{arg}: {m}")),
            other => other,
        })?;
        return LoadedModel::from_spec(spec);
    }
    LoadedModel::from_spec(ModelSpec::builtin(arg)?)
}

/// Name and description of every builtin.
pub fn models_list() -> String {
    let width = BUILTIN_MODELS.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    BUILTIN_MODELS.iter().map(|(n, d)| format!("{n:width$}  {d}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapClass {
    pub name: String,
    pub rate: f64,
    pub monotone: bool,
    pub additive: bool,
    /// `x ≤ y` with images out of order, as labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone_witness: Option<[String; 2]>,
    /// Why the map fails to preserve the bottom element or joins.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub additive_witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub model: String,
    pub states: usize,
    pub maps: Vec<MapClass>,
    pub all_monotone: bool,
    pub all_additive: bool,
    pub default_variant: DualVariant,
}

impl ClassifyReport {
    /// Fixed-width text table, one row per map.
    pub fn table(&self) -> String {
        let width = self.maps.iter().map(|m| m.name.len()).chain([3]).max().unwrap();
        let yes = |b: bool| if b { "yes" } else { "no" };
        let mut out = format!("model {} ({} states, {} maps)\n", self.model, self.states, self.maps.len());
        out.push_str(&format!("{:width$}  {:>8}  {:8}  {:8}  witness\n", "map", "rate", "monotone", "additive"));
        for m in &self.maps {
            let witness = match (&m.monotone_witness, &m.additive_witness) {
                (Some([x, y]), _) => format!("{x} <= {y} but images are not ordered"),
                (None, Some(w)) => w.clone(),
                (None, None) => String::new(),
            };
            let line = format!("{:width$}  {:>8}  {:8}  {:8}  {witness}", m.name, m.rate, yes(m.monotone), yes(m.additive));
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

pub fn classify(lm: &LoadedModel) -> Result<ClassifyReport> {
    let m = &lm.model;
    let space = m.space();
    let maps = m
        .rep
        .entries()
        .iter()
        .map(|(map, rate)| {
            let monotone_witness = map.monotone_witness().map(|(x, y)| [space.label(x), space.label(y)]);
            let (additive, additive_witness) = match map.additive_report() {
                Ok(r) => (
                    r.additive,
                    r.witness.map(|w| match w {
                        AdditiveViolation::Zero { image } => {
                            format!("bottom is sent to {}", space.label(image))
                        }
                        AdditiveViolation::Join { x, y } => {
                            format!("join of {} and {} is not preserved", space.label(x), space.label(y))
                        }
                    }),
                ),
                Err(e) => (false, Some(e.to_string())),
            };
            MapClass {
                name: map.name().to_string(),
                rate: *rate,
                monotone: monotone_witness.is_none(),
                additive,
                monotone_witness,
                additive_witness,
            }
        })
        .collect::<Vec<_>>();
    Ok(ClassifyReport {
        model: m.name.clone(),
        states: m.state_count(),
        all_monotone: maps.iter().all(|c| c.monotone),
        all_additive: maps.iter().all(|c| c.additive),
        maps,
        default_variant: m.default_variant(),
    })
}

/// A failed pairing `ψ(m(x),y) ≠ ψ(x,m̂(y))`, with state labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelledCounterexample {
    pub map: String,
    pub x: String,
    pub y: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub map: String,
    pub dual: String,
    pub ok: bool,
    pub pairs_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<LabelledCounterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualizeReport {
    pub model: String,
    pub variant: DualVariant,
    pub dual_states: usize,
    pub ok: bool,
    pub dual: ModelSpec,
    pub checks: Vec<PairCheck>,
}

fn pair_checks(m: &Model, ds: &DualSystem) -> Result<Vec<PairCheck>> {
    let sys = m.system();
    (0..m.map_count())
        .map(|k| {
            let d = ds.dual_of[k];
            let r = verify_map_duality(&ds.psi, &sys.tables[k], &ds.system.tables[d], DualityMode::Equal)?;
            Ok(PairCheck {
                map: sys.names[k].clone(),
                dual: ds.system.names[d].clone(),
                ok: r.ok,
                pairs_checked: r.pairs_checked,
                counterexample: r.counterexample.map(|c| LabelledCounterexample {
                    map: sys.names[k].clone(),
                    x: sys.labels[c.x].clone(),
                    y: ds.system.labels[c.y].clone(),
                    lhs: c.lhs,
                    rhs: c.rhs,
                }),
            })
        })
        .collect()
}

/// The dual process as a loadable model description. Additive duals live on
/// `S′` with the inverse bijection as their own prime map; monotone duals live
/// on their closed set of antichains, taken as an unordered state space.
fn dual_spec(m: &Model, ds: &DualSystem) -> ModelSpec {
    let maps = (0..ds.system.tables.len())
        .map(|k| crate::models::CustomMap {
            img: ds.system.tables[k].clone(),
            rate: ds.system.rates[k],
            name: Some(ds.system.names[k].clone()),
        })
        .collect();
    match ds.variant {
        DualVariant::Prime => {
            let d = m.pairing.dual_space();
            ModelSpec::Custom {
                space: PosetRef::Inline(d.to_json()),
                prime: Some((0..d.len()).map(|y| m.pairing.unprime(y)).collect()),
                maps,
                dual: None,
            }
        }
        _ => ModelSpec::Custom {
            space: PosetRef::Inline(PosetJson { n: ds.system.states(), cover: Vec::new(), labels: Some(ds.system.labels.clone()) }),
            prime: None,
            maps,
            dual: None,
        },
    }
}

pub fn dualize(lm: &LoadedModel, variant: Option<DualVariant>) -> Result<DualizeReport> {
    let variant = lm.variant(variant);
    let ds = lm.dual_system(variant)?;
    let checks = pair_checks(&lm.model, &ds)?;
    Ok(DualizeReport {
        model: lm.model.name.clone(),
        variant,
        dual_states: ds.system.states(),
        ok: checks.iter().all(|c| c.ok),
        dual: dual_spec(&lm.model, &ds),
        checks,
    })
}

/// Settings of a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    /// Semigroup time and pathwise horizon; `0` makes both checks trivial.
    pub t: f64,
    pub tol: f64,
    /// Rational arithmetic for the generator check.
    pub exact: bool,
    pub variant: Option<DualVariant>,
    pub seed: u64,
    /// Sampled event logs for the pathwise check.
    pub logs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { t: 1.0, tol: 1e-8, exact: false, variant: None, seed: 0, logs: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub model: String,
    pub variant: DualVariant,
    pub t: f64,
    pub tol: f64,
    pub exact: bool,
    pub seed: u64,
    pub ok: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Check>,
}

fn check_config(t: f64, tol: Option<f64>) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parse(format!("time {t} must be finite and nonnegative")));
    }
    if let Some(tol) = tol {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Parse(format!("tolerance {tol} must be positive")));
        }
    }
    Ok(())
}

fn residual_detail<R: std::fmt::Display>(residual: &R, at: Option<(usize, usize)>, rows: &[String], cols: &[String]) -> Value {
    json!({
        "residual": residual.to_string(),
        "at": at.map(|(x, y)| json!({ "x": rows[x], "y": cols[y] })),
    })
}

/// Map duality, generator intertwining, semigroup duality at `t`, and
/// pathwise constancy on sampled logs over `[0,t]`.
pub fn verify(lm: &LoadedModel, cfg: &VerifyConfig) -> Result<VerifyReport> {
    check_config(cfg.t, Some(cfg.tol))?;
    let m = &lm.model;
    let variant = lm.variant(cfg.variant);
    let ds = lm.dual_system(variant)?;
    let sys = m.system();
    let dual = &ds.system;
    let mut checks = Vec::new();

    let pairs = pair_checks(m, &ds)?;
    let failed = pairs.iter().find(|p| !p.ok);
    checks.push(Check {
        name: "map-duality".into(),
        ok: failed.is_none(),
        detail: json!({
            "pairs": pairs.len(),
            "pairs_checked": pairs.iter().map(|p| p.pairs_checked).sum::<u64>(),
            "counterexample": failed.and_then(|p| p.counterexample.clone()),
        }),
    });

    let dual_dim = dual.states();
    let intertwining = if cfg.exact {
        let qx = build_generator(&m.rep.to_exact()?)?;
        let rates = dual.rates.iter().map(|&r| rational_from_f64(r)).collect::<Result<Vec<Rational>>>()?;
        let qd = generator_from_tables(dual_dim, &dual.tables, &rates);
        let r = check_intertwining(&qx, &qd, &psi_matrix::<Rational>(&ds.psi)?, &Rational::from_integer(0.into()))?;
        Check { name: "intertwining".into(), ok: r.pass, detail: residual_detail(&r.residual, r.at, &sys.labels, &dual.labels) }
    } else {
        let qx = build_generator(&m.rep)?;
        let qd = generator_from_tables(dual_dim, &dual.tables, &dual.rates);
        let r = check_intertwining(&qx, &qd, &psi_matrix::<f64>(&ds.psi)?, &cfg.tol)?;
        Check { name: "intertwining".into(), ok: r.pass, detail: residual_detail(&r.residual, r.at, &sys.labels, &dual.labels) }
    };
    checks.push(intertwining);

    let qx = build_generator(&m.rep)?;
    let qd = generator_from_tables(dual_dim, &dual.tables, &dual.rates);
    let r = semigroup_duality_check(&qx, &qd, &psi_matrix::<f64>(&ds.psi)?, cfg.t, UNIFORMIZATION_TOL, cfg.tol)?;
    checks.push(Check { name: "semigroup".into(), ok: r.pass, detail: residual_detail(&r.residual, r.at, &sys.labels, &dual.labels) });

    let mut violation = None;
    let mut evaluated = 0u64;
    'logs: for k in 0..cfg.logs {
        let seed = cfg.seed.wrapping_add(k as u64);
        let log = sample_events(&sys.rates, 0.0, cfg.t, seed)?;
        for x in 0..sys.states() {
            for y in 0..dual_dim {
                let rep = check_pathwise_constancy(&log, &sys, dual, &ds.dual_of, &ds.psi, x, y, 0.0, cfg.t)?;
                evaluated += rep.points.len() as u64;
                if !rep.ok {
                    violation = Some(json!({
                        "seed": seed,
                        "x": sys.labels[x],
                        "y": dual.labels[y],
                        "t": rep.first_violation,
                        "endpoints_ok": rep.endpoints_ok,
                    }));
                    break 'logs;
                }
            }
        }
    }
    checks.push(Check {
        name: "pathwise".into(),
        ok: violation.is_none(),
        detail: json!({ "logs": cfg.logs, "points": evaluated, "violation": violation }),
    });

    let first_failure = checks.iter().find(|c| !c.ok).cloned();
    Ok(VerifyReport {
        model: m.name.clone(),
        variant,
        t: cfg.t,
        tol: cfg.tol,
        exact: cfg.exact,
        seed: cfg.seed,
        ok: first_failure.is_none(),
        checks,
        first_failure,
    })
}

/// Settings of a simulation campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub t: f64,
    pub n: u64,
    pub seed: u64,
    pub jobs: usize,
    pub variant: Option<DualVariant>,
    /// Initial states by label or index; default to states 1 and 2 where they exist.
    pub x0: Option<String>,
    pub y0: Option<String>,
    /// Replicas whose pathwise trace is written to the CSV.
    pub trace_replicas: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { t: 1.0, n: 1000, seed: 0, jobs: 1, variant: None, x0: None, y0: None, trace_replicas: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub model: String,
    pub variant: DualVariant,
    pub t: f64,
    pub n: u64,
    pub seed: u64,
    pub x0: String,
    pub y0: String,
    pub mean_lhs: f64,
    pub mean_rhs: f64,
    pub stderr: f64,
    /// `(P_t Ψ)(x0, y0)`.
    pub exact: f64,
    pub lhs_within_3se: bool,
    pub rhs_within_3se: bool,
    /// Mean number of events per forward replica, against `R·t`.
    pub event_count_mean: f64,
    pub event_count_expected: f64,
    pub event_count_stderr: f64,
}

fn resolve_state(arg: Option<&str>, default: usize, labels: &[String], role: &str) -> Result<usize> {
    let n = labels.len();
    match arg {
        None => Ok(default.min(n - 1)),
        Some(a) => labels
            .iter()
            .position(|l| l == a)
            .or_else(|| a.parse::<usize>().ok().filter(|&i| i < n))
            .ok_or_else(|| Error::Parse(format!("{role} state `{a}` is neither a label nor an index below {n}"))),
    }
}

/// Monte Carlo estimate of both sides of the duality, the exact value, and
/// the pathwise trace CSV of the first replicas.
pub fn simulate(lm: &LoadedModel, cfg: &SimulateConfig) -> Result<(SimulateReport, String)> {
    check_config(cfg.t, None)?;
    if cfg.n == 0 {
        return Err(Error::Parse("at least one replica is required".into()));
    }
    let m = &lm.model;
    let variant = lm.variant(cfg.variant);
    let ds = lm.dual_system(variant)?;
    let sys = m.system();
    let dual = &ds.system;
    let x0 = resolve_state(cfg.x0.as_deref(), 1, &sys.labels, "initial")?;
    let y0 = resolve_state(cfg.y0.as_deref(), 2, &dual.labels, "dual initial")?;
    let est = monte_carlo_duality(&sys, dual, &ds.psi, x0, y0, cfg.t, cfg.n, cfg.seed, cfg.jobs.max(1))?;
    let p = transition_matrix(&build_generator(&m.rep)?, cfg.t, UNIFORMIZATION_TOL)?;
    let exact: f64 = (0..sys.states()).map(|z| p.get(x0, z) * ds.psi.get(z, y0)).sum();

    let mut total_events = 0u64;
    let mut rows: Vec<(usize, PathPoint)> = Vec::new();
    for i in 0..cfg.n {
        let log = sample_events(&sys.rates, 0.0, cfg.t, cfg.seed.wrapping_add(i))?;
        total_events += log.len() as u64;
        if i < cfg.trace_replicas {
            let rep = check_pathwise_constancy(&log, &sys, dual, &ds.dual_of, &ds.psi, x0, y0, 0.0, cfg.t)?;
            rows.extend(rep.points.into_iter().map(|pt| (i as usize, pt)));
        }
    }
    let expected = sys.total_rate() * cfg.t;
    let report = SimulateReport {
        model: m.name.clone(),
        variant,
        t: cfg.t,
        n: cfg.n,
        seed: cfg.seed,
        x0: sys.labels[x0].clone(),
        y0: dual.labels[y0].clone(),
        mean_lhs: est.mean_lhs,
        mean_rhs: est.mean_rhs,
        stderr: est.stderr,
        exact,
        lhs_within_3se: (est.mean_lhs - exact).abs() <= 3.0 * est.stderr,
        rhs_within_3se: (est.mean_rhs - exact).abs() <= 3.0 * est.stderr,
        event_count_mean: total_events as f64 / cfg.n as f64,
        event_count_expected: expected,
        event_count_stderr: (expected / cfg.n as f64).sqrt(),
    };
    Ok((report, trace_csv(&rows, &sys, dual)))
}

/// The ground set and pair sets of an additive model drawn as a diagram.
fn model_msets(lm: &LoadedModel) -> Result<(Arc<Poset>, Vec<MSet>)> {
    let m = &lm.model;
    if let ModelSpec::Krone { sites, .. } = lm.spec {
        let coding = KroneSetCoding::new(sites)?;
        return Ok((coding.space.ground().clone(), coding.msets(&m.rep)?));
    }
    let n = m.state_count();
    let sites = n.trailing_zeros() as usize;
    let space = m.space();
    let subset_order = (0..n).all(|x| (0..n).all(|y| space.leq(x, y) == (x & y == x)));
    if n.is_power_of_two() && subset_order {
        let (ds, msets) = spin_msets(&m.rep, sites)?;
        return Ok((ds.ground().clone(), msets));
    }
    Err(Error::InvalidModel("diagrams need an additive model on {0,1}^Λ or {0,1,2}^Λ".into()))
}

/// A sampled diagram of the model over `[0,t]`.
pub fn render_model(lm: &LoadedModel, t: f64, seed: u64) -> Result<String> {
    check_config(t, None)?;
    let (ground, msets) = model_msets(lm)?;
    let log = sample_events(&lm.model.rep.rates_f64(), 0.0, t, seed)?;
    render_svg(&Diagram::from_log(ground, &log, &msets)?, None)
}

/// A diagram given as JSON.
pub fn render_diagram_json(text: &str) -> Result<String> {
    let d: DiagramJson = serde_json::from_str(text)?;
    render_svg(&d.resolve()?, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin(name: &str) -> LoadedModel {
        load_model(name).unwrap()
    }

    #[test]
    fn voter_is_additive_coop_is_not() {
        let v = classify(&builtin("voter")).unwrap();
        assert!(v.all_additive && v.all_monotone);
        let c = classify(&builtin("coop")).unwrap();
        assert!(c.all_monotone && !c.all_additive);
        let b = c.maps.iter().find(|m| m.name.starts_with("b")).unwrap();
        assert!(b.monotone && !b.additive && b.additive_witness.is_some());
        assert!(c.table().contains("no"));
    }

    #[test]
    fn dual_spec_round_trips() {
        for name in ["voter:2", "krone:2", "siegmund:4", "coop:3"] {
            let lm = builtin(name);
            let r = dualize(&lm, None).unwrap();
            assert!(r.ok, "{name}");
            let back = LoadedModel::from_spec(r.dual.clone()).unwrap();
            assert_eq!(back.model.state_count(), r.dual_states);
        }
    }

    #[test]
    fn prime_needs_additive_maps() {
        let err = dualize(&builtin("coop"), Some(DualVariant::Prime)).unwrap_err();
        assert!(matches!(err, Error::NotAdditive { .. }));
    }

    #[test]
    fn builtins_verify() {
        for name in ["voter:2", "krone:2", "siegmund:3", "contact:2", "coop:3", "spin:2"] {
            let cfg = VerifyConfig { logs: 5, ..Default::default() };
            let r = verify(&builtin(name), &cfg).unwrap();
            assert!(r.ok, "{name}: {:?}", r.first_failure);
        }
        let r = verify(&builtin("voter:2"), &VerifyConfig { exact: true, logs: 2, ..Default::default() }).unwrap();
        assert!(r.ok);
    }

    #[test]
    fn zero_horizon_is_trivial() {
        let r = verify(&builtin("voter:2"), &VerifyConfig { t: 0.0, logs: 3, ..Default::default() }).unwrap();
        assert!(r.ok);
    }

    #[test]
    fn perturbed_dual_fails() {
        let text = r#"{"model":"custom","space":"chain:3",
            "maps":[{"img":[0,0,1],"rate":1.0}],
            "dual":[{"img":[1,2,2],"rate":2.0}]}"#;
        let lm = LoadedModel::from_json(text).unwrap();
        let r = verify(&lm, &VerifyConfig { logs: 3, ..Default::default() }).unwrap();
        assert!(!r.ok);
        assert_eq!(r.first_failure.unwrap().name, "intertwining");
    }

    #[test]
    fn simulation_is_deterministic() {
        let lm = builtin("voter:2");
        let cfg = SimulateConfig { n: 200, seed: 7, ..Default::default() };
        let a = simulate(&lm, &cfg).unwrap();
        let b = simulate(&lm, &SimulateConfig { jobs: 3, ..cfg.clone() }).unwrap();
        assert_eq!(a, b);
        assert!(a.1.starts_with("replica,t,X,Y,psi\n"));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let lm = builtin("coop:3");
        let fresh = lm.model.dual_system(DualVariant::Star).unwrap();
        let first = lm.cached_dual_system(DualVariant::Star, dir.path()).unwrap();
        let second = lm.cached_dual_system(DualVariant::Star, dir.path()).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        for ds in [first, second] {
            assert_eq!(ds.system, fresh.system);
            assert_eq!(ds.states, fresh.states);
        }
    }

    #[test]
    fn render_empty_voter() {
        let lm = LoadedModel::from_spec(ModelSpec::Voter { sites: 3, rate: 0.0, rates: None }).unwrap();
        let svg = render_model(&lm, 1.0, 0).unwrap();
        assert!(svg.contains("class=\"site\"") && !svg.contains("class=\"arrow\""));
        assert!(render_model(&builtin("krone:2"), 1.0, 3).is_ok());
        assert!(render_model(&builtin("coop:3"), 1.0, 3).is_err());
    }
}
