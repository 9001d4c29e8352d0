//! Generators and semigroups of random mapping representations, dual
//! representations, and matrix-level duality checks.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use num_traits::FromPrimitive;
use serde::Serialize;

use crate::duality::{Antichain, DualityPairing, MonotoneDualKind, PsiTable};
use crate::error::{Error, Result};
use crate::maps::PosetMap;
use crate::num::{rational_from_f64, Matrix, Rational, Scalar};
use crate::poset::Poset;

/// Default cap on the number of states in a monotone dual closure.
pub const DEFAULT_CLOSURE_CAP: usize = 1 << 16;

/// Upper bound on uniformization terms.
pub const MAX_UNIFORMIZATION_TERMS: usize = 10_000;

/// `Gf(x) = Σ_m r_m (f(m(x)) − f(x))`: self-maps of `space` with rates.
#[derive(Debug, Clone)]
pub struct RandomMappingRep<R = f64> {
    space: Arc<Poset>,
    entries: Vec<(PosetMap, R)>,
}

impl<R: Scalar> RandomMappingRep<R> {
    pub fn new(space: Arc<Poset>, entries: Vec<(PosetMap, R)>) -> Result<Self> {
        for (m, r) in &entries {
            if r.is_negative() {
                return Err(Error::NegativeRate { map: m.name().to_string(), rate: r.to_string() });
            }
            if **m.domain() != *space || **m.codomain() != *space {
                return Err(Error::Dimension(format!("map {} is not a self-map of the state space", m.name())));
            }
        }
        Ok(RandomMappingRep { space, entries })
    }

    pub fn space(&self) -> &Arc<Poset> {
        &self.space
    }

    pub fn entries(&self) -> &[(PosetMap, R)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn map(&self, k: usize) -> &PosetMap {
        &self.entries[k].0
    }

    pub fn rate(&self, k: usize) -> &R {
        &self.entries[k].1
    }

    pub fn total_rate(&self) -> R {
        self.entries.iter().fold(R::zero(), |acc, (_, r)| acc + r.clone())
    }

    pub fn all_monotone(&self) -> bool {
        self.entries.iter().all(|(m, _)| m.is_monotone())
    }

    pub fn all_additive(&self) -> Result<bool> {
        let l = crate::lattice::analyze_lattice(&self.space);
        for (m, _) in &self.entries {
            if !m.is_additive_with(&l, &l)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn rates_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, r)| r.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Same maps with rates converted by `f`.
    pub fn map_rates<S: Scalar>(&self, f: impl Fn(&R) -> Result<S>) -> Result<RandomMappingRep<S>> {
        let entries = self.entries.iter().map(|(m, r)| Ok((m.clone(), f(r)?))).collect::<Result<_>>()?;
        RandomMappingRep::new(self.space.clone(), entries)
    }
}

impl RandomMappingRep<f64> {
    /// Exact rational copy; every finite double converts exactly.
    pub fn to_exact(&self) -> Result<RandomMappingRep<Rational>> {
        self.map_rates(|r| rational_from_f64(*r))
    }
}

/// A Markov generator: nonnegative off-diagonal entries, zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix<R = f64>(Matrix<R>);

impl<R: Scalar> GeneratorMatrix<R> {
    /// Checks the generator conditions exactly.
    pub fn new(m: Matrix<R>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::InvalidGenerator(format!("{}×{} is not square", m.rows(), m.cols())));
        }
        for x in 0..m.rows() {
            for y in 0..m.cols() {
                if x != y && m.get(x, y).is_negative() {
                    return Err(Error::InvalidGenerator(format!("negative off-diagonal entry at ({x},{y})")));
                }
            }
            if !m.row_sum(x).is_zero() {
                return Err(Error::InvalidGenerator(format!("row {x} sums to {}", m.row_sum(x))));
            }
        }
        Ok(GeneratorMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix<R> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.rows() == 0
    }

    pub fn to_f64(&self) -> GeneratorMatrix<f64> {
        GeneratorMatrix(self.0.map(|v| v.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Generator of `n` states from image tables and rates:
/// `Q(x,y) = Σ_{k : img_k(x) = y ≠ x} r_k`, diagonal minus the off-row sum.
pub fn generator_from_tables<R: Scalar>(n: usize, tables: &[Vec<usize>], rates: &[R]) -> GeneratorMatrix<R> {
    let mut q = Matrix::zeros(n, n);
    for (img, r) in tables.iter().zip(rates) {
        for (x, &y) in img.iter().enumerate() {
            if y != x {
                q.add_at(x, y, r.clone());
                q.add_at(x, x, -r.clone());
            }
        }
    }
    GeneratorMatrix(q)
}

pub fn build_generator<R: Scalar>(rep: &RandomMappingRep<R>) -> Result<GeneratorMatrix<R>> {
    for (m, r) in &rep.entries {
        if r.is_negative() {
            return Err(Error::NegativeRate { map: m.name().to_string(), rate: r.to_string() });
        }
    }
    let tables: Vec<Vec<usize>> = rep.entries.iter().map(|(m, _)| m.img().to_vec()).collect();
    let rates: Vec<R> = rep.entries.iter().map(|(_, r)| r.clone()).collect();
    Ok(generator_from_tables(rep.space.len(), &tables, &rates))
}

/// `P_t = e^{tQ}` by uniformization: with `λ = max |Q(x,x)|` and
/// `P = I + Q/λ`, `P_t = Σ_k w_k P^k` where `w_k` are Poisson(λt) weights.
/// The series stops once the bound `w_{K+1}/(1 − λt/(K+2))` on the
/// remaining weight is below `tol/2`; for `λt > 50` the time is halved
/// until it is not, and the result squared back up with a proportionally
/// tighter tolerance.
pub fn transition_matrix(q: &GeneratorMatrix<f64>, t: f64, tol: f64) -> Result<Matrix<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidGenerator(format!("time {t} must be finite and nonnegative")));
    }
    if !(tol > 0.0) {
        return Err(Error::ToleranceUnreachable { tol, cap: 0 });
    }
    let n = q.len();
    let lambda = (0..n).map(|x| q.matrix().get(x, x).abs()).fold(0.0, f64::max);
    // zero diagonal forces Q = 0 for a generator
    if lambda == 0.0 || t == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let mut squarings = 0u32;
    let mut tau = t;
    while lambda * tau > 50.0 {
        tau /= 2.0;
        squarings += 1;
    }
    let inner_tol = tol / 2f64.powi(squarings as i32 + 1);
    let p = Matrix::identity(n).add(&q.matrix().scale(&(1.0 / lambda)))?;
    let lt = lambda * tau;
    let mut weight = (-lt).exp();
    let mut power = Matrix::identity(n);
    let mut acc = power.scale(&weight);
    let mut k = 0usize;
    loop {
        let next = weight * lt / (k + 1) as f64;
        if (k + 2) as f64 > lt {
            let bound = next / (1.0 - lt / (k + 2) as f64);
            if bound < inner_tol / 2.0 {
                break;
            }
        }
        if k + 1 >= MAX_UNIFORMIZATION_TERMS {
            return Err(Error::ToleranceUnreachable { tol, cap: MAX_UNIFORMIZATION_TERMS });
        }
        power = power.mul(&p)?;
        weight = next;
        acc = acc.add(&power.scale(&weight))?;
        k += 1;
    }
    for _ in 0..squarings {
        acc = acc.mul(&acc)?;
    }
    Ok(acc)
}

/// Dual representation on `S′` with the same rates and `m ↦ m′`.
pub fn dual_rep_additive<R: Scalar>(d: &DualityPairing, rep: &RandomMappingRep<R>) -> Result<RandomMappingRep<R>> {
    let entries = rep
        .entries
        .iter()
        .map(|(m, r)| Ok((d.additive_dual(m)?, r.clone())))
        .collect::<Result<Vec<_>>>()?;
    RandomMappingRep::new(d.dual_space().clone(), entries)
}

/// A monotone dual on the closure of some seed sets in `P(S′)`.
#[derive(Debug, Clone)]
pub struct MonotoneDualRep<R = f64> {
    pub kind: MonotoneDualKind,
    /// Reachable states in discovery order, seeds first.
    pub states: Vec<Antichain>,
    /// `tables[k][j]` is the index of the image of state `j` under the `k`-th dual map.
    pub tables: Vec<Vec<usize>>,
    pub rates: Vec<R>,
    pub names: Vec<String>,
    pub labels: Vec<String>,
}

impl<R: Scalar> MonotoneDualRep<R> {
    pub fn index_of(&self, b: &Antichain) -> Option<usize> {
        self.states.iter().position(|s| s == b)
    }

    pub fn generator(&self) -> GeneratorMatrix<R> {
        generator_from_tables(self.states.len(), &self.tables, &self.rates)
    }

    /// The closure as a trivially ordered state space with the dual maps.
    pub fn as_rep(&self) -> Result<RandomMappingRep<R>> {
        let space = Arc::new(Poset::antichain(self.states.len()).with_labels(self.labels.clone())?);
        let entries = self
            .tables
            .iter()
            .zip(&self.rates)
            .zip(&self.names)
            .map(|((t, r), name)| Ok((PosetMap::endo(&space, t.clone(), name.clone())?, r.clone())))
            .collect::<Result<Vec<_>>>()?;
        RandomMappingRep::new(space, entries)
    }
}

/// Breadth-first closure of `seeds` under the chosen dual of every map.
pub fn dual_rep_monotone<R: Scalar>(
    d: &DualityPairing,
    rep: &RandomMappingRep<R>,
    seeds: &[Antichain],
    kind: MonotoneDualKind,
    cap: usize,
) -> Result<MonotoneDualRep<R>> {
    let dualizers = rep.entries.iter().map(|(m, _)| d.monotone_dualizer(m)).collect::<Result<Vec<_>>>()?;
    let n_dual = d.dual_space().len();
    let mut states: Vec<Antichain> = Vec::new();
    let mut index: HashMap<Antichain, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for s in seeds {
        if let Some(&bad) = s.members().iter().find(|&&y| y >= n_dual) {
            return Err(Error::Dimension(format!("seed member {bad} outside the dual space")));
        }
        if !index.contains_key(s) {
            index.insert(s.clone(), states.len());
            states.push(s.clone());
            queue.push_back(s.clone());
        }
    }
    if states.len() > cap {
        return Err(Error::ClosureTooLarge { cap });
    }
    while let Some(b) = queue.pop_front() {
        for dz in &dualizers {
            let img = dz.apply(kind, &b);
            if !index.contains_key(&img) {
                if states.len() >= cap {
                    return Err(Error::ClosureTooLarge { cap });
                }
                index.insert(img.clone(), states.len());
                states.push(img.clone());
                queue.push_back(img);
            }
        }
    }
    let tables = dualizers
        .iter()
        .map(|dz| states.iter().map(|b| index[&dz.apply(kind, b)]).collect())
        .collect();
    let suffix = match kind {
        MonotoneDualKind::Dagger => "†",
        MonotoneDualKind::Star => "*",
        MonotoneDualKind::Circ => "°",
        MonotoneDualKind::Bullet => "•",
    };
    let labels = states.iter().map(|b| b.label(d.dual_space())).collect();
    Ok(MonotoneDualRep {
        kind,
        states,
        tables,
        rates: rep.entries.iter().map(|(_, r)| r.clone()).collect(),
        names: rep.entries.iter().map(|(m, _)| format!("{}{suffix}", m.name())).collect(),
        labels,
    })
}

/// Maximum absolute entry of a residual matrix and where it occurs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual<R> {
    pub residual: R,
    pub at: Option<(usize, usize)>,
    pub pass: bool,
}

/// `ψ` as a matrix over any scalar that represents its entries exactly.
pub fn psi_matrix<R: Scalar + FromPrimitive>(psi: &PsiTable) -> Result<Matrix<R>> {
    let mut out = Matrix::zeros(psi.rows(), psi.cols());
    for x in 0..psi.rows() {
        for y in 0..psi.cols() {
            let v = R::from_f64(psi.get(x, y))
                .ok_or_else(|| Error::Dimension(format!("pairing entry {} is not representable", psi.get(x, y))))?;
            out.set(x, y, v);
        }
    }
    Ok(out)
}

fn residual_of<R: Scalar>(diff: Matrix<R>, tol: &R) -> Residual<R> {
    let (residual, at) = diff.max_abs();
    let pass = residual < *tol || residual.is_zero();
    Residual { residual, at, pass }
}

/// `max |G Ψ − Ψ Hᵀ|`; passes when below `tol` (exactly zero always passes).
pub fn check_intertwining<R: Scalar>(
    qx: &GeneratorMatrix<R>,
    qd: &GeneratorMatrix<R>,
    psi: &Matrix<R>,
    tol: &R,
) -> Result<Residual<R>> {
    if psi.rows() != qx.len() || psi.cols() != qd.len() {
        return Err(Error::Dimension(format!(
            "Ψ is {}×{}, generators have {} and {} states",
            psi.rows(),
            psi.cols(),
            qx.len(),
            qd.len()
        )));
    }
    let lhs = qx.matrix().mul(psi)?;
    let rhs = psi.mul(&qd.matrix().transpose())?;
    Ok(residual_of(lhs.sub(&rhs)?, tol))
}

/// `max |P_t Ψ − Ψ P̂_tᵀ|` with both semigroups from [`transition_matrix`].
pub fn semigroup_duality_check(
    qx: &GeneratorMatrix<f64>,
    qd: &GeneratorMatrix<f64>,
    psi: &Matrix<f64>,
    t: f64,
    uniformization_tol: f64,
    tol: f64,
) -> Result<Residual<f64>> {
    if psi.rows() != qx.len() || psi.cols() != qd.len() {
        return Err(Error::Dimension("Ψ does not match the generators".into()));
    }
    let pt = transition_matrix(qx, t, uniformization_tol)?;
    let pd = transition_matrix(qd, t, uniformization_tol)?;
    let diff = pt.mul(psi)?.sub(&psi.mul(&pd.transpose())?)?;
    Ok(residual_of(diff, &tol))
}

/// Row-stochastic to within `slack`.
pub fn check_stochastic(k: &Matrix<f64>, slack: f64) -> Result<()> {
    for x in 0..k.rows() {
        if let Some(y) = (0..k.cols()).find(|&y| *k.get(x, y) < -slack) {
            return Err(Error::NotStochastic(format!("negative entry at ({x},{y})")));
        }
        if (k.row_sum(x) - 1.0).abs() > slack {
            return Err(Error::NotStochastic(format!("row {x} sums to {}", k.row_sum(x))));
        }
    }
    Ok(())
}

/// First `(x, y, A)` with `x ≤ y`, `A` increasing and `K(x,A) > K(y,A) + slack`.
pub fn kernel_monotone_witness(
    k: &Matrix<f64>,
    space: &Poset,
    slack: f64,
) -> Result<Option<(usize, usize, Vec<usize>)>> {
    if k.rows() != space.len() || k.cols() != space.len() {
        return Err(Error::Dimension("kernel does not match the poset".into()));
    }
    check_stochastic(k, 1e-9_f64.max(slack))?;
    for a in space.increasing_sets()? {
        let mass: Vec<f64> = (0..k.rows()).map(|x| a.iter().map(|y| *k.get(x, y)).sum()).collect();
        for x in 0..space.len() {
            for y in space.up_of(x).iter() {
                if mass[x] > mass[y] + slack {
                    return Ok(Some((x, y, a.to_vec())));
                }
            }
        }
    }
    Ok(None)
}

/// `Kf` is monotone for every monotone `f`; indicators of increasing sets suffice.
pub fn check_kernel_monotone(k: &Matrix<f64>, space: &Poset, slack: f64) -> Result<bool> {
    Ok(kernel_monotone_witness(k, space, slack)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rational;
    use num_traits::Zero;

    fn sq() -> Arc<Poset> {
        Arc::new(Poset::boolean(2).unwrap())
    }

    fn vot(s: &Arc<Poset>, i: usize, j: usize) -> PosetMap {
        PosetMap::from_fn(s, format!("vot{i}{j}"), |x| (x & !(1 << j)) | (x >> i & 1) << j).unwrap()
    }

    fn voter_rep(s: &Arc<Poset>) -> RandomMappingRep {
        RandomMappingRep::new(s.clone(), vec![(vot(s, 0, 1), 1.0), (vot(s, 1, 0), 1.0)]).unwrap()
    }

    fn complement(s: &Arc<Poset>) -> DualityPairing {
        let n = s.len();
        DualityPairing::new(s.clone(), (0..n).map(|x| n - 1 - x).collect()).unwrap()
    }

    #[test]
    fn generator_examples() {
        let s = sq();
        let empty: RandomMappingRep = RandomMappingRep::new(s.clone(), vec![]).unwrap();
        assert_eq!(build_generator(&empty).unwrap().matrix(), &Matrix::zeros(4, 4));
        let id = RandomMappingRep::new(s.clone(), vec![(PosetMap::identity(&s), 3.0)]).unwrap();
        assert_eq!(build_generator(&id).unwrap().matrix(), &Matrix::zeros(4, 4));
        let g = build_generator(&voter_rep(&s)).unwrap();
        // state {0} has index 1: vot01 → {0,1} (index 3), vot10 → ∅ (index 0)
        assert_eq!(g.matrix().row(1), &[1.0, -2.0, 0.0, 1.0]);
        assert!(GeneratorMatrix::new(g.matrix().clone()).is_ok());
        assert!(matches!(
            RandomMappingRep::new(s.clone(), vec![(PosetMap::identity(&s), -1.0)]),
            Err(Error::NegativeRate { .. })
        ));
    }

    #[test]
    fn transition_examples() {
        let s = sq();
        let g = build_generator(&voter_rep(&s)).unwrap();
        assert_eq!(transition_matrix(&g, 0.0, 1e-12).unwrap(), Matrix::identity(4));
        let zero = GeneratorMatrix::new(Matrix::zeros(3, 3)).unwrap();
        assert_eq!(transition_matrix(&zero, 5.0, 1e-12).unwrap(), Matrix::identity(3));
        let flip = GeneratorMatrix::new(Matrix::from_rows(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap()).unwrap();
        let p = transition_matrix(&flip, 1.0, 1e-13).unwrap();
        assert!((p.get(0, 0) - (1.0 + (-2.0f64).exp()) / 2.0).abs() < 1e-12);
        // long horizon goes through squaring
        let p = transition_matrix(&flip, 80.0, 1e-12).unwrap();
        assert!((p.get(0, 1) - 0.5).abs() < 1e-12);
        for x in 0..2 {
            assert!((p.row_sum(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn voter_duals_intertwine_exactly() {
        let s = sq();
        let d = complement(&s);
        let rep = voter_rep(&s).to_exact().unwrap();
        let dual = dual_rep_additive(&d, &rep).unwrap();
        let qx = build_generator(&rep).unwrap();
        let qd = build_generator(&dual).unwrap();
        let psi = psi_matrix::<Rational>(&d.pairing_table()).unwrap();
        let r = check_intertwining(&qx, &qd, &psi, &Rational::zero()).unwrap();
        assert!(r.pass && r.residual.is_zero());
        // perturb one dual rate
        let mut bad = dual.entries().to_vec();
        bad[0].1 = rational(3, 2);
        let bad = RandomMappingRep::new(dual.space().clone(), bad).unwrap();
        let r = check_intertwining(&qx, &build_generator(&bad).unwrap(), &psi, &Rational::zero()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.residual, rational(1, 2));
    }

    #[test]
    fn voter_semigroup_duality() {
        let s = sq();
        let d = complement(&s);
        let rep = voter_rep(&s);
        let qx = build_generator(&rep).unwrap();
        let qd = build_generator(&dual_rep_additive(&d, &rep).unwrap()).unwrap();
        let psi = psi_matrix::<f64>(&d.pairing_table()).unwrap();
        for t in [0.0, 1.0] {
            let r = semigroup_duality_check(&qx, &qd, &psi, t, 1e-12, 1e-10).unwrap();
            assert!(r.pass, "t={t}: {}", r.residual);
        }
    }

    #[test]
    fn monotone_closure_examples() {
        let s = sq();
        let d = complement(&s);
        let rep = voter_rep(&s);
        let c = dual_rep_monotone(&d, &rep, &[Antichain::empty()], MonotoneDualKind::Star, 100).unwrap();
        assert_eq!(c.states, vec![Antichain::empty()]);
        assert_eq!(c.generator().matrix(), &Matrix::zeros(1, 1));
        let c = dual_rep_monotone(&d, &rep, &[Antichain::singleton(1)], MonotoneDualKind::Star, 100).unwrap();
        assert!(c.states.iter().all(|b| b.len() == 1));
        assert!(matches!(
            dual_rep_monotone(&d, &rep, &[Antichain::singleton(1)], MonotoneDualKind::Star, 1),
            Err(Error::ClosureTooLarge { .. })
        ));
    }

    #[test]
    fn kernel_monotonicity() {
        let s = sq();
        assert!(check_kernel_monotone(&Matrix::identity(4), &s, 0.0).unwrap());
        let g = build_generator(&voter_rep(&s)).unwrap();
        let p = transition_matrix(&g, 0.7, 1e-12).unwrap();
        assert!(check_kernel_monotone(&p, &s, 1e-12).unwrap());
        // monotone kernel built by hand on P({a,b})
        let k = Matrix::from_rows(vec![
            vec![0.5, 0.25, 0.25, 0.0],
            vec![0.25, 0.5, 0.0, 0.25],
            vec![0.25, 0.0, 0.5, 0.25],
            vec![0.0, 0.25, 0.25, 0.5],
        ])
        .unwrap();
        assert!(check_kernel_monotone(&k, &s, 0.0).unwrap());
        let flip = Matrix::from_fn(4, 4, |x, y| (x + y == 3) as u8 as f64);
        assert!(!check_kernel_monotone(&flip, &s, 0.0).unwrap());
        let bad = Matrix::from_fn(4, 4, |_, _| 0.5);
        assert!(check_kernel_monotone(&bad, &s, 0.0).is_err());
    }
}
