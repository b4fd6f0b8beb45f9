//! Exact analysis of the chain restricted to `P_[n]`: generator, the restricted
//! Poisson-Dirichlet law, detailed-balance audits and stationary solves.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::eppf::{pd_eppf, Params};
use crate::error::{invalid, Error, Result};
use crate::partitions::{enumerate_set_partitions, SetPartition};
use crate::rates::{build_rate_table, RateTable};
use crate::scalar::{Rational, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Largest `n` for which [`solve_stationary`] uses exact elimination.
pub const EXACT_SOLVE_LIMIT: usize = 6;

/// Largest `n` at which detailed balance is audited in exact arithmetic by default.
pub const EXACT_AUDIT_LIMIT: usize = 8;

/// Residual threshold of the floating-point stationary solve.
pub const FLOAT_RESIDUAL_TOL: f64 = 1e-10;

/// Indexed enumeration of `P_[n]`.
#[derive(Debug)]
pub struct StateSpace {
    n: usize,
    states: Vec<SetPartition>,
    index: HashMap<SetPartition, usize>,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Arc<Self>> {
        let states = enumerate_set_partitions(n)?;
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Arc::new(Self { n, states, index }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SetPartition] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &SetPartition {
        &self.states[i]
    }

    pub fn index_of(&self, state: &SetPartition) -> Option<usize> {
        self.index.get(state).copied()
    }
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.states == other.states
    }
}

fn same_space(a: &Arc<StateSpace>, b: &Arc<StateSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::Mismatch(format!("P_[{}] vs P_[{}]", a.n, b.n)))
    }
}

/// Sparse rate matrix over `P_[n]`. Rows hold off-diagonal entries sorted by
/// target index; the diagonal is the negated row sum.
#[derive(Debug, Clone)]
pub struct Generator<T> {
    space: Arc<StateSpace>,
    rows: Vec<Vec<(usize, T)>>,
    diagonal: Vec<T>,
}

impl<T: Scalar> Generator<T> {
    /// Assembles a generator from explicit off-diagonal rates.
    pub fn from_rows(space: Arc<StateSpace>, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        if rows.len() != space.len() {
            return Err(Error::Mismatch(format!("{} rows for {} states", rows.len(), space.len())));
        }
        let mut clean = Vec::with_capacity(rows.len());
        let mut diagonal = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let mut merged: BTreeMap<usize, T> = BTreeMap::new();
            for (j, r) in row {
                if j >= space.len() || j == i {
                    return Err(invalid(format!("bad off-diagonal target {j} in row {i}")));
                }
                if r < T::zero() {
                    return Err(invalid(format!("negative rate {r} at ({i}, {j})")));
                }
                let slot = merged.entry(j).or_insert_with(T::zero);
                *slot = slot.clone() + r;
            }
            let row: Vec<(usize, T)> = merged.into_iter().filter(|(_, r)| !r.is_zero()).collect();
            diagonal.push(-row.iter().fold(T::zero(), |acc, (_, r)| acc + r.clone()));
            clean.push(row);
        }
        Ok(Self { space, rows: clean, diagonal })
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    /// Off-diagonal entries of row `i`, sorted by target.
    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn diagonal(&self, i: usize) -> &T {
        &self.diagonal[i]
    }

    /// `Q[i][j]`, including the diagonal.
    pub fn rate(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diagonal[i].clone();
        }
        match self.rows[i].binary_search_by_key(&j, |(t, _)| *t) {
            Ok(pos) => self.rows[i][pos].1.clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn row_sum(&self, i: usize) -> T {
        self.rows[i].iter().fold(self.diagonal[i].clone(), |acc, (_, r)| acc + r.clone())
    }

    pub fn num_transitions(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_f64(&self) -> Generator<f64> {
        Generator {
            space: self.space.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(|(j, v)| (*j, v.to_f64())).collect()).collect(),
            diagonal: self.diagonal.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// Generator of the chain on `P_[n]`: each simple merge of `k` among `l` blocks
/// has rate `c(l, k)`, each split of one block by `eta` has rate `s(shape(eta))`.
pub fn build_generator<T: Scalar>(params: &Params<T>, n: usize) -> Result<Generator<T>> {
    let table = build_rate_table(params, n)?;
    generator_from_table(&table)
}

pub fn generator_from_table<T: Scalar>(table: &RateTable<T>) -> Result<Generator<T>> {
    let space = StateSpace::new(table.n())?;
    let mut rows = Vec::with_capacity(space.len());
    for gamma in space.states() {
        let mut row = Vec::new();
        let l = gamma.num_blocks();
        for (target, merged) in gamma.coag_transitions() {
            let rate = table.coag(l, merged.len()).expect("table covers l <= n").clone();
            row.push((space.index_of(&target).expect("target in P_[n]"), rate));
        }
        for (target, _, eta) in gamma.split_transitions() {
            let rate = table.split(&eta.shape()).expect("table covers every split shape").clone();
            row.push((space.index_of(&target).expect("target in P_[n]"), rate));
        }
        rows.push(row);
    }
    Generator::from_rows(space, rows)
}

/// Probability vector over an enumerated `P_[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistVector<T> {
    space: Arc<StateSpace>,
    probs: Vec<T>,
}

impl<T: Scalar> DistVector<T> {
    /// Checks nonnegativity and that the entries sum to one (exactly on the rational path).
    pub fn new(space: Arc<StateSpace>, probs: Vec<T>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::Mismatch(format!("{} probabilities for {} states", probs.len(), space.len())));
        }
        if let Some(p) = probs.iter().find(|p| **p < T::zero()) {
            return Err(invalid(format!("negative probability {p}")));
        }
        let total = probs.iter().fold(T::zero(), |a, b| a + b.clone());
        if !total.approx_eq(&T::one()) {
            return Err(invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { space, probs })
    }

    /// Dirac mass at `state`.
    pub fn point_mass(space: Arc<StateSpace>, state: &SetPartition) -> Result<Self> {
        let i = space
            .index_of(state)
            .ok_or_else(|| invalid(format!("{state} is not in P_[{}]", space.n())))?;
        let mut probs = vec![T::zero(); space.len()];
        probs[i] = T::one();
        Ok(Self { space, probs })
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, state: &SetPartition) -> Option<&T> {
        self.space.index_of(state).map(|i| &self.probs[i])
    }

    pub fn to_f64(&self) -> DistVector<f64> {
        DistVector { space: self.space.clone(), probs: self.probs.iter().map(Scalar::to_f64).collect() }
    }
}

impl DistVector<f64> {
    /// Empirical law from visit counts.
    pub fn from_counts(space: Arc<StateSpace>, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(invalid("no observations"));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(space, probs)
    }
}

/// Image of PD(alpha, theta) under the paint-box restricted to `[n]`:
/// `rho(gamma) = p_{alpha,theta}(shape(gamma))`.
pub fn restricted_pd_distribution<T: Scalar>(params: &Params<T>, n: usize) -> Result<DistVector<T>> {
    let space = StateSpace::new(n)?;
    pd_distribution_on(params, space)
}

pub fn pd_distribution_on<T: Scalar>(params: &Params<T>, space: Arc<StateSpace>) -> Result<DistVector<T>> {
    let mut cache = HashMap::new();
    let probs = space
        .states()
        .iter()
        .map(|g| cache.entry(g.shape()).or_insert_with_key(|s| pd_eppf(params, s)).clone())
        .collect();
    DistVector::new(space, probs)
}

/// Outcome of a detailed-balance audit.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailedBalanceReport<T> {
    /// Unordered pairs of states joined by a nonzero rate in either direction.
    pub pairs_checked: usize,
    /// `max |pi(a) q(a,b) - pi(b) q(b,a)|` over those pairs.
    pub max_violation: T,
    /// Pairs whose imbalance exceeds the scalar tolerance (zero when exact).
    pub violations: Vec<(usize, usize, T)>,
}

impl<T: Scalar> DetailedBalanceReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits `pi(a) q(a,b) = pi(b) q(b,a)` over structurally adjacent pairs.
pub fn check_detailed_balance<T: Scalar>(gen: &Generator<T>, dist: &DistVector<T>) -> Result<DetailedBalanceReport<T>> {
    same_space(gen.space(), dist.space())?;
    let mut pairs_checked = 0;
    let mut max_violation = T::zero();
    let mut violations = Vec::new();
    for a in 0..gen.num_states() {
        for (b, q_ab) in gen.row(a) {
            let b = *b;
            let q_ba = gen.rate(b, a);
            // count each pair once: from the lower index, or from the only side with a rate
            if b < a && !q_ba.is_zero() {
                continue;
            }
            pairs_checked += 1;
            let gap = (dist.probs[a].clone() * q_ab.clone() - dist.probs[b].clone() * q_ba).abs();
            if gap > T::tolerance() {
                violations.push((a, b, gap.clone()));
            }
            if gap > max_violation {
                max_violation = gap;
            }
        }
    }
    Ok(DetailedBalanceReport { pairs_checked, max_violation, violations })
}

/// `max_j |(pi Q)_j|`; zero iff `dist` is invariant.
pub fn stationarity_residual<T: Scalar>(gen: &Generator<T>, dist: &DistVector<T>) -> Result<T> {
    same_space(gen.space(), dist.space())?;
    let mut flow: Vec<T> = (0..gen.num_states())
        .map(|j| dist.probs[j].clone() * gen.diagonal(j).clone())
        .collect();
    for i in 0..gen.num_states() {
        for (j, q) in gen.row(i) {
            flow[*j] = flow[*j].clone() + dist.probs[i].clone() * q.clone();
        }
    }
    Ok(flow.into_iter().map(|f| f.abs()).fold(T::zero(), |m, f| if f > m { f } else { m }))
}

/// A state in the unique closed communicating class, or `Reducible`.
///
/// The last vertex to finish a depth-first search of the reversed transition
/// graph lies in a sink component of the forward graph; the law is unique iff
/// every state can reach it.
fn recurrent_state<T: Scalar>(gen: &Generator<T>) -> Result<usize> {
    let size = gen.num_states();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); size];
    for i in 0..size {
        for (j, q) in gen.row(i) {
            if !q.is_zero() {
                reverse[*j].push(i);
            }
        }
    }
    let mut seen = vec![false; size];
    let mut last_finished = 0;
    for root in 0..size {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, next)) = stack.pop() {
            if let Some(&w) = reverse[v].get(next) {
                stack.push((v, next + 1));
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                last_finished = v;
            }
        }
    }
    let mut reaches = vec![false; size];
    reaches[last_finished] = true;
    let mut queue = vec![last_finished];
    while let Some(v) = queue.pop() {
        for &w in &reverse[v] {
            if !reaches[w] {
                reaches[w] = true;
                queue.push(w);
            }
        }
    }
    match reaches.iter().position(|r| !r) {
        Some(i) => Err(Error::Reducible(i)),
        None => Ok(last_finished),
    }
}

/// Balance equations with `pi[pinned] = 1` moved to the right-hand side and
/// the pinned state's own equation dropped. Unknowns and equations skip `pinned`.
fn pinned_system<T: Scalar>(gen: &Generator<T>, pinned: usize) -> (Vec<BTreeMap<usize, T>>, Vec<T>) {
    let m = gen.num_states() - 1;
    let idx = |i: usize| if i < pinned { i } else { i - 1 };
    let mut rows: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); m];
    let mut rhs = vec![T::zero(); m];
    for i in 0..=m {
        if i != pinned {
            rows[idx(i)].insert(idx(i), gen.diagonal(i).clone());
        }
        for (j, q) in gen.row(i) {
            if *j == pinned {
                continue;
            }
            if i == pinned {
                rhs[idx(*j)] = -q.clone();
            } else {
                rows[idx(*j)].insert(idx(i), q.clone());
            }
        }
    }
    rows.iter_mut().for_each(|r| r.retain(|_, v| !v.is_zero()));
    (rows, rhs)
}

fn column_index<V>(rows: &[BTreeMap<usize, V>]) -> Vec<BTreeSet<usize>> {
    let mut col_rows = vec![BTreeSet::new(); rows.len()];
    for (r, row) in rows.iter().enumerate() {
        for &c in row.keys() {
            col_rows[c].insert(r);
        }
    }
    col_rows
}

/// Re-inserts the pinned weight and normalizes.
fn unpin<T: Scalar>(gen: &Generator<T>, pinned: usize, mut x: Vec<T>) -> Result<DistVector<T>> {
    x.insert(pinned, T::one());
    let total = x.iter().fold(T::zero(), |a, v| a + v.clone());
    for v in &mut x {
        *v = v.clone() / total.clone();
    }
    if !T::EXACT {
        // clip round-off below zero before validation
        for v in &mut x {
            if *v < T::zero() && v.abs() <= T::tolerance() {
                *v = T::zero();
            }
        }
    }
    DistVector::new(gen.space().clone(), x)
}

/// Solves `pi Q = 0`, `sum(pi) = 1` by sparse Gaussian elimination.
///
/// A recurrent state's weight is pinned to one and its balance equation
/// dropped. Exact scalars pivot on the sparsest candidate row, floats on the
/// largest magnitude. Chains whose stationary law is not unique are reported
/// as reducible.
pub fn stationary_distribution<T: Scalar>(gen: &Generator<T>) -> Result<DistVector<T>> {
    let pinned = recurrent_state(gen)?;
    let (mut rows, mut rhs) = pinned_system(gen, pinned);
    let m = rows.len();
    let mut col_rows = column_index(&rows);
    let mut used = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for c in 0..m {
        let pivot = col_rows[c]
            .iter()
            .copied()
            .filter(|&r| !used[r])
            .min_by(|&x, &y| {
                if T::EXACT {
                    rows[x].len().cmp(&rows[y].len())
                } else {
                    let (vx, vy) = (rows[x][&c].abs().to_f64(), rows[y][&c].abs().to_f64());
                    vy.total_cmp(&vx)
                }
            })
            .ok_or(Error::Reducible(c))?;
        used[pivot] = true;
        order.push((c, pivot));
        let pivot_row = rows[pivot].clone();
        let pivot_val = pivot_row[&c].clone();
        let targets: Vec<usize> = col_rows[c].iter().copied().filter(|&r| !used[r]).collect();
        for r in targets {
            let factor = rows[r][&c].clone() / pivot_val.clone();
            for (col, v) in &pivot_row {
                let entry = rows[r].remove(col).unwrap_or_else(T::zero) - factor.clone() * v.clone();
                if *col == c || entry.is_zero() {
                    col_rows[*col].remove(&r);
                } else {
                    col_rows[*col].insert(r);
                    rows[r].insert(*col, entry);
                }
            }
            rhs[r] = rhs[r].clone() - factor * rhs[pivot].clone();
        }
    }

    let mut x = vec![T::zero(); m];
    for &(c, p) in order.iter().rev() {
        let mut acc = rhs[p].clone();
        for (col, v) in &rows[p] {
            if *col != c {
                acc = acc - v.clone() * x[*col].clone();
            }
        }
        x[c] = acc / rows[p][&c].clone();
    }
    unpin(gen, pinned, x)
}

/// Exact stationary law over the rationals.
///
/// Same pinned system as [`stationary_distribution`], but every equation is
/// scaled to integer coefficients and eliminated fraction-free, dividing each
/// updated row by its content. This keeps coefficient growth in check where
/// plain rational elimination becomes impractical (n >= 6).
pub fn stationary_distribution_exact(gen: &Generator<Rational>) -> Result<DistVector<Rational>> {
    let pinned = recurrent_state(gen)?;
    let (qrows, qrhs) = pinned_system(gen, pinned);
    let m = qrows.len();
    let mut rows: Vec<BTreeMap<usize, BigInt>> = Vec::with_capacity(m);
    let mut rhs: Vec<BigInt> = Vec::with_capacity(m);
    for (eq, b) in qrows.iter().zip(&qrhs) {
        let scale = eq.values().map(|v| v.denom()).chain(Some(b.denom())).fold(BigInt::one(), |acc, d| acc.lcm(d));
        rows.push(eq.iter().map(|(c, v)| (*c, v.numer() * (&scale / v.denom()))).collect());
        rhs.push(b.numer() * (&scale / b.denom()));
    }

    let mut col_rows = column_index(&rows);
    let mut used = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for c in 0..m {
        let pivot = col_rows[c]
            .iter()
            .copied()
            .filter(|&r| !used[r])
            .min_by_key(|&r| rows[r].len())
            .ok_or(Error::Reducible(c))?;
        used[pivot] = true;
        order.push((c, pivot));
        let pivot_row = rows[pivot].clone();
        let pivot_val = pivot_row[&c].clone();
        let targets: Vec<usize> = col_rows[c].iter().copied().filter(|&r| !used[r]).collect();
        for r in targets {
            let a = rows[r][&c].clone();
            let g = a.gcd(&pivot_val);
            let (fr, fp) = (&pivot_val / &g, &a / &g);
            let mut row = std::mem::take(&mut rows[r]);
            for v in row.values_mut() {
                *v *= &fr;
            }
            for (col, v) in &pivot_row {
                let entry = row.remove(col).unwrap_or_default() - &fp * v;
                if *col == c || entry.is_zero() {
                    col_rows[*col].remove(&r);
                } else {
                    row.insert(*col, entry);
                    col_rows[*col].insert(r);
                }
            }
            let mut b = &rhs[r] * &fr - &fp * &rhs[pivot];
            let content = row.values().fold(b.clone(), |acc, v| acc.gcd(v));
            if !content.is_zero() && !content.is_one() {
                row.values_mut().for_each(|v| *v /= &content);
                b /= &content;
            }
            rows[r] = row;
            rhs[r] = b;
        }
    }

    let mut x = vec![Rational::zero(); m];
    for &(c, p) in order.iter().rev() {
        let mut acc = Rational::from_integer(rhs[p].clone());
        for (col, v) in &rows[p] {
            if *col != c {
                acc -= Rational::from_integer(v.clone()) * &x[*col];
            }
        }
        x[c] = acc / Rational::from_integer(rows[p][&c].clone());
    }
    unpin(gen, pinned, x)
}

/// Gauss-Seidel iteration for `pi Q = 0` on the floating-point path.
pub fn stationary_distribution_iterative(gen: &Generator<f64>, tol: f64, max_sweeps: usize) -> Result<DistVector<f64>> {
    let size = gen.num_states();
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
    for i in 0..size {
        for &(j, q) in gen.row(i) {
            incoming[j].push((i, q));
        }
    }
    let mut pi = vec![1.0 / size as f64; size];
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        for j in 0..size {
            let outflow = -gen.diagonal(j);
            if outflow > 0.0 {
                pi[j] = incoming[j].iter().map(|&(i, q)| pi[i] * q).sum::<f64>() / outflow;
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        let dist = DistVector { space: gen.space().clone(), probs: pi.clone() };
        residual = stationarity_residual(gen, &dist)?;
        if residual <= tol {
            return DistVector::new(gen.space().clone(), pi);
        }
    }
    Err(Error::NoConvergence { residual, iterations: max_sweeps })
}

/// Stationary law computed by the route appropriate to `n`.
#[derive(Debug, Clone)]
pub enum StationarySolution {
    Exact(DistVector<Rational>),
    Float(DistVector<f64>),
}

impl StationarySolution {
    pub fn is_exact(&self) -> bool {
        matches!(self, StationarySolution::Exact(_))
    }
}

/// Exact elimination for `n <= EXACT_SOLVE_LIMIT`, Gauss-Seidel in `f64` above.
pub fn solve_stationary(params: &Params<Rational>, n: usize) -> Result<StationarySolution> {
    let gen = build_generator(params, n)?;
    if n <= EXACT_SOLVE_LIMIT {
        stationary_distribution_exact(&gen).map(StationarySolution::Exact)
    } else {
        stationary_distribution_iterative(&gen.to_f64(), FLOAT_RESIDUAL_TOL, 100_000).map(StationarySolution::Float)
    }
}

/// Total variation distance `(1/2) sum |d1 - d2|`.
pub fn tv_distance<T: Scalar>(d1: &DistVector<T>, d2: &DistVector<T>) -> Result<T> {
    same_space(d1.space(), d2.space())?;
    let sum = d1
        .probs
        .iter()
        .zip(&d2.probs)
        .fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    Ok(sum / T::from_i64(2))
}

/// Push-forward of a law on `P_[n]` through restriction to `[n-1]`.
pub fn marginal_restriction<T: Scalar>(dist: &DistVector<T>) -> Result<DistVector<T>> {
    let n = dist.space.n();
    if n < 2 {
        return Err(invalid("marginal restriction needs n >= 2"));
    }
    let target = StateSpace::new(n - 1)?;
    let mut probs = vec![T::zero(); target.len()];
    for (state, p) in dist.space.states().iter().zip(&dist.probs) {
        let j = target.index_of(&state.restrict(n - 1)?).expect("restriction lies in P_[n-1]");
        probs[j] = probs[j].clone() + p.clone();
    }
    DistVector::new(target, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_traits::{One, Zero};

    fn params(a: (i64, i64), t: (i64, i64)) -> Params<Rational> {
        Params::new(ratio(a.0, a.1), ratio(t.0, t.1)).unwrap()
    }

    fn sp(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    #[test]
    fn generator_n2() {
        let gen = build_generator(&params((1, 2), (1, 2)), 2).unwrap();
        let s = gen.space().clone();
        let (block, single) = (s.index_of(&sp("1 2")).unwrap(), s.index_of(&sp("1|2")).unwrap());
        assert_eq!(gen.rate(block, single), Rational::one());
        assert_eq!(gen.rate(single, block), ratio(1, 2));
        for i in 0..gen.num_states() {
            assert_eq!(gen.row_sum(i), Rational::zero());
        }
    }

    #[test]
    fn generator_n1_is_zero() {
        let gen = build_generator(&params((1, 2), (1, 2)), 1).unwrap();
        assert_eq!(gen.num_states(), 1);
        assert_eq!(gen.num_transitions(), 0);
        assert_eq!(gen.diagonal(0), &Rational::zero());
    }

    #[test]
    fn every_entry_is_exactly_one_move() {
        let gen = build_generator(&params((1, 3), (1, 4)), 5).unwrap();
        let space = gen.space().clone();
        for (i, gamma) in space.states().iter().enumerate() {
            assert_eq!(gen.row_sum(i), Rational::zero());
            let mut moves: HashMap<usize, usize> = HashMap::new();
            for (t, _) in gamma.coag_transitions() {
                *moves.entry(space.index_of(&t).unwrap()).or_default() += 1;
            }
            for (t, _, _) in gamma.split_transitions() {
                *moves.entry(space.index_of(&t).unwrap()).or_default() += 1;
            }
            assert!(moves.values().all(|&c| c == 1));
            let targets: Vec<usize> = gen.row(i).iter().map(|(j, _)| *j).collect();
            let mut expected: Vec<usize> = moves.keys().copied().collect();
            expected.sort_unstable();
            assert_eq!(targets, expected);
        }
    }

    #[test]
    fn restricted_pd_examples() {
        let p = params((1, 2), (1, 2));
        let d = restricted_pd_distribution(&p, 2).unwrap();
        assert_eq!(d.prob(&sp("1 2")), Some(&ratio(1, 3)));
        assert_eq!(d.prob(&sp("1|2")), Some(&ratio(2, 3)));
        assert_eq!(restricted_pd_distribution(&p, 1).unwrap().probs(), &[Rational::one()]);
        let d3 = restricted_pd_distribution(&p, 3).unwrap();
        assert_eq!(d3.probs().iter().fold(Rational::zero(), |a, b| a + b), Rational::one());
    }

    #[test]
    fn detailed_balance_examples() {
        let p = params((1, 2), (1, 2));
        let gen = build_generator(&p, 2).unwrap();
        let rho = restricted_pd_distribution(&p, 2).unwrap();
        let report = check_detailed_balance(&gen, &rho).unwrap();
        assert_eq!(report.pairs_checked, 1);
        assert_eq!(report.max_violation, Rational::zero());
        assert!(report.holds());

        let uniform = DistVector::new(gen.space().clone(), vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let bad = check_detailed_balance(&gen, &uniform).unwrap();
        assert_eq!(bad.max_violation, ratio(1, 4));
        assert_eq!(bad.violations.len(), 1);

        let p = params((1, 2), (2, 1));
        let report = check_detailed_balance(&build_generator(&p, 4).unwrap(), &restricted_pd_distribution(&p, 4).unwrap()).unwrap();
        assert_eq!(report.max_violation, Rational::zero());
        assert!(report.pairs_checked > 0);
    }

    #[test]
    fn detailed_balance_fails_for_wrong_split_rates() {
        // perturb one fragmentation rate: reversibility must break
        let p = params((1, 2), (1, 2));
        let gen = build_generator(&p, 3).unwrap();
        let mut rows: Vec<Vec<(usize, Rational)>> = (0..gen.num_states()).map(|i| gen.row(i).to_vec()).collect();
        rows[0][0].1 = rows[0][0].1.clone() * ratio(2, 1);
        let bent = Generator::from_rows(gen.space().clone(), rows).unwrap();
        let report = check_detailed_balance(&bent, &restricted_pd_distribution(&p, 3).unwrap()).unwrap();
        assert!(!report.holds());
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let p = params((1, 2), (1, 2));
        let gen = build_generator(&p, 3).unwrap();
        let rho = restricted_pd_distribution(&p, 2).unwrap();
        assert!(matches!(check_detailed_balance(&gen, &rho), Err(Error::Mismatch(_))));
        assert!(tv_distance(&rho, &restricted_pd_distribution(&p, 3).unwrap()).is_err());
    }

    #[test]
    fn stationary_examples() {
        let p = params((1, 2), (1, 2));
        let gen2 = build_generator(&p, 2).unwrap();
        let pi = stationary_distribution(&gen2).unwrap();
        assert_eq!(pi.prob(&sp("1 2")), Some(&ratio(1, 3)));
        assert_eq!(pi.prob(&sp("1|2")), Some(&ratio(2, 3)));
        assert_eq!(stationary_distribution(&build_generator(&p, 1).unwrap()).unwrap().probs(), &[Rational::one()]);
        let pi3 = stationary_distribution(&build_generator(&p, 3).unwrap()).unwrap();
        assert_eq!(pi3, restricted_pd_distribution(&p, 3).unwrap());
    }

    #[test]
    fn stationary_on_an_arbitrary_chain() {
        // 3-state cycle with distinct rates; solved by hand: pi proportional to (6, 3, 2)
        let space = StateSpace::new(3).unwrap();
        let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); 5];
        rows[0] = vec![(1, ratio(1, 1))];
        rows[1] = vec![(2, ratio(2, 1))];
        rows[2] = vec![(0, ratio(3, 1))];
        rows[3] = vec![(0, ratio(1, 1))];
        rows[4] = vec![(0, ratio(1, 1))];
        let gen = Generator::from_rows(space, rows).unwrap();
        let expected = [ratio(6, 11), ratio(3, 11), ratio(2, 11), Rational::zero(), Rational::zero()];
        assert_eq!(stationary_distribution(&gen).unwrap().probs(), &expected);
        assert_eq!(stationary_distribution_exact(&gen).unwrap().probs(), &expected);
    }

    #[test]
    fn integer_elimination_matches_rational() {
        for (a, t) in [((1, 2), (1, 2)), ((1, 3), (-1, 4)), ((2, 3), (0, 1))] {
            let p = params(a, t);
            for n in 1..=5 {
                let gen = build_generator(&p, n).unwrap();
                assert_eq!(stationary_distribution_exact(&gen).unwrap(), stationary_distribution(&gen).unwrap());
            }
        }
    }

    #[test]
    fn reducible_chain_is_reported() {
        let space = StateSpace::new(2).unwrap();
        let gen: Generator<Rational> = Generator::from_rows(space, vec![vec![], vec![]]).unwrap();
        assert!(matches!(stationary_distribution(&gen), Err(Error::Reducible(_))));
        assert!(matches!(stationary_distribution_exact(&gen), Err(Error::Reducible(_))));
    }

    #[test]
    fn float_solvers_agree_with_exact() {
        let p = params((1, 3), (-1, 4));
        let gen = build_generator(&p, 5).unwrap();
        let exact = restricted_pd_distribution(&p, 5).unwrap().to_f64();
        let dense = stationary_distribution(&gen.to_f64()).unwrap();
        let gs = stationary_distribution_iterative(&gen.to_f64(), 1e-12, 10_000).unwrap();
        assert!(tv_distance(&dense, &exact).unwrap() < 1e-12);
        assert!(tv_distance(&gs, &exact).unwrap() < 1e-9);
    }

    #[test]
    fn solve_stationary_routes() {
        let p = params((1, 2), (1, 2));
        assert!(solve_stationary(&p, 4).unwrap().is_exact());
    }

    #[test]
    fn tv_examples() {
        let s2 = StateSpace::new(2).unwrap();
        let a = DistVector::new(s2.clone(), vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let b = DistVector::new(s2.clone(), vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), Rational::zero());
        assert_eq!(tv_distance(&a, &b).unwrap(), ratio(1, 6));
        let e0 = DistVector::new(s2.clone(), vec![Rational::one(), Rational::zero()]).unwrap();
        let e1 = DistVector::new(s2, vec![Rational::zero(), Rational::one()]).unwrap();
        assert_eq!(tv_distance(&e0, &e1).unwrap(), Rational::one());
    }

    #[test]
    fn marginal_examples() {
        let p = params((1, 2), (1, 2));
        let m1 = marginal_restriction(&restricted_pd_distribution(&p, 2).unwrap()).unwrap();
        assert_eq!(m1.probs(), &[Rational::one()]);
        let m2 = marginal_restriction(&restricted_pd_distribution(&p, 3).unwrap()).unwrap();
        assert_eq!(m2, restricted_pd_distribution(&p, 2).unwrap());
        assert!(marginal_restriction(&restricted_pd_distribution(&p, 1).unwrap()).is_err());
    }

    #[test]
    fn dist_validation() {
        let s2 = StateSpace::new(2).unwrap();
        assert!(DistVector::new(s2.clone(), vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(DistVector::new(s2.clone(), vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(DistVector::new(s2, vec![Rational::one()]).is_err());
    }
}
