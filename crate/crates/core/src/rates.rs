//! Jump rates of the restricted fragmentation-coalescence chain.
//!
//! Coagulations are simple and governed by `Lambda_beta(du) = (1-u)^beta du`
//! with `beta = theta / alpha`; fragmentations are governed by the infinite
//! Poisson-Dirichlet measure PD(alpha, -alpha), of which only the induced
//! rates on finite partitions are ever needed.

use std::collections::BTreeMap;

use crate::eppf::{paintbox_eppf, paintbox_support, Params};
use crate::error::{domain, invalid, Error, Result};
use crate::exact::{alpha_weight, factorial, rising_factorial};
use crate::partitions::{nontrivial_partitions, PartitionShape, SetPartition, DEFAULT_CAP};
use crate::quadrature::integrate;
use crate::scalar::Scalar;

/// `c(l, k) = int u^{k-2} (1-u)^{l-k} Lambda_beta(du) = (k-2)! / (l-k+1+beta)_{k-1}`:
/// the rate at which a specific set of `k` blocks among `l` merges.
pub fn coag_rate<T: Scalar>(beta: &T, l: usize, k: usize) -> Result<T> {
    check_coag_args(beta, l, k)?;
    let base = T::from_usize(l - k + 1) + beta.clone();
    Ok(factorial::<T>(k - 2) / rising_factorial(&base, k - 1))
}

fn check_coag_args<T: Scalar>(beta: &T, l: usize, k: usize) -> Result<()> {
    if k < 2 || k > l {
        return Err(invalid(format!("coagulation needs 2 <= k <= l, got l = {l}, k = {k}")));
    }
    if *beta <= -T::one() {
        return Err(domain(format!("beta must exceed -1, got {beta}")));
    }
    Ok(())
}

/// Absolute tolerance of [`coag_rate_quadrature`].
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Numerical evaluation of the Beta integral behind [`coag_rate`].
///
/// When the exponent of `(1-u)` is negative the substitution `1-u = v^p`,
/// `p = 1/(exponent+1)`, removes the endpoint singularity.
pub fn coag_rate_quadrature(beta: f64, l: usize, k: usize) -> Result<f64> {
    check_coag_args(&beta, l, k)?;
    let a = (k - 2) as i32;
    let b = (l - k) as f64 + beta;
    if b < 0.0 {
        let p = 1.0 / (b + 1.0);
        integrate(|v| p * (1.0 - v.powf(p)).powi(a), 0.0, 1.0, QUADRATURE_TOL)
    } else {
        integrate(|u| u.powi(a) * (1.0 - u).powf(b), 0.0, 1.0, QUADRATURE_TOL)
    }
}

/// Rate at which a block of size `sum(children)` fragments into a specific
/// partition whose block sizes are `children`:
/// `(l-2)! prod_m -(-alpha)_{k_m} / -(-alpha)_{k}`.
pub fn split_rate<T: Scalar>(alpha: &T, children: &PartitionShape) -> Result<T> {
    let l = children.k();
    if l < 2 {
        return Err(invalid("a fragmentation produces at least two blocks"));
    }
    let mut rate = factorial::<T>(l - 2) / alpha_weight(alpha, children.n())?;
    for &m in children.sizes() {
        rate = rate * alpha_weight(alpha, m)?;
    }
    Ok(rate)
}

/// Sum of [`split_rate`] over all non-trivial partitions of a block of size `k`.
pub fn total_split_rate<T: Scalar>(alpha: &T, k: usize) -> Result<T> {
    if k > DEFAULT_CAP {
        return Err(Error::CapExceeded { n: k, cap: DEFAULT_CAP });
    }
    let mut by_shape: BTreeMap<PartitionShape, usize> = BTreeMap::new();
    for eta in nontrivial_partitions(k) {
        *by_shape.entry(eta.shape()).or_default() += 1;
    }
    by_shape.iter().try_fold(T::zero(), |acc, (s, &mult)| {
        Ok(acc + split_rate(alpha, s)? * T::from_usize(mult))
    })
}

/// A finitely supported dislocation measure, used to exercise the generic
/// `s(eta) = int nu(dx) p_x(eta)` machinery on toy inputs.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure<T> {
    atoms: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn new(atoms: Vec<(Vec<T>, T)>) -> Result<Self> {
        for (x, w) in &atoms {
            let support = paintbox_support(x)?;
            if support.len() == 1 {
                return Err(domain("nu must not charge the trivial mass partition (1, 0, ...)"));
            }
            if *w <= T::zero() {
                return Err(domain(format!("atom weights must be positive, got {w}")));
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(Vec<T>, T)] {
        &self.atoms
    }
}

/// `s(k_1, ..., k_l) = sum_atoms weight * p_x(k_1, ..., k_l)`.
///
/// Only shapes with at least two parts are fragmentation rates; a one-part
/// shape is still evaluated (it is the `nu`-mass of keeping the block whole).
pub fn split_rate_from_measure<T: Scalar>(nu: &DiscreteMeasure<T>, shape: &PartitionShape) -> Result<T> {
    nu.atoms
        .iter()
        .try_fold(T::zero(), |acc, (x, w)| Ok(acc + w.clone() * paintbox_eppf(x, shape)?))
}

/// All rates needed to run or analyse the chain on `P_[n]`.
#[derive(Debug, Clone)]
pub struct RateTable<T> {
    params: Params<T>,
    n: usize,
    coag: BTreeMap<(usize, usize), T>,
    split: BTreeMap<PartitionShape, T>,
    split_totals: Vec<T>,
    split_moves: Vec<Vec<(SetPartition, T)>>,
}

impl<T: Scalar> RateTable<T> {
    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `c(l, k)` for `2 <= k <= l <= n`.
    pub fn coag(&self, l: usize, k: usize) -> Option<&T> {
        self.coag.get(&(l, k))
    }

    /// Rate of one specific fragmentation with child sizes `shape`.
    pub fn split(&self, shape: &PartitionShape) -> Option<&T> {
        self.split.get(shape)
    }

    /// Total fragmentation rate of one block of size `k` (zero for `k = 1`).
    pub fn split_total(&self, k: usize) -> Option<&T> {
        self.split_totals.get(k)
    }

    /// Every non-trivial `eta` in `P_[k]` with its rate, in enumeration order.
    pub fn split_moves(&self, k: usize) -> &[(SetPartition, T)] {
        self.split_moves.get(k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn coag_entries(&self) -> impl Iterator<Item = (&(usize, usize), &T)> {
        self.coag.iter()
    }

    pub fn split_entries(&self) -> impl Iterator<Item = (&PartitionShape, &T)> {
        self.split.iter()
    }

    pub fn split_total_entries(&self) -> impl Iterator<Item = (usize, &T)> {
        self.split_totals.iter().enumerate().skip(1)
    }

    pub fn to_f64(&self) -> RateTable<f64> {
        RateTable {
            params: self.params.to_f64(),
            n: self.n,
            coag: self.coag.iter().map(|(key, v)| (*key, v.to_f64())).collect(),
            split: self.split.iter().map(|(key, v)| (key.clone(), v.to_f64())).collect(),
            split_totals: self.split_totals.iter().map(Scalar::to_f64).collect(),
            split_moves: self
                .split_moves
                .iter()
                .map(|moves| moves.iter().map(|(eta, r)| (eta.clone(), r.to_f64())).collect())
                .collect(),
        }
    }
}

/// Precomputes every coagulation and fragmentation rate for states of `P_[n]`.
pub fn build_rate_table<T: Scalar>(params: &Params<T>, n: usize) -> Result<RateTable<T>> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if n > DEFAULT_CAP {
        return Err(Error::CapExceeded { n, cap: DEFAULT_CAP });
    }
    let mut coag = BTreeMap::new();
    for l in 2..=n {
        for k in 2..=l {
            coag.insert((l, k), coag_rate(params.beta(), l, k)?);
        }
    }
    let mut split = BTreeMap::new();
    let mut split_totals = vec![T::zero(); n + 1];
    let mut split_moves = vec![Vec::new(); n + 1];
    for k in 2..=n {
        let mut total = T::zero();
        for eta in nontrivial_partitions(k) {
            let shape = eta.shape();
            let rate = match split.get(&shape) {
                Some(r) => T::clone(r),
                None => {
                    let r = split_rate(params.alpha(), &shape)?;
                    split.insert(shape, r.clone());
                    r
                }
            };
            total = total + rate.clone();
            split_moves[k].push((eta, rate));
        }
        split_totals[k] = total;
    }
    Ok(RateTable { params: params.clone(), n, coag, split, split_totals, split_moves })
}
