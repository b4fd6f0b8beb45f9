//! Exchangeable partition probability functions.

use std::collections::HashMap;
use std::fmt;

use crate::error::{domain, invalid, Result};
use crate::exact::{alpha_weight, check_alpha, factorial, rising_factorial};
use crate::partitions::{enumerate_set_partitions, PartitionShape};
use crate::scalar::{Rational, Scalar};

/// Largest support accepted by [`paintbox_eppf`].
pub const MAX_PAINTBOX_SUPPORT: usize = 12;

/// The pair `(alpha, theta)` with `0 < alpha < 1`, `theta > -alpha`, and the
/// cached ratio `beta = theta / alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    alpha: T,
    theta: T,
    beta: T,
}

impl<T: Scalar> Params<T> {
    pub fn new(alpha: T, theta: T) -> Result<Self> {
        check_alpha(&alpha)?;
        if theta <= -alpha.clone() {
            return Err(domain(format!("theta must exceed -alpha, got theta = {theta}, alpha = {alpha}")));
        }
        let beta = theta.clone() / alpha.clone();
        Ok(Self { alpha, theta, beta })
    }

    pub fn alpha(&self) -> &T {
        &self.alpha
    }

    pub fn theta(&self) -> &T {
        &self.theta
    }

    /// `theta / alpha`, the exponent of the coagulation measure.
    pub fn beta(&self) -> &T {
        &self.beta
    }

    pub fn to_f64(&self) -> Params<f64> {
        Params { alpha: self.alpha.to_f64(), theta: self.theta.to_f64(), beta: self.beta.to_f64() }
    }
}

impl Params<Rational> {
    /// Parses `"p/q"` literals for both parameters.
    pub fn parse(alpha: &str, theta: &str) -> Result<Self> {
        Self::new(crate::scalar::parse_rational(alpha)?, crate::scalar::parse_rational(theta)?)
    }
}

impl<T: Scalar> fmt::Display for Params<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(alpha={}, theta={})", self.alpha, self.theta)
    }
}

/// Pitman's sampling formula for PD(alpha, theta):
/// `(theta/alpha)_k / (theta)_n * prod_i -(-alpha)_{n_i}`.
///
/// At `theta = 0` the prefactor is its limit `(k-1)! / (alpha (n-1)!)`.
pub fn pd_eppf<T: Scalar>(params: &Params<T>, shape: &PartitionShape) -> T {
    let k = shape.k();
    let n = shape.n();
    let prefactor = if params.theta.is_zero() {
        factorial::<T>(k - 1) / (params.alpha.clone() * factorial::<T>(n - 1))
    } else {
        rising_factorial(&params.beta, k) / rising_factorial(&params.theta, n)
    };
    shape.sizes().iter().fold(prefactor, |acc, &m| {
        acc * alpha_weight(&params.alpha, m).expect("alpha validated by Params")
    })
}

/// EPPF of the paint-box based on a finitely supported proper mass partition `x`:
/// the sum over ordered tuples of distinct colours `(j_1, ..., j_k)` of
/// `prod_i x_{j_i}^{n_i}`.
pub fn paintbox_eppf<T: Scalar>(x: &[T], shape: &PartitionShape) -> Result<T> {
    let support = paintbox_support(x)?;
    let mut memo = HashMap::new();
    Ok(ordered_colourings(&support, shape.sizes(), 0, 0, &mut memo))
}

/// Validates a paint-box mass vector and returns its nonzero entries.
pub(crate) fn paintbox_support<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    if x.iter().any(|v| *v < T::zero()) {
        return Err(invalid("masses must be nonnegative"));
    }
    let total = x.iter().cloned().fold(T::zero(), |a, b| a + b);
    let dust = T::one() - total;
    if dust.abs() > T::tolerance() {
        return Err(domain(format!("paint-box masses must sum to 1 (dust = {dust})")));
    }
    let support: Vec<T> = x.iter().filter(|v| !v.is_zero()).cloned().collect();
    if support.len() > MAX_PAINTBOX_SUPPORT {
        return Err(invalid(format!(
            "paint-box support {} exceeds the limit {MAX_PAINTBOX_SUPPORT}",
            support.len()
        )));
    }
    Ok(support)
}

fn ordered_colourings<T: Scalar>(
    x: &[T],
    sizes: &[usize],
    pos: usize,
    used: u32,
    memo: &mut HashMap<(usize, u32), T>,
) -> T {
    if pos == sizes.len() {
        return T::one();
    }
    if let Some(v) = memo.get(&(pos, used)) {
        return v.clone();
    }
    let mut acc = T::zero();
    for (j, xj) in x.iter().enumerate() {
        if used >> j & 1 == 1 {
            continue;
        }
        let power = (0..sizes[pos]).fold(T::one(), |p, _| p * xj.clone());
        acc = acc + power * ordered_colourings(x, sizes, pos + 1, used | 1 << j, memo);
    }
    memo.insert((pos, used), acc.clone());
    acc
}

/// `sum_{gamma in P_[n]} p(shape(gamma))`; equals one for a genuine EPPF.
pub fn eppf_normalization<T, F>(p: F, n: usize) -> Result<T>
where
    T: Scalar,
    F: Fn(&PartitionShape) -> Result<T>,
{
    let mut cache: HashMap<PartitionShape, T> = HashMap::new();
    let mut total = T::zero();
    for gamma in enumerate_set_partitions(n)? {
        let shape = gamma.shape();
        let v = match cache.get(&shape) {
            Some(v) => v.clone(),
            None => {
                let v = p(&shape)?;
                cache.insert(shape, v.clone());
                v
            }
        };
        total = total + v;
    }
    Ok(total)
}

/// Prediction rule of the Chinese restaurant process for the next element, given
/// the current block sizes (in any order): entry `i` is the probability of
/// joining block `i`, the last entry that of opening a new block.
pub fn crp_weights<T: Scalar>(params: &Params<T>, sizes: &[usize]) -> Vec<T> {
    if sizes.is_empty() {
        return vec![T::one()];
    }
    let n = T::from_usize(sizes.iter().sum());
    let denom = n + params.theta.clone();
    let mut w: Vec<T> = sizes
        .iter()
        .map(|&m| (T::from_usize(m) - params.alpha.clone()) / denom.clone())
        .collect();
    let k = T::from_usize(sizes.len());
    w.push((params.theta.clone() + k * params.alpha.clone()) / denom);
    w
}
