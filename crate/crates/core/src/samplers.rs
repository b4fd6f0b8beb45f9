//! Random generation on the floating-point path: residual allocation for
//! GEM / PD(alpha, theta), paint-box and Chinese-restaurant partitions, the
//! alpha-diversity estimator, importance weighting from PD(alpha, 0), and the
//! discrete split-and-merge chain.
//!
//! Every replica draws from its own [`SimRng`] obtained by [`replica_rng`]:
//! the master seed fixes the ChaCha key and the replica index selects the
//! stream, so results do not depend on how replicas are scheduled.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::eppf::{crp_weights, Params};
use crate::error::{domain, invalid, Error, Result};
use crate::partitions::SetPartition;
use crate::stats::Estimate;

pub type SimRng = ChaCha8Rng;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x0EFC_2008;

/// Dust below this is treated as zero for properness checks.
pub const PROPER_TOL: f64 = 1e-12;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent generator for replica `replica` under master seed `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Finite decreasing sequence of masses plus the explicit unlisted remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct MassPartition {
    parts: Vec<f64>,
    dust: f64,
}

impl MassPartition {
    /// Ranks `parts` and records `dust`; rejects negative or non-finite entries.
    pub fn new(mut parts: Vec<f64>, dust: f64) -> Result<Self> {
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("masses must be finite and nonnegative"));
        }
        if !(0.0..=1.0).contains(&dust) {
            return Err(invalid(format!("dust must lie in [0,1], got {dust}")));
        }
        parts.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(Self { parts, dust })
    }

    /// Proper partition from masses summing to one.
    pub fn proper(parts: Vec<f64>) -> Result<Self> {
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > PROPER_TOL {
            return Err(domain(format!("masses sum to {total}, expected 1")));
        }
        Self::new(parts, 0.0)
    }

    /// The trivial partition `(1, 0, ...)`.
    pub fn unit() -> Self {
        Self { parts: vec![1.0], dust: 0.0 }
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    pub fn dust(&self) -> f64 {
        self.dust
    }

    pub fn is_proper(&self) -> bool {
        self.dust <= PROPER_TOL
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Largest part, zero when empty.
    pub fn largest(&self) -> f64 {
        self.parts.first().copied().unwrap_or(0.0)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.parts.iter().map(|p| p * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.parts.iter().sum()
    }

    fn require_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(domain(format!("mass partition carries dust {}", self.dust)))
        }
    }
}

/// Stopping rule for residual allocation: at most `max_sticks`, or earlier once
/// the unallocated mass drops below `dust_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub max_sticks: usize,
    pub dust_eps: f64,
}

impl Truncation {
    pub fn sticks(max_sticks: usize) -> Self {
        Self { max_sticks, dust_eps: 0.0 }
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self { max_sticks: 10_000, dust_eps: 1e-12 }
    }
}

/// Sticks in size-biased order and the mass not yet allocated.
#[derive(Debug, Clone, PartialEq)]
pub struct StickSample {
    pub sticks: Vec<f64>,
    pub dust: f64,
}

/// One Beta(a, b) draw as `X / (X + Y)` with independent Gamma(a), Gamma(b).
pub fn beta_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(domain(format!("beta parameters must be positive, got ({a}, {b})")));
    }
    let ga = Gamma::new(a, 1.0).map_err(|e| domain(e.to_string()))?;
    let gb = Gamma::new(b, 1.0).map_err(|e| domain(e.to_string()))?;
    loop {
        let x = ga.sample(rng);
        let y = gb.sample(rng);
        let u = x / (x + y);
        if u > 0.0 && u < 1.0 {
            return Ok(u);
        }
    }
}

fn residual_allocation<R, F>(rng: &mut R, trunc: Truncation, mut next_beta: F) -> Result<StickSample>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> Result<f64>,
{
    let mut sticks = Vec::new();
    let mut remaining = 1.0f64;
    while sticks.len() < trunc.max_sticks && remaining >= trunc.dust_eps && remaining > 0.0 {
        let b = next_beta(sticks.len() + 1, rng)?;
        sticks.push(b * remaining);
        remaining *= 1.0 - b;
    }
    Ok(StickSample { sticks, dust: remaining })
}

/// GEM(theta): `xi_n = beta_n prod_{i<n} (1 - beta_i)` with i.i.d. Beta(1, theta).
pub fn gem_sample<R: Rng + ?Sized>(theta: f64, rng: &mut R, trunc: Truncation) -> Result<StickSample> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(domain(format!("GEM needs theta > 0, got {theta}")));
    }
    residual_allocation(rng, trunc, |_, r| beta_sample(1.0, theta, r))
}

/// Two-parameter residual allocation with independent `beta_n ~ Beta(1-alpha, theta+n alpha)`.
pub fn pd_stick_sample<R: Rng + ?Sized>(alpha: f64, theta: f64, rng: &mut R, trunc: Truncation) -> Result<StickSample> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(domain(format!("alpha must lie in [0,1), got {alpha}")));
    }
    if theta.is_nan() || theta <= -alpha {
        return Err(domain(format!("theta must exceed -alpha, got {theta}")));
    }
    residual_allocation(rng, trunc, |n, r| beta_sample(1.0 - alpha, theta + n as f64 * alpha, r))
}

/// Decreasing rearrangement; the dust is carried over unchanged.
pub fn rank(sample: &StickSample) -> Result<MassPartition> {
    MassPartition::new(sample.sticks.clone(), sample.dust.clamp(0.0, 1.0))
}

fn pick_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // round-off in the running subtraction
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

/// Paint-box partition of `[n]`: i.i.d. colours with `P(colour = i) = x_i`.
pub fn paintbox_sample<R: Rng + ?Sized>(x: &MassPartition, n: usize, rng: &mut R) -> Result<SetPartition> {
    x.require_proper()?;
    let total = x.total();
    let colours: Vec<usize> = (0..n).map(|_| pick_index(&x.parts, total, rng)).collect();
    Ok(SetPartition::from_labels(&colours))
}

/// Chinese restaurant process: seats customers `1..=n` by [`crp_weights`].
pub fn crp_sample<R: Rng + ?Sized>(params: &Params<f64>, n: usize, rng: &mut R) -> SetPartition {
    let mut sizes: Vec<usize> = Vec::new();
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let w = crp_weights(params, &sizes);
        let table = pick_index(&w, 1.0, rng);
        if table == sizes.len() {
            sizes.push(1);
        } else {
            sizes[table] += 1;
        }
        labels.push(table);
    }
    SetPartition::from_labels(&labels)
}

/// Average of `n x_n^alpha` over a window of (1-based) ranks; by default the
/// trailing quarter of the listed parts.
pub fn l_estimate(x: &MassPartition, alpha: f64, window: Option<RangeInclusive<usize>>) -> Result<f64> {
    let len = x.len();
    let window = window.unwrap_or_else(|| (len - len / 4).max(1)..=len);
    if window.is_empty() || *window.start() == 0 || *window.end() > len {
        return Err(invalid(format!("window {window:?} does not fit {len} sampled parts")));
    }
    let count = (window.end() - window.start() + 1) as f64;
    let sum: f64 = window.map(|n| n as f64 * x.parts[n - 1].powf(alpha)).sum();
    Ok(sum / count)
}

/// Self-normalized importance estimate of `E_{alpha,theta}[f]` from PD(alpha, 0)
/// samples weighted by `L^{theta/alpha}`.
pub fn importance_estimate<F>(f: F, params: &Params<f64>, replicas: usize, trunc: Truncation, seed: u64) -> Result<Estimate>
where
    F: Fn(&MassPartition) -> f64 + Sync,
{
    if *params.theta() == 0.0 {
        return Err(invalid("importance weighting needs theta != 0"));
    }
    if replicas < 100 {
        return Err(invalid("importance weighting needs at least 100 replicas"));
    }
    let alpha = *params.alpha();
    let exponent = *params.beta();
    let draws: Vec<(f64, f64)> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = replica_rng(seed, i);
            let x = rank(&pd_stick_sample(alpha, 0.0, &mut rng, trunc)?)?;
            let l = l_estimate(&x, alpha, None)?;
            Ok((f(&x), l.powf(exponent)))
        })
        .collect::<Result<_>>()?;
    let total_w: f64 = draws.iter().map(|d| d.1).sum();
    if !(total_w.is_finite() && total_w > 0.0) {
        return Err(Error::DegenerateWeights(format!("sum of weights = {total_w}")));
    }
    let mean = draws.iter().map(|(v, w)| v * w).sum::<f64>() / total_w;
    let var = draws.iter().map(|(v, w)| (w * (v - mean)).powi(2)).sum::<f64>();
    Ok(Estimate { mean, se: var.sqrt() / total_w })
}

/// Plain Monte Carlo estimate of `E_{alpha,theta}[f]` by residual allocation.
pub fn direct_estimate<F>(f: F, params: &Params<f64>, replicas: usize, trunc: Truncation, seed: u64) -> Result<Estimate>
where
    F: Fn(&MassPartition) -> f64 + Sync,
{
    if replicas < 2 {
        return Err(invalid("need at least two replicas"));
    }
    let (alpha, theta) = (*params.alpha(), *params.theta());
    let values: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = replica_rng(seed, i);
            Ok(f(&rank(&pd_stick_sample(alpha, theta, &mut rng, trunc)?)?))
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_iid(&values))
}

fn insert_ranked(parts: &mut Vec<f64>, value: f64) {
    let pos = parts.partition_point(|p| *p > value);
    parts.insert(pos, value);
}

/// One move of the discrete split-and-merge chain, in place on ranked `parts`.
///
/// Two indices are drawn i.i.d. with `P(i) = x_i`; distinct picks merge,
/// equal picks split uniformly. Total mass is conserved up to the rounding of
/// one addition (merge) or one multiplication and subtraction (split).
pub fn split_merge_step_in_place<R: Rng + ?Sized>(parts: &mut Vec<f64>, rng: &mut R) {
    let total: f64 = parts.iter().sum();
    let first = pick_index(parts, total, rng);
    let second = pick_index(parts, total, rng);
    if first != second {
        let merged = parts[first] + parts[second];
        parts.remove(first.max(second));
        parts.remove(first.min(second));
        insert_ranked(parts, merged);
    } else {
        let piece = parts.remove(first);
        let u: f64 = rng.random();
        let left = u * piece;
        insert_ranked(parts, left);
        insert_ranked(parts, piece - left);
    }
}

pub fn split_merge_step<R: Rng + ?Sized>(x: &MassPartition, rng: &mut R) -> Result<MassPartition> {
    x.require_proper()?;
    let mut parts = x.parts.clone();
    split_merge_step_in_place(&mut parts, rng);
    Ok(MassPartition { parts, dust: x.dust })
}
