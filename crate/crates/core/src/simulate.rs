//! Gillespie simulation of the restricted chain and the Monte Carlo
//! convergence experiments built on it.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::chain::DistVector;
use crate::error::{invalid, Error, Result};
use crate::exact::binomial;
use crate::partitions::SetPartition;
use crate::rates::RateTable;
use crate::samplers::{gem_sample, rank, replica_rng, split_merge_step_in_place, Truncation};
use crate::stats::Estimate;

/// Jump times and states of one path of the restricted chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: SetPartition,
    /// `(jump time, state entered)`, strictly increasing in time.
    pub jumps: Vec<(f64, SetPartition)>,
    pub end_time: f64,
}

impl Trajectory {
    /// State occupied at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> &SetPartition {
        let count = self.jumps.partition_point(|(s, _)| *s <= t);
        if count == 0 {
            &self.initial
        } else {
            &self.jumps[count - 1].1
        }
    }
}

fn coag_weights(table: &RateTable<f64>, l: usize) -> Vec<f64> {
    (2..=l)
        .map(|k| binomial(l, k) as f64 * table.coag(l, k).copied().unwrap_or(0.0))
        .collect()
}

fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64> + Clone, total: f64, rng: &mut R) -> usize {
    let mut u = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if u < w {
            return i;
        }
        if w > 0.0 {
            last_positive = i;
        }
        u -= w;
    }
    last_positive
}

/// Total jump rate out of `state`.
pub fn exit_rate(state: &SetPartition, table: &RateTable<f64>) -> f64 {
    let coag: f64 = coag_weights(table, state.num_blocks()).iter().sum();
    let split: f64 = state
        .blocks()
        .iter()
        .map(|b| table.split_total(b.len()).copied().unwrap_or(0.0))
        .sum();
    coag + split
}

/// Draws the holding time in `state` and the state entered next.
///
/// A coagulation first picks its size `k` with weight `C(l,k) c(l,k)` and then a
/// uniform `k`-subset of blocks; a fragmentation picks a block by its total
/// split rate and then `eta` by its individual rate.
pub fn gillespie_step<R: Rng + ?Sized>(state: &SetPartition, table: &RateTable<f64>, rng: &mut R) -> Result<(f64, SetPartition)> {
    if state.n() != table.n() {
        return Err(invalid(format!("state of [{}] with a rate table for [{}]", state.n(), table.n())));
    }
    let l = state.num_blocks();
    let coag = coag_weights(table, l);
    let coag_total: f64 = coag.iter().sum();
    let block_rates: Vec<f64> = state
        .blocks()
        .iter()
        .map(|b| table.split_total(b.len()).copied().unwrap_or(0.0))
        .collect();
    let split_total: f64 = block_rates.iter().sum();
    let total = coag_total + split_total;
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Absorbing(state.to_string()));
    }
    let hold: f64 = Exp1.sample(rng);
    let hold = hold / total;

    let next = if rng.random::<f64>() * total < coag_total {
        let k = 2 + pick(coag.iter().copied(), coag_total, rng);
        let mut chosen = sample_indices(rng, l, k).into_vec();
        chosen.sort_unstable();
        state.merge_blocks(&chosen)?
    } else {
        let block = pick(block_rates.iter().copied(), split_total, rng);
        let moves = table.split_moves(state.blocks()[block].len());
        let eta = pick(moves.iter().map(|(_, r)| *r), block_rates[block], rng);
        state.split_block(block, &moves[eta].0)?
    };
    Ok((hold, next))
}

/// Runs the chain from `initial` and returns the state occupied at `t_end`.
pub fn gillespie_run<R: Rng + ?Sized>(table: &RateTable<f64>, initial: &SetPartition, t_end: f64, rng: &mut R) -> Result<SetPartition> {
    let mut state = initial.clone();
    let mut t = 0.0;
    loop {
        let (hold, next) = match gillespie_step(&state, table, rng) {
            Ok(step) => step,
            Err(Error::Absorbing(_)) => return Ok(state),
            Err(e) => return Err(e),
        };
        t += hold;
        if t > t_end {
            return Ok(state);
        }
        state = next;
    }
}

/// Like [`gillespie_run`] but keeps every jump.
pub fn gillespie_trajectory<R: Rng + ?Sized>(table: &RateTable<f64>, initial: &SetPartition, t_end: f64, rng: &mut R) -> Result<Trajectory> {
    let mut jumps = Vec::new();
    let mut state = initial.clone();
    let mut t = 0.0;
    loop {
        let (hold, next) = match gillespie_step(&state, table, rng) {
            Ok(step) => step,
            Err(Error::Absorbing(_)) => break,
            Err(e) => return Err(e),
        };
        t += hold;
        if t > t_end {
            break;
        }
        jumps.push((t, next.clone()));
        state = next;
    }
    Ok(Trajectory { initial: initial.clone(), jumps, end_time: t_end })
}

/// `0` followed by `points - 1` times doubling up to `t_end`.
pub fn geometric_grid(t_end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_end],
        _ => std::iter::once(0.0)
            .chain((0..points - 1).map(|i| t_end / 2f64.powi((points - 2 - i) as i32)))
            .collect(),
    }
}

/// Empirical TV distance to the target law at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvPoint {
    pub t: f64,
    pub tv: f64,
    /// Delta-method standard error of `tv` under multinomial sampling.
    pub se: f64,
}

/// For every grid time, the empirical law of independent replicas started at
/// `initial` and its TV distance to `target`.
pub fn equilibrium_experiment(
    table: &RateTable<f64>,
    target: &DistVector<f64>,
    grid: &[f64],
    replicas: usize,
    initial: &SetPartition,
    seed: u64,
) -> Result<Vec<TvPoint>> {
    if grid.windows(2).any(|w| w[0] > w[1]) || grid.iter().any(|t| *t < 0.0) {
        return Err(invalid("time grid must be nonnegative and sorted"));
    }
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    let space = target.space().clone();
    if space.n() != table.n() || space.index_of(initial).is_none() {
        return Err(invalid(format!("initial state {initial} is not in P_[{}]", space.n())));
    }
    let t_end = grid.last().copied().unwrap_or(0.0);
    let snapshots: Vec<Vec<usize>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<usize>> {
            let mut rng = replica_rng(seed, i);
            let path = gillespie_trajectory(table, initial, t_end, &mut rng)?;
            Ok(grid
                .iter()
                .map(|&t| space.index_of(path.state_at(t)).expect("chain stays in P_[n]"))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(grid.len());
    for (g, &t) in grid.iter().enumerate() {
        let mut counts = vec![0u64; space.len()];
        for snap in &snapshots {
            counts[snap[g]] += 1;
        }
        let empirical = DistVector::from_counts(space.clone(), &counts)?;
        out.push(tv_point(t, &empirical, target, replicas));
    }
    Ok(out)
}

fn tv_point(t: f64, empirical: &DistVector<f64>, target: &DistVector<f64>, replicas: usize) -> TvPoint {
    let (p, q) = (empirical.probs(), target.probs());
    let tv = 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>();
    // d tv / d p_j = sign(p_j - q_j) / 2
    let signs: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a - b).signum()).collect();
    let first: f64 = signs.iter().zip(p).map(|(s, a)| s * a).sum();
    let second: f64 = signs.iter().zip(p).map(|(s, a)| s * s * a).sum();
    let var = (second - first * first).max(0.0) / replicas as f64;
    TvPoint { t, tv, se: 0.5 * var.sqrt() }
}

/// True when every step of the curve rises by at most `sigmas` combined standard errors.
pub fn tv_curve_non_increasing(curve: &[TvPoint], sigmas: f64) -> bool {
    curve
        .windows(2)
        .all(|w| w[1].tv <= w[0].tv + sigmas * w[0].se.hypot(w[1].se))
}

/// Long-run averages of the split-and-merge chain started from `(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMergeSummary {
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub samples: usize,
    pub prob_largest_above_half: Estimate,
    pub mean_largest: Estimate,
    pub mean_sum_of_squares: Estimate,
    /// Largest `|sum(parts) - 1|` seen over the whole run.
    pub max_mass_error: f64,
    pub final_parts: usize,
}

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 50;

/// Runs `steps` moves in total; after `burn_in` moves, every `thin`-th state is recorded.
pub fn split_merge_experiment(steps: usize, burn_in: usize, thin: usize, seed: u64) -> Result<SplitMergeSummary> {
    if steps <= burn_in {
        return Err(invalid("steps must exceed burn_in"));
    }
    if thin == 0 {
        return Err(invalid("thin must be positive"));
    }
    let mut rng = replica_rng(seed, 0);
    let mut parts = vec![1.0];
    let mut max_mass_error = 0.0f64;
    let kept = (steps - burn_in) / thin;
    let (mut above, mut largest, mut squares) = (Vec::with_capacity(kept), Vec::with_capacity(kept), Vec::with_capacity(kept));
    for step in 1..=steps {
        split_merge_step_in_place(&mut parts, &mut rng);
        max_mass_error = max_mass_error.max((parts.iter().sum::<f64>() - 1.0).abs());
        if step > burn_in && (step - burn_in).is_multiple_of(thin) {
            above.push(if parts[0] > 0.5 { 1.0 } else { 0.0 });
            largest.push(parts[0]);
            squares.push(parts.iter().map(|p| p * p).sum());
        }
    }
    Ok(SplitMergeSummary {
        steps,
        burn_in,
        thin,
        samples: above.len(),
        prob_largest_above_half: Estimate::from_batch_means(&above, BATCHES),
        mean_largest: Estimate::from_batch_means(&largest, BATCHES),
        mean_sum_of_squares: Estimate::from_batch_means(&squares, BATCHES),
        max_mass_error,
        final_parts: parts.len(),
    })
}

/// The same three statistics from i.i.d. ranked GEM(theta) draws.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedStatistics {
    pub prob_largest_above_half: Estimate,
    pub mean_largest: Estimate,
    pub mean_sum_of_squares: Estimate,
}

pub fn direct_gem_statistics(theta: f64, replicas: usize, seed: u64) -> Result<RankedStatistics> {
    let draws: Vec<(f64, f64)> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let x = rank(&gem_sample(theta, &mut replica_rng(seed, i), Truncation::default())?)?;
            Ok((x.largest(), x.sum_of_squares()))
        })
        .collect::<Result<_>>()?;
    let above: Vec<f64> = draws.iter().map(|d| if d.0 > 0.5 { 1.0 } else { 0.0 }).collect();
    let largest: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let squares: Vec<f64> = draws.iter().map(|d| d.1).collect();
    Ok(RankedStatistics {
        prob_largest_above_half: Estimate::from_iid(&above),
        mean_largest: Estimate::from_iid(&largest),
        mean_sum_of_squares: Estimate::from_iid(&squares),
    })
}
