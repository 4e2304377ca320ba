//! Brute-force references for tiny instances: exhaustive grid search over
//! powers, and over groupings × subcarrier assignments × grid powers.
//!
//! Rates here are evaluated directly from the SIC formula with the gain
//! decoding order; nothing is shared with the optimiser's incremental state.

use ndarray::Array2;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::noma::{sic_order, Link, PowerAllocation, SubcarrierAllocation};

pub const MAX_GRID_POINTS: u64 = 1_000_000;
pub const MAX_ORACLE_USERS: usize = 6;
pub const MAX_ORACLE_SUBCARRIERS: usize = 3;

/// Constraints shared by every oracle evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleProblem {
    pub link: Link,
    pub p_max_w: f64,
    pub circuit_power_w: f64,
    pub r_req_bps: f64,
}

/// Power levels `0, step, 2·step, …, p_max` (inclusive when it lands on the grid).
pub fn power_grid(step_w: f64, p_max_w: f64) -> Vec<f64> {
    let count = (p_max_w / step_w + 1e-9).floor() as usize;
    (0..=count).map(|i| i as f64 * step_w).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub powers: PowerAllocation,
    pub ee_bits_per_joule: f64,
}

/// Flattened evaluator for one fixed allocation.
struct Evaluator {
    /// Scheduled (user, subcarrier) pairs, user-major.
    pairs: Vec<(usize, usize)>,
    /// Per subcarrier: pair indices in decoding order.
    decode: Vec<Vec<usize>>,
    gains: Vec<f64>,
    user_of: Vec<usize>,
    n_users: usize,
    n_active: usize,
}

impl Evaluator {
    fn new(alloc: &SubcarrierAllocation, channel: &ChannelMatrix) -> Self {
        let pairs: Vec<(usize, usize)> = alloc
            .subcarriers_of
            .iter()
            .enumerate()
            .flat_map(|(u, scs)| scs.iter().map(move |&s| (u, s)))
            .collect();
        let decode = alloc
            .users_on
            .iter()
            .enumerate()
            .map(|(s, users)| {
                let keyed: Vec<(usize, f64)> =
                    users.iter().map(|&u| (u, channel.gains[[u, s]])).collect();
                sic_order(&keyed)
                    .into_iter()
                    .map(|u| pairs.iter().position(|&x| x == (u, s)).unwrap())
                    .collect()
            })
            .collect();
        let gains = pairs.iter().map(|&(u, s)| channel.gains[[u, s]]).collect();
        let user_of = pairs.iter().map(|&(u, _)| u).collect();
        Self {
            pairs,
            decode,
            gains,
            user_of,
            n_users: alloc.n_users(),
            n_active: alloc.n_scheduled(),
        }
    }

    /// EE of a flat power vector, or `None` if it breaks a budget or rate floor.
    fn ee(
        &self,
        p: &[f64],
        problem: &OracleProblem,
        user_rate: &mut [f64],
        user_power: &mut [f64],
    ) -> Option<f64> {
        user_rate.fill(0.0);
        user_power.fill(0.0);
        for (i, &u) in self.user_of.iter().enumerate() {
            user_power[u] += p[i];
        }
        if user_power.iter().any(|&x| x > problem.p_max_w + 1e-12) {
            return None;
        }
        for order in &self.decode {
            let mut interference = 0.0;
            for &i in order.iter().rev() {
                let rx = p[i] * self.gains[i];
                user_rate[self.user_of[i]] += problem
                    .link
                    .rate(rx / (interference + problem.link.noise_w));
                interference += rx;
            }
        }
        if problem.r_req_bps > 0.0
            && user_rate
                .iter()
                .any(|&r| r < problem.r_req_bps * (1.0 - 1e-12))
        {
            return None;
        }
        let tx: f64 = user_power.iter().sum();
        let denom = tx + self.n_active as f64 * problem.circuit_power_w;
        let sum: f64 = user_rate.iter().sum();
        Some(if self.n_active == 0 || denom <= 0.0 {
            0.0
        } else {
            sum / denom
        })
    }

    fn to_allocation(&self, p: &[f64], n_sc: usize, p_max_w: f64) -> PowerAllocation {
        let mut m = Array2::zeros((self.n_users, n_sc));
        for (i, &(u, s)) in self.pairs.iter().enumerate() {
            m[[u, s]] = p[i];
        }
        PowerAllocation { p: m, p_max_w }
    }

    /// Exhaustive search where pair `i` may take any of `choices[i]`; the
    /// first pair is the most significant digit, so the first maximum found is
    /// the lexicographically smallest when every choice list is ascending.
    fn search(&self, choices: &[Vec<f64>], problem: &OracleProblem) -> Option<(Vec<f64>, f64)> {
        let dims = choices.len();
        let mut idx = vec![0usize; dims];
        let mut p: Vec<f64> = choices.iter().map(|c| c[0]).collect();
        let mut user_rate = vec![0.0; self.n_users];
        let mut user_power = vec![0.0; self.n_users];
        let mut best: Option<(Vec<f64>, f64)> = None;
        loop {
            if let Some(ee) = self.ee(&p, problem, &mut user_rate, &mut user_power) {
                if best.as_ref().is_none_or(|b| ee > b.1) {
                    best = Some((p.clone(), ee));
                }
            }
            // odometer, least significant digit last
            let mut d = dims;
            loop {
                if d == 0 {
                    return best;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < choices[d].len() {
                    p[d] = choices[d][idx[d]];
                    break;
                }
                idx[d] = 0;
                p[d] = choices[d][0];
            }
        }
    }
}

fn sorted_levels(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.is_empty() {
        return Err(Error::Size("power level set is empty".into()));
    }
    if levels.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::param("power levels must be finite and >= 0"));
    }
    let mut v = levels.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// Best EE over every assignment of grid levels to the scheduled
/// (user, subcarrier) pairs that respects budgets and rate floors.
pub fn grid_power_oracle(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    levels: &[f64],
    problem: &OracleProblem,
) -> Result<GridOptimum> {
    let levels = sorted_levels(levels)?;
    let eval = Evaluator::new(alloc, channel);
    let points = (levels.len() as u64).checked_pow(eval.pairs.len() as u32);
    if points.is_none_or(|p| p > MAX_GRID_POINTS) {
        return Err(Error::Size(format!(
            "{} levels over {} pairs exceeds {MAX_GRID_POINTS} grid points",
            levels.len(),
            eval.pairs.len()
        )));
    }
    let choices = vec![levels; eval.pairs.len()];
    let (p, ee) = eval
        .search(&choices, problem)
        .ok_or_else(|| Error::Infeasible("no grid point meets the rate floors".into()))?;
    Ok(GridOptimum {
        powers: eval.to_allocation(&p, alloc.n_subcarriers(), problem.p_max_w),
        ee_bits_per_joule: ee,
    })
}

/// Best feasible grid point among the floor/ceiling neighbours of `powers`.
pub fn snap_to_grid(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    powers: &PowerAllocation,
    levels: &[f64],
    problem: &OracleProblem,
) -> Result<Option<GridOptimum>> {
    let levels = sorted_levels(levels)?;
    let eval = Evaluator::new(alloc, channel);
    if eval.pairs.len() > 20 {
        return Err(Error::Size(format!(
            "{} pairs is too many to snap",
            eval.pairs.len()
        )));
    }
    let choices: Vec<Vec<f64>> = eval
        .pairs
        .iter()
        .map(|&(u, s)| {
            let x = powers.p[[u, s]];
            let below = levels.iter().copied().rfind(|&l| l <= x);
            let above = levels.iter().copied().find(|&l| l >= x);
            let mut c: Vec<f64> = below.into_iter().chain(above).collect();
            c.dedup();
            if c.is_empty() {
                c.push(levels[0]);
            }
            c
        })
        .collect();
    Ok(eval.search(&choices, problem).map(|(p, ee)| GridOptimum {
        powers: eval.to_allocation(&p, alloc.n_subcarriers(), problem.p_max_w),
        ee_bits_per_joule: ee,
    }))
}

/// Set partitions of `0..n` as restricted-growth label vectors.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, labels: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max.min(n) {
            labels.push(l);
            let next_max = if l == max { max + 1 } else { max };
            rec(i + 1, n, labels, next_max, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Global optimum over structures and grid powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveOptimum {
    pub allocation: SubcarrierAllocation,
    pub powers: PowerAllocation,
    pub ee_bits_per_joule: f64,
    /// Structures (grouping × subcarrier map) enumerated.
    pub structures: usize,
}

/// Every grouping of the users into at most `n_sc` groups of at most
/// `max_group_size`, every subcarrier map that honours the quota rule
/// (`n_sc / k` each, `n_sc % k` groups get one more), and every grid power
/// vector. Structures are visited in a fixed order; ties keep the first.
pub fn exhaustive_grouping_oracle(
    channel: &ChannelMatrix,
    max_group_size: usize,
    levels: &[f64],
    problem: &OracleProblem,
) -> Result<ExhaustiveOptimum> {
    let n = channel.n_users();
    let n_sc = channel.n_subcarriers();
    if n == 0 || n > MAX_ORACLE_USERS || n_sc > MAX_ORACLE_SUBCARRIERS {
        return Err(Error::Size(format!(
            "exhaustive oracle supports 1..={MAX_ORACLE_USERS} users and <= {MAX_ORACLE_SUBCARRIERS} subcarriers, got {n} and {n_sc}"
        )));
    }
    let mut best: Option<ExhaustiveOptimum> = None;
    let mut structures = 0;
    for labels in set_partitions(n) {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        if k > n_sc {
            continue;
        }
        let mut sizes = vec![0; k];
        labels.iter().for_each(|&l| sizes[l] += 1);
        if sizes.iter().any(|&s| s > max_group_size) {
            continue;
        }
        let (base, extra) = (n_sc / k, n_sc % k);
        let mut quota: Vec<usize> = (0..k).map(|i| base + usize::from(i < extra)).collect();
        quota.sort_unstable();
        for code in 0..k.pow(n_sc as u32) {
            let map: Vec<usize> = (0..n_sc).map(|s| code / k.pow(s as u32) % k).collect();
            let mut counts = vec![0; k];
            map.iter().for_each(|&g| counts[g] += 1);
            counts.sort_unstable();
            if counts != quota {
                continue;
            }
            let users_on = map
                .iter()
                .map(|&g| (0..n).filter(|&u| labels[u] == g).collect())
                .collect();
            let alloc = SubcarrierAllocation::from_users_on(n, users_on)?;
            structures += 1;
            match grid_power_oracle(&alloc, channel, levels, problem) {
                Ok(opt) => {
                    if best
                        .as_ref()
                        .is_none_or(|b| opt.ee_bits_per_joule > b.ee_bits_per_joule)
                    {
                        best = Some(ExhaustiveOptimum {
                            allocation: alloc,
                            powers: opt.powers,
                            ee_bits_per_joule: opt.ee_bits_per_joule,
                            structures: 0,
                        });
                    }
                }
                Err(Error::Infeasible(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    best.map(|b| ExhaustiveOptimum { structures, ..b })
        .ok_or_else(|| Error::Infeasible("no structure admits a feasible grid point".into()))
}
