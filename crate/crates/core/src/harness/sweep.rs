use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::seed;
use crate::allocator::{baseline_pipeline, AllocationConfig, PipelineOutput, Variant};
use crate::channel::{draw_channel_matrix, noise_power_w};
use crate::error::{Error, Result};
use crate::noma::{EnergyReport, Link};
use crate::topology::generate_topology;

/// Serial or rayon-parallel execution of independent drops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Aggregate over drops for one (variant, user count, rate floor) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variant: Variant,
    pub n_users: usize,
    pub r_req_bps: f64,
    pub mean_ee_bits_per_joule: f64,
    pub std_ee: f64,
    pub mean_sum_rate_bps: f64,
    pub mean_tx_power_w: f64,
    pub outage_fraction: f64,
    pub n_drops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropOutcome {
    pub energy: EnergyReport,
    pub outage: usize,
}

pub fn link_of(config: &ExperimentConfig) -> Link {
    Link {
        noise_w: noise_power_w(&config.channel),
        bandwidth_hz: config.channel.subcarrier_bandwidth_hz(),
    }
}

/// Runs the full pipeline for one drop and returns everything it produced.
pub fn run_drop_detailed(
    config: &ExperimentConfig,
    variant: Variant,
    n_users: usize,
    r_req_bps: f64,
    drop_index: usize,
) -> Result<PipelineOutput> {
    let base = config.base_seed;
    let topo_seed = seed::topology_seed(base, n_users, drop_index);
    let wrap = |e: Error| Error::Drop {
        seed: topo_seed,
        source: Box::new(e),
    };
    let topology = generate_topology(topo_seed, n_users, config.radius_m, config.uav_altitude_m)
        .map_err(wrap)?;
    let channel = draw_channel_matrix(
        &topology,
        &config.channel,
        seed::channel_seed(base, n_users, drop_index),
    )
    .map_err(wrap)?;
    let allocation = AllocationConfig {
        r_req_bps,
        ..config.allocation.clone()
    };
    let algo_seed = seed::algorithm_seed(base, variant, n_users, drop_index);
    baseline_pipeline(variant, &channel, link_of(config), &allocation, algo_seed).map_err(wrap)
}

pub fn run_drop(
    config: &ExperimentConfig,
    variant: Variant,
    n_users: usize,
    r_req_bps: f64,
    drop_index: usize,
) -> Result<DropOutcome> {
    let out = run_drop_detailed(config, variant, n_users, r_req_bps, drop_index)?;
    Ok(DropOutcome {
        energy: out.energy,
        outage: out.trace.outage_users.len(),
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn aggregate(variant: Variant, n_users: usize, r_req_bps: f64, drops: &[DropOutcome]) -> SweepRow {
    let ee: Vec<f64> = drops.iter().map(|d| d.energy.ee_bits_per_joule).collect();
    let (mean_ee, std_ee) = mean_std(&ee);
    let n = drops.len() as f64;
    SweepRow {
        variant,
        n_users,
        r_req_bps,
        mean_ee_bits_per_joule: mean_ee,
        std_ee,
        mean_sum_rate_bps: drops.iter().map(|d| d.energy.sum_rate_bps).sum::<f64>() / n,
        mean_tx_power_w: drops.iter().map(|d| d.energy.total_tx_power_w).sum::<f64>() / n,
        outage_fraction: drops
            .iter()
            .map(|d| d.outage as f64 / n_users as f64)
            .sum::<f64>()
            / n,
        n_drops: drops.len(),
    }
}

/// Sweep points in output order: variant, then user count, then rate floor.
fn points(config: &ExperimentConfig) -> Vec<(Variant, usize, f64)> {
    let mut users = config.n_users_list.clone();
    users.sort_unstable();
    users.dedup();
    let mut out = Vec::new();
    for v in config.variants() {
        for &n in &users {
            for &r in &config.r_req_sweep_bps {
                out.push((v, n, r));
            }
        }
    }
    out
}

/// Runs every drop of the given points and aggregates them in point order.
pub fn run_points(
    config: &ExperimentConfig,
    points: &[(Variant, usize, f64)],
    execution: Execution,
) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let n_drops = config.n_drops;
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..n_drops).map(move |d| (p, d)))
        .collect();
    let run = |&(p, d): &(usize, usize)| {
        let (v, n, r) = points[p];
        run_drop(config, v, n, r, d)
    };
    let outcomes: Vec<DropOutcome> = match execution {
        Execution::Serial => tasks.iter().map(run).collect::<Result<_>>()?,
        Execution::Parallel => tasks.par_iter().map(run).collect::<Result<_>>()?,
    };
    Ok(points
        .iter()
        .zip(outcomes.chunks(n_drops))
        .map(|(&(v, n, r), drops)| aggregate(v, n, r, drops))
        .collect())
}

/// Every (variant, user count, rate floor) point of the config.
pub fn run_sweep(config: &ExperimentConfig, execution: Execution) -> Result<Vec<SweepRow>> {
    run_points(config, &points(config), execution)
}

/// The first user count and rate floor only, for every selected variant.
pub fn run_single_point(config: &ExperimentConfig, execution: Execution) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let n = config.n_users_list[0];
    let r = config.r_req_sweep_bps[0];
    let pts: Vec<_> = config.variants().into_iter().map(|v| (v, n, r)).collect();
    run_points(config, &pts, execution)
}
