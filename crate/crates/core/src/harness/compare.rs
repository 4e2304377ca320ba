//! Heuristic-versus-oracle comparison on tiny instances: 4 users, 2
//! subcarriers, groups of at most 2, power grid of 0.01 W.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::seed;
use super::sweep::link_of;
use crate::allocator::{run_pipeline, AllocationConfig};
use crate::channel::{draw_channel_matrix, ChannelMatrix, ChannelParams};
use crate::error::{Error, Result};
use crate::noma::Link;
use crate::oracle::{
    exhaustive_grouping_oracle, grid_power_oracle, power_grid, snap_to_grid, OracleProblem,
};
use crate::topology::generate_topology;

pub const TINY_USERS: usize = 4;
pub const TINY_SUBCARRIERS: usize = 2;
pub const TINY_GROUP_CAP: usize = 2;
pub const GRID_STEP_W: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub instance: usize,
    pub seed: u64,
    pub r_req_bps: f64,
    /// EE of the pipeline with continuous powers.
    pub heuristic_ee: f64,
    /// EE of the best feasible grid neighbour of the pipeline's powers.
    pub snapped_ee: Option<f64>,
    /// Best grid-power EE on the pipeline's own grouping and subcarriers.
    pub structure_ee: Option<f64>,
    pub oracle_ee: Option<f64>,
    pub outage_users: usize,
}

impl OracleRow {
    pub fn ratio(&self) -> Option<f64> {
        match (self.snapped_ee, self.oracle_ee) {
            (Some(h), Some(o)) if o > 0.0 => Some(h / o),
            _ => None,
        }
    }
}

/// Tiny instance: channel parameters keep the configured per-subcarrier bandwidth.
pub fn tiny_channel(
    config: &ExperimentConfig,
    instance_seed: u64,
) -> Result<(ChannelMatrix, Link)> {
    let params = ChannelParams {
        n_subcarriers: TINY_SUBCARRIERS,
        total_bandwidth_hz: config.channel.subcarrier_bandwidth_hz() * TINY_SUBCARRIERS as f64,
        ..config.channel.clone()
    };
    let topo = generate_topology(
        instance_seed,
        TINY_USERS,
        config.radius_m,
        config.uav_altitude_m,
    )?;
    let channel = draw_channel_matrix(&topo, &params, seed::mix64(instance_seed))?;
    let link = ExperimentConfig {
        channel: params,
        ..config.clone()
    };
    Ok((channel, link_of(&link)))
}

/// Runs the pipeline and both oracles on one tiny instance.
pub fn compare_instance(
    config: &ExperimentConfig,
    instance: usize,
    instance_seed: u64,
    r_req_bps: f64,
) -> Result<OracleRow> {
    let (channel, link) = tiny_channel(config, instance_seed)?;
    let alloc_cfg = AllocationConfig {
        max_group_size: TINY_GROUP_CAP,
        r_req_bps,
        ..config.allocation.clone()
    };
    let out = run_pipeline(&channel, link, &alloc_cfg, instance_seed)?;
    let problem = OracleProblem {
        link,
        p_max_w: alloc_cfg.p_max_w,
        circuit_power_w: alloc_cfg.circuit_power_w,
        r_req_bps,
    };
    let levels = power_grid(GRID_STEP_W, alloc_cfg.p_max_w);
    let snapped = snap_to_grid(&out.allocation, &channel, &out.powers, &levels, &problem)?;
    let structure = match grid_power_oracle(&out.allocation, &channel, &levels, &problem) {
        Ok(o) => Some(o.ee_bits_per_joule),
        Err(Error::Infeasible(_)) => None,
        Err(e) => return Err(e),
    };
    let oracle = match exhaustive_grouping_oracle(&channel, TINY_GROUP_CAP, &levels, &problem) {
        Ok(o) => Some(o.ee_bits_per_joule),
        Err(Error::Infeasible(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(OracleRow {
        instance,
        seed: instance_seed,
        r_req_bps,
        heuristic_ee: out.energy.ee_bits_per_joule,
        snapped_ee: snapped.map(|s| s.ee_bits_per_joule),
        structure_ee: structure,
        oracle_ee: oracle,
        outage_users: out.trace.outage_users.len(),
    })
}

/// `n_drops` tiny instances at the configured rate floor (`allocation.r_req_bps`).
pub fn oracle_compare(config: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    config.validate()?;
    (0..config.n_drops)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive(config.base_seed, &[4, i as u64]);
            compare_instance(config, i, s, config.allocation.r_req_bps)
        })
        .collect()
}
