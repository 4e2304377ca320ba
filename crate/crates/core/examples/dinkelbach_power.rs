//! Power control on a fixed grouping: minimum-power feasibility, then the
//! Dinkelbach ascent, printing the λ iterates.

use uav_noma::allocator::{
    assign_subcarriers, dinkelbach_power_allocation, evaluate_ee, min_power_feasible,
    AllocationConfig,
};
use uav_noma::channel::{draw_channel_matrix, noise_power_w, ChannelParams};
use uav_noma::noma::{DecodeOrder, Link, OrderBy};
use uav_noma::spectral::{
    cluster_count, rebalance_clusters, similarity_matrix, spectral_clustering, user_features,
};
use uav_noma::topology::generate_topology;

fn main() -> uav_noma::Result<()> {
    let params = ChannelParams {
        n_subcarriers: 16,
        total_bandwidth_hz: 2.5e6,
        ..Default::default()
    };
    let link = Link {
        noise_w: noise_power_w(&params),
        bandwidth_hz: params.subcarrier_bandwidth_hz(),
    };
    let channel = draw_channel_matrix(&generate_topology(3, 10, 500.0, 2000.0)?, &params, 4)?;
    let config = AllocationConfig {
        r_req_bps: 1.0e6,
        ..Default::default()
    };

    let graph = similarity_matrix(&user_features(&channel), None)?;
    let k = cluster_count(channel.n_users(), config.max_group_size);
    let raw = spectral_clustering(&graph, k, 0)?;
    let clusters = rebalance_clusters(&raw.assignment, &raw.embedding, config.max_group_size)?;
    let alloc = assign_subcarriers(&clusters, &channel, params.n_subcarriers)?;
    let order = DecodeOrder::new(&alloc, &channel, OrderBy::Gain, None);

    let start = min_power_feasible(&alloc, &channel, &config, link, &order)?;
    let ee_start = evaluate_ee(
        &alloc,
        &channel,
        &start.powers,
        link,
        &order,
        config.circuit_power_w,
    );
    println!(
        "phase 1: {:.4e} W in total, EE {ee_start:.4e} bit/J, outage {:?}",
        start.powers.total(),
        start.outage
    );

    let (powers, trace) =
        dinkelbach_power_allocation(&alloc, &channel, &config, link, &order, &start)?;
    for (t, (lambda, residual)) in trace
        .lambda_sequence
        .iter()
        .zip(&trace.residuals)
        .enumerate()
    {
        println!("iteration {t}: lambda {lambda:.6e} bit/J, residual {residual:.3e}");
    }
    println!(
        "final: {:.4e} W in total, converged {}",
        powers.total(),
        trace.converged
    );
    Ok(())
}
