//! One drop through every grouping strategy.

use uav_noma::allocator::{baseline_pipeline, AllocationConfig, Variant};
use uav_noma::channel::{draw_channel_matrix, noise_power_w, ChannelParams};
use uav_noma::noma::Link;
use uav_noma::topology::generate_topology;

fn main() -> uav_noma::Result<()> {
    let params = ChannelParams::default();
    let link = Link {
        noise_w: noise_power_w(&params),
        bandwidth_hz: params.subcarrier_bandwidth_hz(),
    };
    let channel = draw_channel_matrix(&generate_topology(11, 32, 500.0, 2000.0)?, &params, 12)?;
    let config = AllocationConfig {
        r_req_bps: 5.0e5,
        ..Default::default()
    };
    println!("variant          EE (bit/J)   sum rate    tx power   groups  outage");
    for variant in Variant::ALL {
        let out = baseline_pipeline(variant, &channel, link, &config, 5)?;
        println!(
            "{:<15} {:>11.4e} {:>10.4e} {:>10.4e} {:>7} {:>7}",
            variant.name(),
            out.energy.ee_bits_per_joule,
            out.energy.sum_rate_bps,
            out.energy.total_tx_power_w,
            out.clusters.k,
            out.trace.outage_users.len()
        );
    }
    Ok(())
}
