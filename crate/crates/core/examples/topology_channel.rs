//! One drop: user positions under the UAV and the resulting channel gains.

use uav_noma::channel::{
    draw_channel_matrix, los_probability, noise_power_w, path_loss_db, ChannelParams,
};
use uav_noma::topology::{elevation_angle_deg, generate_topology, slant_distance};

fn main() -> uav_noma::Result<()> {
    let params = ChannelParams {
        n_subcarriers: 16,
        ..Default::default()
    };
    let topology = generate_topology(42, 8, 500.0, 2000.0)?;
    let channel = draw_channel_matrix(&topology, &params, 43)?;
    let noise = noise_power_w(&params);
    println!("noise per subcarrier: {noise:.3e} W");
    println!("user        x         y   elev(deg)  P(LoS)  LoS  loss(dB)  mean gain   mean SNR @0.2 W (dB)");
    for (u, &pos) in topology.users.iter().enumerate() {
        let theta = elevation_angle_deg(pos, &topology.uav);
        let p_los = los_probability(theta, params.atg_a, params.atg_b)?;
        let excess = if channel.los_flags[u] {
            params.eta_los_db
        } else {
            params.eta_nlos_db
        };
        let loss = path_loss_db(
            slant_distance(pos, &topology.uav),
            params.carrier_hz,
            excess,
        )?;
        let g = channel.mean_gain[u];
        println!(
            "{u:>4} {:>9.1} {:>9.1} {theta:>10.2} {p_los:>7.3} {:>4} {loss:>9.2} {g:>10.3e} {:>10.1}",
            pos.0,
            pos.1,
            if channel.los_flags[u] { "yes" } else { "no" },
            10.0 * (0.2 * g / noise).log10()
        );
    }
    Ok(())
}
