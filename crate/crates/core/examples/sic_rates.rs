//! Uplink SIC on one subcarrier: every decoding order gives the same sum
//! rate, but the split between users changes.

use uav_noma::noma::{rates_in_order, subcarrier_rates, sum_rate_capacity, Link};

fn main() {
    let link = Link {
        noise_w: 6.2e-16,
        bandwidth_hz: 1.5625e5,
    };
    let gains = [4.0e-11, 9.0e-12, 1.5e-12];
    let powers = [0.02, 0.05, 0.2];
    let capacity = sum_rate_capacity(&gains, &powers, link.noise_w, link.bandwidth_hz);
    println!("sum capacity {capacity:.6e} bit/s");
    for order in [[0, 1, 2], [2, 1, 0], [1, 0, 2]] {
        let rates = rates_in_order(&order, &gains, &powers, link);
        let sum: f64 = rates.iter().sum();
        println!(
            "order {order:?}: rates {:.4e} {:.4e} {:.4e}, sum {sum:.6e}",
            rates[0], rates[1], rates[2]
        );
    }
    let strongest_first =
        subcarrier_rates(&[0, 1, 2], &gains, &powers, link.noise_w, link.bandwidth_hz);
    let shown: Vec<String> = strongest_first.iter().map(|r| format!("{r:.4e}")).collect();
    println!("gain order (strongest first): {}", shown.join(" "));
}
