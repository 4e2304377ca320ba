//! EE against the rate floor for several user counts, as CSV on stdout.
//!
//! `cargo run --release --example ee_sweep -- [drops]`

use uav_noma::harness::{log_space, run_sweep, sweep_csv, Execution, ExperimentConfig};

fn main() -> uav_noma::Result<()> {
    let drops = std::env::args()
        .nth(1)
        .map_or(Ok(10), |a| a.parse())
        .expect("drops must be an integer");
    let config = ExperimentConfig {
        n_drops: drops,
        r_req_sweep_bps: log_space(1e5, 4e6, 8),
        ..Default::default()
    };
    let rows = run_sweep(&config, Execution::Parallel)?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}
