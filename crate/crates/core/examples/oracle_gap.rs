//! Pipeline against the exhaustive grouping and grid-power oracle on tiny
//! instances (4 users, 2 subcarriers, groups of 2, 0.01 W grid).

use uav_noma::harness::{oracle_compare, ExperimentConfig};

fn main() -> uav_noma::Result<()> {
    let config = ExperimentConfig {
        n_drops: 20,
        ..Default::default()
    };
    let rows = oracle_compare(&config)?;
    println!("instance  continuous EE   snapped EE    oracle EE   snapped/oracle");
    for row in &rows {
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!(
            "{:>8} {:>14.4e} {:>12} {:>12} {:>16}",
            row.instance,
            row.heuristic_ee,
            show(row.snapped_ee),
            show(row.oracle_ee),
            row.ratio().map_or("-".to_string(), |r| format!("{r:.4}"))
        );
    }
    Ok(())
}
