//! Experiment harness: JSON configuration, Monte-Carlo sweeps over user count
//! and rate floor, CSV output and the oracle comparison table.

mod compare;
mod config;
mod csv;
pub mod seed;
mod sweep;

pub use compare::{
    compare_instance, oracle_compare, tiny_channel, OracleRow, GRID_STEP_W, TINY_GROUP_CAP,
    TINY_SUBCARRIERS, TINY_USERS,
};
pub use config::{load_config, log_space, ExperimentConfig, VariantSelection};
pub use csv::{oracle_csv, sci, sweep_csv, write_csv, ORACLE_HEADER, SWEEP_HEADER};
pub use sweep::{
    link_of, run_drop, run_drop_detailed, run_points, run_single_point, run_sweep, DropOutcome,
    Execution, SweepRow,
};
