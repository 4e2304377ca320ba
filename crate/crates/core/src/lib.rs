//! Energy-efficient uplink NOMA through a UAV relay.
//!
//! Ground users in a 500 m cell reach a relay hovering at 2 km. Users are
//! grouped by spectral clustering of their per-subcarrier channel profiles,
//! each group receives subcarriers by mean channel gain, and transmit powers
//! are refined by Dinkelbach's method to maximise bits per Joule under
//! per-user rate floors and a 0.2 W budget.
//!
//! Module map:
//! - [`topology`]: user drop and relay position
//! - [`channel`]: air-to-ground path loss, LoS sigmoid and fading
//! - [`spectral`]: similarity graph, normalised Laplacian, eigensolver, k-means, capacity rebalancing
//! - [`noma`]: SIC rates, sum-capacity identity, energy efficiency
//! - [`allocator`]: subcarrier assignment, power control, pipeline and baselines
//! - [`oracle`]: exhaustive references for tiny instances
//! - [`harness`]: configs, sweeps, CSV

pub mod allocator;
pub mod channel;
pub mod error;
pub mod harness;
pub mod noma;
pub mod oracle;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
