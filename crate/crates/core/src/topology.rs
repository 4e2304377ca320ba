//! Tier-1 geometry: users dropped uniformly in a disk, one UAV relay hovering
//! above the disk centre.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_RADIUS_M: f64 = 500.0;
pub const DEFAULT_UAV_ALTITUDE_M: f64 = 2000.0;

/// Position of the hovering relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavPosition {
    pub x_m: f64,
    pub y_m: f64,
    pub altitude_m: f64,
}

/// Ground user positions and the relay position for one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub users: Vec<(f64, f64)>,
    pub uav: UavPosition,
    pub radius_m: f64,
    pub seed: u64,
}

impl Topology {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }
}

/// Drops `n_users` i.i.d. uniform points in the disk of `radius_m` and places
/// the relay at `(0, 0, uav_altitude_m)`.
///
/// Randomness comes from ChaCha8 seeded with `seed` on stream 0; the channel
/// module uses the other streams of the same seed.
pub fn generate_topology(
    seed: u64,
    n_users: usize,
    radius_m: f64,
    uav_altitude_m: f64,
) -> Result<Topology> {
    if !(radius_m.is_finite() && radius_m > 0.0) {
        return Err(Error::param(format!(
            "radius_m must be finite and > 0, got {radius_m}"
        )));
    }
    if !(uav_altitude_m.is_finite() && uav_altitude_m > 0.0) {
        return Err(Error::param(format!(
            "uav_altitude_m must be finite and > 0, got {uav_altitude_m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = (0..n_users)
        .map(|_| {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let r = radius_m * u1.sqrt();
            let theta = std::f64::consts::TAU * u2;
            (r * theta.cos(), r * theta.sin())
        })
        .collect();
    Ok(Topology {
        users,
        uav: UavPosition {
            x_m: 0.0,
            y_m: 0.0,
            altitude_m: uav_altitude_m,
        },
        radius_m,
        seed,
    })
}

fn horizontal_distance(user: (f64, f64), uav: &UavPosition) -> f64 {
    (user.0 - uav.x_m).hypot(user.1 - uav.y_m)
}

/// Euclidean distance between a ground user and the relay, in metres.
pub fn slant_distance(user: (f64, f64), uav: &UavPosition) -> f64 {
    horizontal_distance(user, uav).hypot(uav.altitude_m)
}

/// Elevation of the relay as seen from the user, in degrees.
pub fn elevation_angle_deg(user: (f64, f64), uav: &UavPosition) -> f64 {
    uav.altitude_m
        .atan2(horizontal_distance(user, uav))
        .to_degrees()
}
