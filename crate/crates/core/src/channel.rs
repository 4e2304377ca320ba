//! Air-to-ground channel between ground users and the hovering relay.
//!
//! Free-space path loss plus a LoS/NLoS excess loss picked by an
//! elevation-dependent sigmoid, times unit-mean small-scale fading drawn
//! independently on every subcarrier (Rician when LoS, Rayleigh otherwise).

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{elevation_angle_deg, slant_distance, Topology};

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub carrier_hz: f64,
    pub total_bandwidth_hz: f64,
    pub n_subcarriers: usize,
    pub noise_psd_dbm_hz: f64,
    /// Urban ATG sigmoid parameters.
    pub atg_a: f64,
    pub atg_b: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
    pub rician_k_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_hz: 2.0e9,
            total_bandwidth_hz: 2.0e7,
            n_subcarriers: 128,
            noise_psd_dbm_hz: -174.0,
            atg_a: 9.61,
            atg_b: 0.16,
            eta_los_db: 1.0,
            eta_nlos_db: 20.0,
            rician_k_db: 10.0,
        }
    }
}

impl ChannelParams {
    pub fn subcarrier_bandwidth_hz(&self) -> f64 {
        self.total_bandwidth_hz / self.n_subcarriers as f64
    }

    /// Checks the invariants, naming the offending field.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err((name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("carrier_hz", self.carrier_hz)?;
        positive("total_bandwidth_hz", self.total_bandwidth_hz)?;
        positive("atg_a", self.atg_a)?;
        if self.n_subcarriers == 0 {
            return Err(("n_subcarriers", "must be >= 1".into()));
        }
        if !(self.atg_b.is_finite() && self.atg_b >= 0.0) {
            return Err((
                "atg_b",
                format!("must be finite and >= 0, got {}", self.atg_b),
            ));
        }
        for (name, v) in [
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("eta_los_db", self.eta_los_db),
            ("eta_nlos_db", self.eta_nlos_db),
            ("rician_k_db", self.rician_k_db),
        ] {
            if !v.is_finite() {
                return Err((name, format!("must be finite, got {v}")));
            }
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        self.validate()
            .map_err(|(field, msg)| Error::param(format!("{field}: {msg}")))
    }
}

/// Linear power gains for every (user, subcarrier) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    /// `n_users × n_subcarriers`, dimensionless, strictly positive.
    pub gains: Array2<f64>,
    pub los_flags: Vec<bool>,
    pub mean_gain: Vec<f64>,
}

impl ChannelMatrix {
    /// Wraps a gain matrix, computing per-user mean gains. LoS flags default to `true`.
    pub fn from_gains(gains: Array2<f64>) -> Result<Self> {
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::param(format!(
                "channel gains must be finite and > 0, found {g}"
            )));
        }
        let n_sc = gains.ncols();
        if n_sc == 0 {
            return Err(Error::param("channel matrix needs at least one subcarrier"));
        }
        let mean_gain = gains
            .rows()
            .into_iter()
            .map(|row| row.sum() / n_sc as f64)
            .collect();
        let los_flags = vec![true; gains.nrows()];
        Ok(Self {
            gains,
            los_flags,
            mean_gain,
        })
    }

    pub fn n_users(&self) -> usize {
        self.gains.nrows()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.gains.ncols()
    }
}

/// Whether small-scale fading is drawn or pinned to one (test hook).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    #[default]
    Random,
    Unit,
}

/// LoS probability `1 / (1 + a·exp(−b·(θ − a)))` for elevation `θ` in degrees.
pub fn los_probability(theta_deg: f64, a: f64, b: f64) -> Result<f64> {
    if !(theta_deg > 0.0 && theta_deg <= 90.0) {
        return Err(Error::param(format!(
            "elevation must lie in (0, 90], got {theta_deg}"
        )));
    }
    if !(a > 0.0 && b >= 0.0) {
        return Err(Error::param(format!(
            "ATG parameters need a > 0, b >= 0 (a={a}, b={b})"
        )));
    }
    Ok(1.0 / (1.0 + a * (-b * (theta_deg - a)).exp()))
}

/// Free-space path loss in dB plus a fixed excess.
pub fn path_loss_db(d_m: f64, f_hz: f64, excess_db: f64) -> Result<f64> {
    if !(d_m > 0.0 && d_m.is_finite()) {
        return Err(Error::param(format!("distance must be > 0, got {d_m}")));
    }
    if !(f_hz > 0.0 && f_hz.is_finite()) {
        return Err(Error::param(format!("frequency must be > 0, got {f_hz}")));
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * d_m * f_hz / SPEED_OF_LIGHT).log10() + excess_db)
}

/// Thermal noise power on one subcarrier, in watts.
pub fn noise_power_w(params: &ChannelParams) -> f64 {
    10f64.powf((params.noise_psd_dbm_hz - 30.0) / 10.0) * params.subcarrier_bandwidth_hz()
}

/// One unit-mean draw of `|h|²` with Rician factor `k_linear` (0 gives Rayleigh).
pub fn fading_power<R: Rng + ?Sized>(rng: &mut R, k_linear: f64) -> f64 {
    let los = (k_linear / (k_linear + 1.0)).sqrt();
    let scatter = (0.5 / (k_linear + 1.0)).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let (re, im) = (los + scatter * re, scatter * im);
    re * re + im * im
}

pub fn draw_channel_matrix(
    topology: &Topology,
    params: &ChannelParams,
    seed: u64,
) -> Result<ChannelMatrix> {
    draw_channel_matrix_with(topology, params, seed, Fading::Random)
}

/// Draws the gain matrix. User `u` consumes ChaCha8 stream `u + 1` of `seed`,
/// so rows are independent of each other and of the evaluation order.
pub fn draw_channel_matrix_with(
    topology: &Topology,
    params: &ChannelParams,
    seed: u64,
    fading: Fading,
) -> Result<ChannelMatrix> {
    params.check()?;
    let n_users = topology.n_users();
    let n_sc = params.n_subcarriers;
    let k_linear = 10f64.powf(params.rician_k_db / 10.0);
    let mut gains = Array2::zeros((n_users, n_sc));
    let mut los_flags = Vec::with_capacity(n_users);
    let mut mean_gain = Vec::with_capacity(n_users);

    for (u, &pos) in topology.users.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u as u64 + 1);
        let theta = elevation_angle_deg(pos, &topology.uav);
        let p_los = los_probability(theta, params.atg_a, params.atg_b)?;
        let los = rng.random::<f64>() < p_los;
        let excess = if los {
            params.eta_los_db
        } else {
            params.eta_nlos_db
        };
        let pl_db = path_loss_db(
            slant_distance(pos, &topology.uav),
            params.carrier_hz,
            excess,
        )?;
        let large_scale = 10f64.powf(-pl_db / 10.0);
        let k = if los { k_linear } else { 0.0 };

        let mut row = gains.row_mut(u);
        for g in row.iter_mut() {
            let h2 = match fading {
                Fading::Random => fading_power(&mut rng, k),
                Fading::Unit => 1.0,
            };
            // A zero draw has probability zero but would break the positivity invariant.
            *g = large_scale * h2.max(f64::MIN_POSITIVE);
        }
        mean_gain.push(row.sum() / n_sc as f64);
        los_flags.push(los);
    }
    Ok(ChannelMatrix {
        gains,
        los_flags,
        mean_gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::generate_topology;

    #[test]
    fn los_probability_values() {
        let p = los_probability(9.61, 9.61, 0.16).unwrap();
        assert!((p - 1.0 / 10.61).abs() < 1e-12);
        assert!((p - 0.094251).abs() < 1e-6);
        for theta in [1.0, 30.0, 90.0] {
            assert!((los_probability(theta, 5.0, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        }
        let p90 = los_probability(90.0, 9.61, 0.16).unwrap();
        let oracle = 1.0 / (1.0 + 9.61 * (-0.16f64 * 80.39).exp());
        assert!((p90 - oracle).abs() < 1e-15);
        assert!((p90 - 0.999975).abs() < 1e-6);
    }

    #[test]
    fn los_probability_rejects_bad_elevation() {
        assert!(los_probability(0.0, 9.61, 0.16).is_err());
        assert!(los_probability(90.5, 9.61, 0.16).is_err());
        assert!(los_probability(f64::NAN, 9.61, 0.16).is_err());
    }

    #[test]
    fn path_loss_values() {
        // 20·log10(4π·f/c) evaluated independently
        let fspl_1m = 20.0 * (4.0 * std::f64::consts::PI * 2e9 / 2.997_924_58e8).log10();
        let pl1 = path_loss_db(1.0, 2e9, 0.0).unwrap();
        assert!((pl1 - fspl_1m).abs() < 1e-12);
        assert!((pl1 - 38.466).abs() < 5e-3, "{pl1}");
        let pl2000 = path_loss_db(2000.0, 2e9, 0.0).unwrap();
        assert!((pl2000 - 104.487).abs() < 5e-3, "{pl2000}");
        assert!((pl2000 - (pl1 + 20.0 * 2000f64.log10())).abs() < 1e-10);
        let with_excess = path_loss_db(2000.0, 2e9, 20.0).unwrap();
        assert!((with_excess - pl2000 - 20.0).abs() < 1e-12);
        assert!(path_loss_db(0.0, 2e9, 0.0).is_err());
        assert!(path_loss_db(-3.0, 2e9, 0.0).is_err());
    }

    #[test]
    fn noise_power_values() {
        let p = ChannelParams::default();
        assert!((p.subcarrier_bandwidth_hz() - 156_250.0).abs() < 1e-9);
        let n = noise_power_w(&p);
        assert!((n / 6.2205e-16 - 1.0).abs() < 1e-4, "{n}");
        let double = ChannelParams {
            total_bandwidth_hz: 4.0e7,
            ..p.clone()
        };
        assert!((noise_power_w(&double) / n - 2.0).abs() < 1e-14);
        let quiet = ChannelParams {
            noise_psd_dbm_hz: -204.0,
            ..p
        };
        assert!((noise_power_w(&quiet) / 6.2205e-19 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn fading_is_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for k in [10.0, 0.0] {
            let mean = (0..100_000).map(|_| fading_power(&mut rng, k)).sum::<f64>() / 1e5;
            assert!((0.99..=1.01).contains(&mean), "K={k}: {mean}");
        }
    }

    #[test]
    fn channel_matrix_deterministic_and_positive() {
        let topo = generate_topology(5, 32, 500.0, 2000.0).unwrap();
        let p = ChannelParams::default();
        let a = draw_channel_matrix(&topo, &p, 17).unwrap();
        let b = draw_channel_matrix(&topo, &p, 17).unwrap();
        assert_eq!(a, b);
        assert!(a.gains.iter().all(|g| g.is_finite() && *g > 0.0));
        for (u, row) in a.gains.rows().into_iter().enumerate() {
            let mean = row.sum() / row.len() as f64;
            assert!((mean - a.mean_gain[u]).abs() <= 1e-12 * mean);
        }
    }

    #[test]
    fn positivity_fuzz() {
        let p = ChannelParams {
            n_subcarriers: 100,
            ..Default::default()
        };
        let mut count = 0;
        for seed in 0..10 {
            let topo = generate_topology(seed, 100, 500.0, 2000.0).unwrap();
            let m = draw_channel_matrix(&topo, &p, seed ^ 0xabc).unwrap();
            assert!(m.gains.iter().all(|g| g.is_finite() && *g > 0.0));
            count += m.gains.len();
        }
        assert_eq!(count, 100_000);
    }

    #[test]
    fn unit_fading_gain_decreases_with_distance() {
        let p = ChannelParams {
            eta_nlos_db: 1.0,
            n_subcarriers: 4,
            ..Default::default()
        };
        let topo = Topology {
            users: (0..50).map(|i| (i as f64 * 10.0, 0.0)).collect(),
            uav: crate::topology::UavPosition {
                x_m: 0.0,
                y_m: 0.0,
                altitude_m: 2000.0,
            },
            radius_m: 500.0,
            seed: 0,
        };
        let m = draw_channel_matrix_with(&topo, &p, 1, Fading::Unit).unwrap();
        for u in 1..50 {
            assert!(m.gains[[u, 0]] < m.gains[[u - 1, 0]]);
        }
    }

    #[test]
    fn rows_do_not_depend_on_other_users() {
        let p = ChannelParams {
            n_subcarriers: 8,
            ..Default::default()
        };
        let topo = generate_topology(2, 10, 500.0, 2000.0).unwrap();
        let full = draw_channel_matrix(&topo, &p, 4).unwrap();
        let head = Topology {
            users: topo.users[..3].to_vec(),
            ..topo.clone()
        };
        let part = draw_channel_matrix(&head, &p, 4).unwrap();
        assert_eq!(part.gains.row(2), full.gains.row(2));
    }

    #[test]
    fn from_gains_rejects_nonpositive() {
        assert!(ChannelMatrix::from_gains(Array2::from_elem((2, 2), 0.0)).is_err());
        assert!(ChannelMatrix::from_gains(Array2::from_elem((2, 2), 1.0)).is_ok());
    }

    proptest::proptest! {
        #[test]
        fn los_probability_monotone(a in 0.1f64..20.0, b in 0.001f64..1.0, t1 in 0.1f64..90.0, t2 in 0.1f64..90.0) {
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            proptest::prop_assert!(los_probability(lo, a, b).unwrap() <= los_probability(hi, a, b).unwrap());
        }
    }
}
