//! Uplink NOMA with successive interference cancellation.
//!
//! On each subcarrier the receiver decodes the strongest user first; a user
//! sees interference only from the users decoded after it.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_P_MAX_W: f64 = 0.2;
pub const DEFAULT_CIRCUIT_POWER_DBM: f64 = 5.0;

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Noise power and bandwidth of one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub noise_w: f64,
    pub bandwidth_hz: f64,
}

impl Link {
    /// `B·log2(1 + sinr)`.
    #[inline]
    pub fn rate(&self, sinr: f64) -> f64 {
        self.bandwidth_hz * sinr.ln_1p() / std::f64::consts::LN_2
    }

    /// Smallest SINR reaching `rate_bps`.
    #[inline]
    pub fn sinr_for(&self, rate_bps: f64) -> f64 {
        (rate_bps / self.bandwidth_hz * std::f64::consts::LN_2).exp_m1()
    }
}

/// Which users share which subcarriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcarrierAllocation {
    /// Ascending user indices per subcarrier.
    pub users_on: Vec<Vec<usize>>,
    /// Ascending subcarrier indices per user.
    pub subcarriers_of: Vec<Vec<usize>>,
}

impl SubcarrierAllocation {
    pub fn from_users_on(n_users: usize, mut users_on: Vec<Vec<usize>>) -> Result<Self> {
        let mut subcarriers_of = vec![Vec::new(); n_users];
        for (s, users) in users_on.iter_mut().enumerate() {
            users.sort_unstable();
            if users.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("subcarrier {s} lists a user twice")));
            }
            for &u in users.iter() {
                if u >= n_users {
                    return Err(Error::param(format!(
                        "subcarrier {s} lists unknown user {u}"
                    )));
                }
                subcarriers_of[u].push(s);
            }
        }
        Ok(Self {
            users_on,
            subcarriers_of,
        })
    }

    pub fn n_users(&self) -> usize {
        self.subcarriers_of.len()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.users_on.len()
    }

    pub fn is_scheduled(&self, u: usize) -> bool {
        !self.subcarriers_of[u].is_empty()
    }

    pub fn n_scheduled(&self) -> usize {
        self.subcarriers_of.iter().filter(|s| !s.is_empty()).count()
    }

    pub fn max_group(&self) -> usize {
        self.users_on.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks map consistency and the group-size cap.
    pub fn validate(&self, max_group_size: usize) -> Result<()> {
        for (s, users) in self.users_on.iter().enumerate() {
            if users.len() > max_group_size {
                return Err(Error::param(format!(
                    "subcarrier {s} carries {} users, cap is {max_group_size}",
                    users.len()
                )));
            }
            for &u in users {
                if !self.subcarriers_of[u].contains(&s) {
                    return Err(Error::param(format!("user {u} missing subcarrier {s}")));
                }
            }
        }
        for (u, scs) in self.subcarriers_of.iter().enumerate() {
            for &s in scs {
                if !self.users_on[s].contains(&u) {
                    return Err(Error::param(format!("subcarrier {s} missing user {u}")));
                }
            }
        }
        Ok(())
    }
}

/// Transmit power per (user, subcarrier).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p: Array2<f64>,
    pub p_max_w: f64,
}

impl PowerAllocation {
    pub fn zeros(n_users: usize, n_subcarriers: usize, p_max_w: f64) -> Self {
        Self {
            p: Array2::zeros((n_users, n_subcarriers)),
            p_max_w,
        }
    }

    pub fn user_total(&self, u: usize) -> f64 {
        self.p.row(u).sum()
    }

    pub fn total(&self) -> f64 {
        self.p.sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub r: Array2<f64>,
    pub user_rate: Vec<f64>,
    pub sum_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub sum_rate_bps: f64,
    pub total_tx_power_w: f64,
    pub total_circuit_power_w: f64,
    pub ee_bits_per_joule: f64,
    pub circuit_power_w: f64,
    pub n_active: usize,
}

/// How the SIC decoding order is fixed before power optimisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderBy {
    /// Channel gain, descending.
    #[default]
    Gain,
    /// Received power `p·g` of the starting allocation, descending.
    ReceivedPower,
}

/// Decoding permutation: descending key, ties broken by ascending user index.
pub fn sic_order(user_gains: &[(usize, f64)]) -> Vec<usize> {
    let mut v = user_gains.to_vec();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(u, _)| u).collect()
}

/// Fixed per-subcarrier decoding order (user indices, first decoded first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOrder {
    pub per_subcarrier: Vec<Vec<usize>>,
}

impl DecodeOrder {
    pub fn new(
        alloc: &SubcarrierAllocation,
        channel: &ChannelMatrix,
        order_by: OrderBy,
        powers: Option<&PowerAllocation>,
    ) -> Self {
        let per_subcarrier = alloc
            .users_on
            .iter()
            .enumerate()
            .map(|(s, users)| {
                let keyed: Vec<(usize, f64)> = users
                    .iter()
                    .map(|&u| {
                        let g = channel.gains[[u, s]];
                        let key = match (order_by, powers) {
                            (OrderBy::ReceivedPower, Some(p)) => p.p[[u, s]] * g,
                            _ => g,
                        };
                        (u, key)
                    })
                    .collect();
                sic_order(&keyed)
            })
            .collect();
        Self { per_subcarrier }
    }
}

/// Rates for users decoded in `order` (positions into the slices); returned
/// aligned with the input slices.
pub fn rates_in_order(order: &[usize], gains: &[f64], powers: &[f64], link: Link) -> Vec<f64> {
    let mut rates = vec![0.0; gains.len()];
    let mut interference = 0.0;
    // walk from the last decoded user backwards, accumulating its interference
    for &i in order.iter().rev() {
        let rx = powers[i] * gains[i];
        rates[i] = link.rate(rx / (interference + link.noise_w));
        interference += rx;
    }
    rates
}

/// Per-user SIC rates on one subcarrier, aligned with `users_on_s`.
pub fn subcarrier_rates(
    users_on_s: &[usize],
    gains: &[f64],
    powers: &[f64],
    noise_w: f64,
    bandwidth_hz: f64,
) -> Vec<f64> {
    let keyed: Vec<(usize, f64)> = users_on_s
        .iter()
        .copied()
        .zip(gains.iter().copied())
        .collect();
    let by_user = sic_order(&keyed);
    let order: Vec<usize> = by_user
        .iter()
        .map(|u| users_on_s.iter().position(|x| x == u).unwrap())
        .collect();
    rates_in_order(
        &order,
        gains,
        powers,
        Link {
            noise_w,
            bandwidth_hz,
        },
    )
}

/// Multiple-access sum capacity `B·log2(1 + Σ p·g / noise)`.
pub fn sum_rate_capacity(gains: &[f64], powers: &[f64], noise_w: f64, bandwidth_hz: f64) -> f64 {
    let rx: f64 = gains.iter().zip(powers).map(|(g, p)| g * p).sum();
    Link {
        noise_w,
        bandwidth_hz,
    }
    .rate(rx / noise_w)
}

/// All per-pair rates for an allocation under a fixed decoding order.
pub fn compute_rates(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    powers: &PowerAllocation,
    link: Link,
    order: &DecodeOrder,
) -> RateReport {
    let (n, n_sc) = (alloc.n_users(), alloc.n_subcarriers());
    let mut r = Array2::zeros((n, n_sc));
    for (s, users) in order.per_subcarrier.iter().enumerate() {
        let mut interference = 0.0;
        for &u in users.iter().rev() {
            let rx = powers.p[[u, s]] * channel.gains[[u, s]];
            r[[u, s]] = link.rate(rx / (interference + link.noise_w));
            interference += rx;
        }
    }
    let user_rate: Vec<f64> = r.rows().into_iter().map(|row| row.sum()).collect();
    let sum_rate = user_rate.iter().sum();
    RateReport {
        r,
        user_rate,
        sum_rate,
    }
}

/// Global energy efficiency: sum rate over transmit plus per-user circuit power.
pub fn energy_efficiency(
    rates: &RateReport,
    powers: &PowerAllocation,
    circuit_w: f64,
    n_active: usize,
) -> EnergyReport {
    let tx = powers.total();
    let circuit = n_active as f64 * circuit_w;
    let ee = if n_active == 0 {
        0.0
    } else {
        rates.sum_rate / (tx + circuit)
    };
    EnergyReport {
        sum_rate_bps: rates.sum_rate,
        total_tx_power_w: tx,
        total_circuit_power_w: circuit,
        ee_bits_per_joule: ee,
        circuit_power_w: circuit_w,
        n_active,
    }
}

/// Equal split of the full budget across each user's subcarriers.
pub fn full_budget_split(alloc: &SubcarrierAllocation, p_max_w: f64) -> PowerAllocation {
    let mut p = PowerAllocation::zeros(alloc.n_users(), alloc.n_subcarriers(), p_max_w);
    for (u, scs) in alloc.subcarriers_of.iter().enumerate() {
        for &s in scs {
            p.p[[u, s]] = p_max_w / scs.len() as f64;
        }
    }
    p
}

/// Whether each user reaches `r_req_bps` when everyone transmits its full
/// budget split equally (gain-ordered SIC). Unscheduled users pass only a zero requirement.
pub fn feasibility_check(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    p_max_w: f64,
    r_req_bps: f64,
    link: Link,
) -> Vec<bool> {
    let powers = full_budget_split(alloc, p_max_w);
    let order = DecodeOrder::new(alloc, channel, OrderBy::Gain, None);
    let rates = compute_rates(alloc, channel, &powers, link, &order);
    rates.user_rate.iter().map(|&r| r >= r_req_bps).collect()
}
