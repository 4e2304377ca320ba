//! The allocation pipeline: grouping, mean-gain subcarrier assignment under
//! fixed power, then energy-efficiency power refinement. Also the grouping
//! baselines used for comparison curves.

mod power;
mod subcarrier;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::noma::{
    compute_rates, dbm_to_w, energy_efficiency, DecodeOrder, EnergyReport, Link, OrderBy,
    PowerAllocation, RateReport, SubcarrierAllocation, DEFAULT_CIRCUIT_POWER_DBM, DEFAULT_P_MAX_W,
};
use crate::spectral::{
    cluster_count, kmeans, rebalance_clusters, similarity_matrix, spectral_clustering,
    user_features, ClusterAssignment,
};

pub use power::{
    check_feasible, dinkelbach_power_allocation, equal_power_init, evaluate_ee, golden_section_max,
    min_power_feasible, FeasiblePoint, OptimizationTrace, RATE_TOLERANCE,
};
pub use subcarrier::{assign_subcarriers, clusters_by_mean_gain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocationConfig {
    pub max_group_size: usize,
    pub p_max_w: f64,
    /// Rate floor applied to every user.
    pub r_req_bps: f64,
    /// Static power per scheduled user.
    pub circuit_power_w: f64,
    pub dinkelbach_tol: f64,
    pub dinkelbach_max_iter: usize,
    pub inner_max_sweeps: usize,
    /// Phase-1 sweeps stop once no user's total power moves by more than this
    /// many watts (and every floor is met).
    pub inner_tol: f64,
    pub order_by: OrderBy,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        Self {
            max_group_size: 4,
            p_max_w: DEFAULT_P_MAX_W,
            r_req_bps: 0.0,
            circuit_power_w: dbm_to_w(DEFAULT_CIRCUIT_POWER_DBM),
            dinkelbach_tol: 1e-6,
            dinkelbach_max_iter: 50,
            inner_max_sweeps: 200,
            inner_tol: 1e-9,
            order_by: OrderBy::Gain,
        }
    }
}

impl AllocationConfig {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.max_group_size == 0 {
            return Err(("max_group_size", "must be >= 1".into()));
        }
        for (name, v) in [
            ("p_max_w", self.p_max_w),
            ("dinkelbach_tol", self.dinkelbach_tol),
            ("inner_tol", self.inner_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err((name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("r_req_bps", self.r_req_bps),
            ("circuit_power_w", self.circuit_power_w),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err((name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.dinkelbach_max_iter == 0 {
            return Err(("dinkelbach_max_iter", "must be >= 1".into()));
        }
        if self.inner_max_sweeps == 0 {
            return Err(("inner_max_sweeps", "must be >= 1".into()));
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        self.validate()
            .map_err(|(f, m)| Error::param(format!("{f}: {m}")))
    }
}

/// User grouping strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Spectral,
    Kmeans,
    RandomClusters,
    Oma,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Spectral,
        Variant::Kmeans,
        Variant::RandomClusters,
        Variant::Oma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Spectral => "spectral",
            Variant::Kmeans => "kmeans",
            Variant::RandomClusters => "random_clusters",
            Variant::Oma => "oma",
        }
    }

    /// Stable numeric code used in seed derivation.
    pub fn code(self) -> u64 {
        match self {
            Variant::Spectral => 0,
            Variant::Kmeans => 1,
            Variant::RandomClusters => 2,
            Variant::Oma => 3,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub clusters: ClusterAssignment,
    pub allocation: SubcarrierAllocation,
    pub powers: PowerAllocation,
    pub rates: RateReport,
    pub energy: EnergyReport,
    pub trace: OptimizationTrace,
    pub decode_order: DecodeOrder,
}

/// Spectral grouping pipeline.
pub fn run_pipeline(
    channel: &ChannelMatrix,
    link: Link,
    config: &AllocationConfig,
    seed: u64,
) -> Result<PipelineOutput> {
    baseline_pipeline(Variant::Spectral, channel, link, config, seed)
}

fn group_users(
    variant: Variant,
    channel: &ChannelMatrix,
    cap: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    let n = channel.n_users();
    let k = cluster_count(n, cap);
    match variant {
        Variant::Spectral => {
            let features = user_features(channel);
            let graph = similarity_matrix(&features, None)?;
            let sc = spectral_clustering(&graph, k, seed)?;
            rebalance_clusters(&sc.assignment, &sc.embedding, cap)
        }
        Variant::Kmeans => {
            let features = user_features(channel);
            let km = kmeans(&features, k, seed)?;
            let a = ClusterAssignment {
                labels: km.labels,
                k,
                inertia: km.inertia,
            };
            rebalance_clusters(&a, &features, cap)
        }
        Variant::RandomClusters => {
            // uniformly random balanced partition: shuffled users dealt round-robin
            let mut users: Vec<usize> = (0..n).collect();
            users.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut labels = vec![0; n];
            for (i, &u) in users.iter().enumerate() {
                labels[u] = i % k;
            }
            Ok(ClusterAssignment {
                labels,
                k,
                inertia: 0.0,
            })
        }
        Variant::Oma => Ok(ClusterAssignment {
            labels: (0..n).collect(),
            k: n,
            inertia: 0.0,
        }),
    }
}

/// OMA schedule: subcarrier `s` goes to the `(s mod n)`-th strongest user by mean gain.
pub fn oma_allocation(channel: &ChannelMatrix, n_sc: usize) -> Result<SubcarrierAllocation> {
    let n = channel.n_users();
    let mut by_gain: Vec<usize> = (0..n).collect();
    by_gain.sort_by(|&a, &b| {
        channel.mean_gain[b]
            .total_cmp(&channel.mean_gain[a])
            .then(a.cmp(&b))
    });
    let users_on = (0..n_sc).map(|s| vec![by_gain[s % n]]).collect();
    SubcarrierAllocation::from_users_on(n, users_on)
}

/// Full pipeline with the chosen grouping strategy: grouping → subcarrier
/// assignment → minimum-power feasibility → Dinkelbach refinement.
///
/// Dinkelbach starts from the phase-1 point. If the result is still below the
/// EE of the equal full-budget split and that split meets every rate floor, a
/// second run starts from the split and the better of the two is kept.
pub fn baseline_pipeline(
    variant: Variant,
    channel: &ChannelMatrix,
    link: Link,
    config: &AllocationConfig,
    seed: u64,
) -> Result<PipelineOutput> {
    config.check()?;
    let n = channel.n_users();
    if n == 0 {
        return Err(Error::param("pipeline needs at least one user"));
    }
    let n_sc = channel.n_subcarriers();
    let cap = config.max_group_size;

    let clusters = group_users(variant, channel, cap, seed)?;
    let allocation = match variant {
        Variant::Oma => oma_allocation(channel, n_sc)?,
        _ => assign_subcarriers(&clusters, channel, n_sc)?,
    };

    let gain_order = DecodeOrder::new(&allocation, channel, OrderBy::Gain, None);
    let phase1 = min_power_feasible(&allocation, channel, config, link, &gain_order)?;
    let decode_order = match config.order_by {
        OrderBy::Gain => gain_order,
        OrderBy::ReceivedPower => {
            let equal = equal_power_init(&allocation, config.p_max_w);
            DecodeOrder::new(&allocation, channel, OrderBy::ReceivedPower, Some(&equal))
        }
    };
    let phase1 = if config.order_by == OrderBy::Gain {
        phase1
    } else {
        min_power_feasible(&allocation, channel, config, link, &decode_order)?
    };

    let (mut powers, mut trace) =
        dinkelbach_power_allocation(&allocation, channel, config, link, &decode_order, &phase1)?;
    let equal = FeasiblePoint {
        powers: equal_power_init(&allocation, config.p_max_w),
        outage: phase1.outage.clone(),
    };
    let ee_of = |p: &PowerAllocation| {
        evaluate_ee(
            &allocation,
            channel,
            p,
            link,
            &decode_order,
            config.circuit_power_w,
        )
    };
    if ee_of(&powers) < ee_of(&equal.powers)
        && check_feasible(&allocation, channel, config, link, &decode_order, &equal).is_ok()
    {
        let (p, t) =
            dinkelbach_power_allocation(&allocation, channel, config, link, &decode_order, &equal)?;
        if ee_of(&p) > ee_of(&powers) {
            (powers, trace) = (p, t);
        }
    }
    let rates = compute_rates(&allocation, channel, &powers, link, &decode_order);
    let energy = energy_efficiency(
        &rates,
        &powers,
        config.circuit_power_w,
        allocation.n_scheduled(),
    );
    Ok(PipelineOutput {
        clusters,
        allocation,
        powers,
        rates,
        energy,
        trace,
        decode_order,
    })
}

#[cfg(test)]
mod tests;
