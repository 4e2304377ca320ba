use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::noma::SubcarrierAllocation;
use crate::spectral::ClusterAssignment;

/// Clusters ordered by the mean of their members' mean gains, strongest first
/// (ties to the lower cluster index).
pub fn clusters_by_mean_gain(members: &[Vec<usize>], channel: &ChannelMatrix) -> Vec<usize> {
    let mean: Vec<f64> = members
        .iter()
        .map(|m| m.iter().map(|&u| channel.mean_gain[u]).sum::<f64>() / m.len().max(1) as f64)
        .collect();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| mean[b].total_cmp(&mean[a]).then(a.cmp(&b)));
    order
}

/// Mean-gain subcarrier assignment under fixed power.
///
/// Every cluster gets `n_sc / k` subcarriers and the `n_sc % k` leftovers go
/// one each to the strongest clusters. Clusters then pick, strongest first,
/// the still-free subcarriers on which their members' average gain is
/// highest. All members of a cluster share all of its subcarriers.
pub fn assign_subcarriers(
    clusters: &ClusterAssignment,
    channel: &ChannelMatrix,
    n_sc: usize,
) -> Result<SubcarrierAllocation> {
    let k = clusters.k;
    if n_sc < k {
        return Err(Error::Infeasible(format!(
            "{n_sc} subcarriers cannot serve {k} clusters"
        )));
    }
    if channel.n_subcarriers() < n_sc {
        return Err(Error::param(format!(
            "channel has {} subcarriers, {n_sc} requested",
            channel.n_subcarriers()
        )));
    }
    let members = clusters.members();
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(Error::param(format!("cluster {c} is empty")));
    }
    let order = clusters_by_mean_gain(&members, channel);
    let base = n_sc / k;
    let extra = n_sc % k;

    let mut free = vec![true; n_sc];
    let mut users_on = vec![Vec::new(); n_sc];
    for (rank, &c) in order.iter().enumerate() {
        let quota = base + usize::from(rank < extra);
        let avg: Vec<f64> = (0..n_sc)
            .map(|s| {
                members[c]
                    .iter()
                    .map(|&u| channel.gains[[u, s]])
                    .sum::<f64>()
                    / members[c].len() as f64
            })
            .collect();
        let mut candidates: Vec<usize> = (0..n_sc).filter(|&s| free[s]).collect();
        candidates.sort_by(|&a, &b| avg[b].total_cmp(&avg[a]).then(a.cmp(&b)));
        for &s in candidates.iter().take(quota) {
            free[s] = false;
            users_on[s] = members[c].clone();
        }
    }
    SubcarrierAllocation::from_users_on(clusters.labels.len(), users_on)
}
