//! Spectral grouping of one drop, with the cluster-size cap applied.

use uav_noma::channel::{draw_channel_matrix, ChannelParams};
use uav_noma::spectral::{
    cluster_count, normalized_laplacian, rebalance_clusters, similarity_matrix,
    smallest_eigenpairs, spectral_clustering, user_features,
};
use uav_noma::topology::generate_topology;

fn main() -> uav_noma::Result<()> {
    let (n_users, cap) = (12, 4);
    let params = ChannelParams {
        n_subcarriers: 16,
        ..Default::default()
    };
    let topology = generate_topology(7, n_users, 500.0, 2000.0)?;
    let channel = draw_channel_matrix(&topology, &params, 8)?;

    let features = user_features(&channel);
    let graph = similarity_matrix(&features, None)?;
    let k = cluster_count(n_users, cap);
    let (values, _) = smallest_eigenpairs(&normalized_laplacian(&graph), k + 1)?;
    println!("kernel width {:.2} dB, k = {k}", graph.sigma);
    println!("smallest Laplacian eigenvalues: {values:.4?}");

    let raw = spectral_clustering(&graph, k, 1)?;
    let capped = rebalance_clusters(&raw.assignment, &raw.embedding, cap)?;
    println!(
        "sizes before cap: {:?}, after: {:?}",
        raw.assignment.sizes(),
        capped.sizes()
    );
    for (c, members) in capped.members().iter().enumerate() {
        let gains: Vec<String> = members
            .iter()
            .map(|&u| format!("{:.1}", 10.0 * channel.mean_gain[u].log10()))
            .collect();
        println!(
            "group {c}: users {members:?}, mean gain dB [{}]",
            gains.join(", ")
        );
    }
    Ok(())
}
