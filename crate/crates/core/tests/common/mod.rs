#![allow(dead_code)]

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use uav_noma::channel::{draw_channel_matrix, noise_power_w, ChannelMatrix, ChannelParams};
use uav_noma::noma::Link;
use uav_noma::topology::generate_topology;

pub const BLOB_SIZE: usize = 6;

/// Two clouds of gain profiles in dB, 20 dB apart, users `0..BLOB_SIZE` in the first.
pub fn planted_blobs(seed: u64, dims: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 2.0).unwrap();
    Array2::from_shape_fn((2 * BLOB_SIZE, dims), |(u, _)| {
        let centre = if u < BLOB_SIZE { -90.0 } else { -110.0 };
        centre + jitter.sample(&mut rng)
    })
}

pub fn planted_partition() -> Vec<Vec<usize>> {
    vec![
        (0..BLOB_SIZE).collect(),
        (BLOB_SIZE..2 * BLOB_SIZE).collect(),
    ]
}

/// Normalized cut of the bipartition given by `mask`.
pub fn ncut(w: &Array2<f64>, mask: u64) -> f64 {
    let n = w.nrows();
    let side = |i: usize| mask >> i & 1 == 1;
    let (mut cut, mut vol_a, mut vol_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let deg: f64 = w.row(i).sum();
        if side(i) {
            vol_a += deg;
        } else {
            vol_b += deg;
        }
        for j in 0..n {
            if side(i) && !side(j) {
                cut += w[[i, j]];
            }
        }
    }
    cut / vol_a + cut / vol_b
}

/// Bipartition minimising the normalized cut, by enumeration.
pub fn min_ncut_partition(w: &Array2<f64>) -> Vec<Vec<usize>> {
    let n = w.nrows();
    assert!(n <= 20);
    // vertex n−1 fixed on side B removes mirror images
    let best = (1u64..(1 << (n - 1)))
        .map(|m| (ncut(w, m), m))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap()
        .1;
    let mut parts = vec![
        (0..n).filter(|&i| best >> i & 1 == 1).collect::<Vec<_>>(),
        (0..n).filter(|&i| best >> i & 1 == 0).collect(),
    ];
    parts.sort();
    parts
}

pub fn random_drop(seed: u64, n_users: usize, n_sc: usize) -> (ChannelMatrix, Link) {
    let params = ChannelParams {
        n_subcarriers: n_sc,
        total_bandwidth_hz: 1.5625e5 * n_sc as f64,
        ..Default::default()
    };
    let topo = generate_topology(seed, n_users, 500.0, 2000.0).unwrap();
    let channel = draw_channel_matrix(&topo, &params, seed ^ 0x9E37_79B9).unwrap();
    (
        channel,
        Link {
            noise_w: noise_power_w(&params),
            bandwidth_hz: params.subcarrier_bandwidth_hz(),
        },
    )
}

pub fn example_config_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/example.json")
}

pub fn golden_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example_sweep.csv")
}
