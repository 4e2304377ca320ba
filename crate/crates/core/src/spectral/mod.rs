//! User grouping by spectral clustering.
//!
//! Gaussian-kernel similarity graph over per-subcarrier gain profiles (dB),
//! symmetric normalised Laplacian, row-normalised embedding on its `k`
//! smallest eigenvectors, k-means on the embedded rows, then a capacity pass
//! that enforces the NOMA group-size cap.

pub mod eigen;
pub mod kmeans;

use ndarray::Array2;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};

pub use eigen::{smallest_eigenpairs, symmetric_eigen, SymmetricEigen};
pub use kmeans::{kmeans, KMeans};

/// Symmetric weights in `[0, 1]` with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub w: Array2<f64>,
    pub sigma: f64,
}

impl SimilarityGraph {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }
}

/// User → cluster labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    pub inertia: f64,
}

impl ClusterAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Members of every cluster, each list ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.k];
        for (u, &l) in self.labels.iter().enumerate() {
            m[l].push(u);
        }
        m
    }

    /// Canonical partition (label-free) for comparisons: groups sorted by first member.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = self
            .members()
            .into_iter()
            .filter(|g| !g.is_empty())
            .collect();
        groups.sort();
        groups
    }
}

/// Spectral clustering output together with the embedded rows it clustered.
#[derive(Debug, Clone)]
pub struct SpectralClustering {
    pub assignment: ClusterAssignment,
    pub embedding: Array2<f64>,
}

/// Per-subcarrier gains in dB, one row per user.
pub fn user_features(channel: &ChannelMatrix) -> Array2<f64> {
    channel.gains.mapv(|g| 10.0 * g.log10())
}

fn pairwise_sq_distances(features: &Array2<f64>) -> Array2<f64> {
    let n = features.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = kmeans::squared_distance(features.row(i), features.row(j));
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Gaussian kernel graph. Without an explicit `sigma` the bandwidth is the
/// median pairwise Euclidean distance (1 if that median is zero or undefined).
pub fn similarity_matrix(features: &Array2<f64>, sigma: Option<f64>) -> Result<SimilarityGraph> {
    let n = features.nrows();
    if n == 0 {
        return Err(Error::param("similarity graph needs at least one point"));
    }
    if features.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("features must be finite"));
    }
    let sq = pairwise_sq_distances(features);
    let sigma = match sigma {
        Some(s) if s.is_finite() && s > 0.0 => s,
        Some(s) => {
            return Err(Error::param(format!(
                "sigma must be finite and > 0, got {s}"
            )))
        }
        None => {
            let mut dists: Vec<f64> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| sq[[i, j]].sqrt())
                .collect();
            dists.sort_by(f64::total_cmp);
            let m = dists.len();
            let median = match m {
                0 => 0.0,
                _ if m % 2 == 1 => dists[m / 2],
                _ => 0.5 * (dists[m / 2 - 1] + dists[m / 2]),
            };
            if median > 0.0 {
                median
            } else {
                1.0
            }
        }
    };
    let two_s2 = 2.0 * sigma * sigma;
    let mut w = sq.mapv(|d2| (-d2 / two_s2).exp());
    w.diag_mut().fill(0.0);
    Ok(SimilarityGraph { w, sigma })
}

/// `I − D^(−1/2) W D^(−1/2)`; isolated vertices keep an identity row.
pub fn normalized_laplacian(g: &SimilarityGraph) -> Array2<f64> {
    let n = g.n();
    let inv_sqrt: Vec<f64> =
        g.w.rows()
            .into_iter()
            .map(|r| {
                let d = r.sum();
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let scaled = g.w[[i, j]] * inv_sqrt[i] * inv_sqrt[j];
            l[[i, j]] = if i == j { 1.0 - scaled } else { -scaled };
        }
    }
    l
}

/// Rows of the `k` smallest Laplacian eigenvectors, each scaled to unit length
/// (all-zero rows stay zero).
pub fn spectral_embedding(g: &SimilarityGraph, k: usize) -> Result<Array2<f64>> {
    let l = normalized_laplacian(g);
    let (_, mut u) = smallest_eigenpairs(&l, k)?;
    for mut row in u.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(u)
}

pub fn spectral_clustering(g: &SimilarityGraph, k: usize, seed: u64) -> Result<SpectralClustering> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(Error::param(format!(
            "spectral clustering needs 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let embedding = spectral_embedding(g, k)?;
    let km = kmeans(&embedding, k, seed)?;
    Ok(SpectralClustering {
        assignment: ClusterAssignment {
            labels: km.labels,
            k,
            inertia: km.inertia,
        },
        embedding,
    })
}

fn centroids(labels: &[usize], k: usize, points: &Array2<f64>) -> (Array2<f64>, Vec<usize>) {
    let mut c = Array2::zeros((k, points.ncols()));
    let mut counts = vec![0usize; k];
    for (p, &l) in points.rows().into_iter().zip(labels) {
        let mut row = c.row_mut(l);
        row += &p;
        counts[l] += 1;
    }
    for (mut row, &n) in c.rows_mut().into_iter().zip(&counts) {
        if n > 0 {
            row /= n as f64;
        }
    }
    (c, counts)
}

/// Enforces `max_size` members per cluster. The lowest-index over-full
/// cluster repeatedly hands its member farthest from the centroid to the
/// nearest cluster with spare room; centroids are refreshed after each move.
/// An empty cluster counts as being at distance zero.
pub fn rebalance_clusters(
    assignment: &ClusterAssignment,
    points: &Array2<f64>,
    max_size: usize,
) -> Result<ClusterAssignment> {
    let n = assignment.labels.len();
    let k = assignment.k;
    if k.saturating_mul(max_size) < n {
        return Err(Error::InfeasibleCap { n, k, max_size });
    }
    if points.nrows() != n {
        return Err(Error::param(format!(
            "embedding has {} rows for {n} labelled users",
            points.nrows()
        )));
    }
    let mut labels = assignment.labels.clone();
    loop {
        let (cent, counts) = centroids(&labels, k, points);
        let Some(over) = (0..k).find(|&c| counts[c] > max_size) else {
            break;
        };
        let mover = (0..n)
            .filter(|&u| labels[u] == over)
            .map(|u| (u, kmeans::squared_distance(points.row(u), cent.row(over))))
            .fold((usize::MAX, f64::NEG_INFINITY), |best, (u, d)| {
                if d > best.1 {
                    (u, d)
                } else {
                    best
                }
            })
            .0;
        let target = (0..k)
            .filter(|&c| counts[c] < max_size)
            .map(|c| {
                let d = if counts[c] == 0 {
                    0.0
                } else {
                    kmeans::squared_distance(points.row(mover), cent.row(c))
                };
                (c, d)
            })
            .fold((usize::MAX, f64::INFINITY), |best, (c, d)| {
                if d < best.1 {
                    (c, d)
                } else {
                    best
                }
            })
            .0;
        labels[mover] = target;
    }
    if labels == assignment.labels {
        return Ok(assignment.clone());
    }
    let (cent, _) = centroids(&labels, k, points);
    let inertia = points
        .rows()
        .into_iter()
        .zip(&labels)
        .map(|(p, &l)| kmeans::squared_distance(p, cent.row(l)))
        .sum();
    Ok(ClusterAssignment { labels, k, inertia })
}

/// `ceil(n / max_group_size)`, at least one.
pub fn cluster_count(n_users: usize, max_group_size: usize) -> usize {
    n_users.div_ceil(max_group_size.max(1)).max(1)
}
