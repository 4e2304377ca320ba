//! Lloyd's k-means with k-means++ seeding and restarts.

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
}

/// One Lloyd run; `history` holds the inertia after every centroid update.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub result: KMeans,
    pub history: Vec<f64>,
}

pub(crate) fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.rows().into_iter().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding: first centre uniform, the rest drawn proportional to D².
pub fn kmeans_plus_plus<R: Rng + ?Sized>(
    points: &Array2<f64>,
    k: usize,
    rng: &mut R,
) -> Array2<f64> {
    let (n, d) = points.dim();
    let mut centroids = Array2::zeros((k, d));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&points.row(first));
    let mut dist: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| squared_distance(p, points.row(first)))
        .collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in dist.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // rounding can run off the end; fall back to the last point with mass
            if dist[chosen] == 0.0 {
                chosen = dist.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            dist[i] = dist[i].min(squared_distance(p, points.row(pick)));
        }
    }
    centroids
}

fn update_centroids(points: &Array2<f64>, labels: &[usize], centroids: &mut Array2<f64>) {
    let k = centroids.nrows();
    let mut counts = vec![0usize; k];
    centroids.fill(0.0);
    for (p, &l) in points.rows().into_iter().zip(labels) {
        let mut row = centroids.row_mut(l);
        row += &p;
        counts[l] += 1;
    }
    for (mut row, &c) in centroids.rows_mut().into_iter().zip(&counts) {
        if c > 0 {
            row /= c as f64;
        }
    }
}

fn inertia(points: &Array2<f64>, labels: &[usize], centroids: &Array2<f64>) -> f64 {
    points
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, centroids.row(l)))
        .sum()
}

/// Lloyd iterations from the given centres until the assignment is stable or
/// the iteration cap is hit. An empty cluster takes over the point lying
/// farthest from its current centroid (only from clusters with ≥ 2 members).
pub fn lloyd(points: &Array2<f64>, init: Array2<f64>) -> LloydRun {
    let n = points.nrows();
    let k = init.nrows();
    let mut centroids = init;
    let mut labels: Vec<usize> = vec![usize::MAX; n];
    let mut history = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = points
            .rows()
            .into_iter()
            .map(|p| nearest(p, &centroids).0)
            .collect();

        let mut counts = vec![0usize; k];
        for &l in &next {
            counts[l] += 1;
        }
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| counts[next[i]] > 1)
                .map(|i| (i, squared_distance(points.row(i), centroids.row(next[i]))))
                .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                });
            if let Some((i, _)) = donor {
                counts[next[i]] -= 1;
                next[i] = empty;
                counts[empty] = 1;
            }
        }

        let stable = next == labels;
        labels = next;
        update_centroids(points, &labels, &mut centroids);
        history.push(inertia(points, &labels, &centroids));
        if stable {
            break;
        }
    }
    let inertia = *history.last().unwrap_or(&0.0);
    LloydRun {
        result: KMeans {
            labels,
            centroids,
            inertia,
        },
        history,
    }
}

/// Best of [`RESTARTS`] k-means++ seeded Lloyd runs; restart `r` draws from
/// ChaCha8 stream `r` of `seed`, and ties keep the lowest restart index.
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64) -> Result<KMeans> {
    let n = points.nrows();
    if k == 0 || n < k {
        return Err(Error::param(format!(
            "k-means needs n >= k >= 1, got n={n}, k={k}"
        )));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("k-means points must be finite"));
    }
    let mut best: Option<KMeans> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let init = kmeans_plus_plus(points, k, &mut rng);
        let run = lloyd(points, init).result;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}
