//! Dense symmetric eigensolver (cyclic Jacobi rotations).
//!
//! Sized for graphs of a few hundred vertices at most; cost per sweep is O(n³).

use ndarray::Array2;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector of `eigenvalues[i]`.
    pub eigenvectors: Array2<f64>,
}

pub fn frobenius_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_symmetric(m: &Array2<f64>) -> Result<()> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::param(format!(
            "matrix must be square, got {rows}×{cols}"
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("matrix has non-finite entries"));
    }
    let tol = 1e-10 * frobenius_norm(m).max(1.0);
    for i in 0..rows {
        for j in (i + 1)..rows {
            if (m[[i, j]] - m[[j, i]]).abs() > tol {
                return Err(Error::param(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    m[[i, j]],
                    m[[j, i]]
                )));
            }
        }
    }
    Ok(())
}

/// Diagonalises `m` with cyclic Jacobi sweeps until the off-diagonal mass is
/// negligible relative to the Frobenius norm.
pub fn symmetric_eigen(m: &Array2<f64>) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.nrows();
    // symmetrise exactly; row-major scratch copies
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[[i, j]] + m[[j, i]]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = frobenius_norm(m).max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[[r, col]] = v[r * n + src];
        }
    }
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// The `k` smallest eigenpairs of a symmetric matrix; eigenvectors are the columns.
pub fn smallest_eigenpairs(m: &Array2<f64>, k: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = m.nrows();
    if k == 0 || k > n {
        return Err(Error::param(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let eig = symmetric_eigen(m)?;
    let vectors = eig.eigenvectors.slice(ndarray::s![.., ..k]).to_owned();
    Ok((eig.eigenvalues[..k].to_vec(), vectors))
}
