//! Dense numeric kernels: cyclic Jacobi eigendecomposition and Gaussian
//! elimination. Everything here is deterministic for identical input.

use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {deviation:.3e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },
    #[error("Jacobi sweeps did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("linear system is singular at pivot {pivot}")]
    SingularSystem { pivot: usize },
}

/// Symmetry tolerance accepted by [`jacobi_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius norm at which the Jacobi sweeps stop.
pub const JACOBI_OFF_TOL: f64 = 1e-12;
/// Maximum number of cyclic sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Array1<f64>,
    /// Orthonormal eigenvectors, one per column, aligned with `values`.
    pub vectors: Array2<f64>,
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * a[[p, q]] * a[[p, q]];
        }
    }
    sum.sqrt()
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in ascending order. Each eigenvector's first
/// component of magnitude above 1e-12 is made positive so that repeated runs
/// on identical input produce identical output.
pub fn jacobi_eigen(matrix: &Array2<f64>) -> Result<EigenPairs, NumericError> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "eigendecomposition needs a square matrix");
    for p in 0..n {
        for q in (p + 1)..n {
            let deviation = (matrix[[p, q]] - matrix[[q, p]]).abs();
            if deviation > SYMMETRY_TOL {
                return Err(NumericError::NotSymmetric {
                    row: p,
                    col: q,
                    deviation,
                });
            }
        }
    }

    let mut a = matrix.clone();
    // Enforce exact symmetry so the rotations see one consistent value.
    for p in 0..n {
        for q in (p + 1)..n {
            let avg = 0.5 * (a[[p, q]] + a[[q, p]]);
            a[[p, q]] = avg;
            a[[q, p]] = avg;
        }
    }
    let mut v = Array2::<f64>::eye(n);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_OFF_TOL {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                // Rotation angle from Numerical Recipes §11.1.
                let theta = 0.5 * (a[[q, q]] - a[[p, p]]) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[[p, p]];
                let aqq = a[[q, q]];
                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[[i, p]];
                        let aiq = a[[i, q]];
                        a[[i, p]] = aip - s * (aiq + tau * aip);
                        a[[i, q]] = aiq + s * (aip - tau * aiq);
                        a[[p, i]] = a[[i, p]];
                        a[[q, i]] = a[[i, q]];
                    }
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip - s * (viq + tau * vip);
                    v[[i, q]] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= JACOBI_OFF_TOL {
        return Err(NumericError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off_norm: off_diagonal_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].partial_cmp(&a[[j, j]]).unwrap());

    let mut values = Array1::<f64>::zeros(n);
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[[src, src]];
        let mut sign = 1.0;
        for i in 0..n {
            let x = v[[i, src]];
            if x.abs() > 1e-12 {
                sign = if x > 0.0 { 1.0 } else { -1.0 };
                break;
            }
        }
        for i in 0..n {
            vectors[[i, dst]] = sign * v[[i, src]];
        }
    }
    Ok(EigenPairs { values, vectors })
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>, NumericError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut rhs = b.clone();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = m[[col, col]].abs();
        for row in (col + 1)..n {
            if m[[row, col]].abs() > pivot_val {
                pivot_val = m[[row, col]].abs();
                pivot_row = row;
            }
        }
        if pivot_val < 1e-12 {
            return Err(NumericError::SingularSystem { pivot: col });
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap([col, k], [pivot_row, k]);
            }
            rhs.swap(col, pivot_row);
        }
        for row in (col + 1)..n {
            let factor = m[[row, col]] / m[[col, col]];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[[row, k]] -= factor * m[[col, k]];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[[row, k]] * x[k];
        }
        x[row] = acc / m[[row, row]];
    }
    Ok(x)
}

/// Largest singular value, computed from the spectrum of `WᵀW`.
pub fn spectral_norm(w: &Array2<f64>) -> f64 {
    gram_eigen_extremes(w).1
}

/// Smallest singular value, computed from the spectrum of `WᵀW`.
pub fn min_singular_value(w: &Array2<f64>) -> f64 {
    gram_eigen_extremes(w).0
}

fn gram_eigen_extremes(w: &Array2<f64>) -> (f64, f64) {
    let gram = w.t().dot(w);
    let eig = jacobi_eigen(&gram).expect("Gram matrix is symmetric");
    let min = eig.values[0].max(0.0).sqrt();
    let max = eig.values[eig.values.len() - 1].max(0.0).sqrt();
    (min, max)
}
