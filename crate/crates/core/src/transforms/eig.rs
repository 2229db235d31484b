//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

const MAX_SWEEPS: usize = 100;
const REL_TOLERANCE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Eigenvalues in descending order; eigenvector `i` is column `i` of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// `E · diag(f(λ)) · Eᵀ` restricted to the eigenpairs selected by `keep`.
    pub fn spectral_map(&self, keep: impl Fn(f64) -> bool, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            if !keep(lambda) {
                continue;
            }
            let s = f(lambda);
            for i in 0..n {
                let vik = self.vectors.get(i, k) * s;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + vik * self.vectors.get(j, k));
                }
            }
        }
        out
    }
}

/// Decomposes `s = E·diag(λ)·Eᵀ`.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm falls below
/// `1e-10 · ‖s‖_F` (at most 100 sweeps). Works on a private copy of `s`.
pub fn sym_eig(s: &Matrix) -> Result<SymEigen> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::shape(format!("eigendecomposition of a {}x{} matrix", n, s.cols())));
    }
    let scale = s.data().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (s.get(i, j) - s.get(j, i)).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::argument(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    s.get(i, j),
                    s.get(j, i)
                )));
            }
        }
    }
    if s.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::argument("matrix has non-finite entries"));
    }

    // Work on the symmetrized copy.
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (s.get(i, j) + s.get(j, i));
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = REL_TOLERANCE * s.frobenius_norm();

    let off_norm = |a: &[f64]| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += a[i * n + j] * a[i * n + j];
                }
            }
        }
        sum.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // A <- A·J (columns p, q)
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                // A <- Jᵀ·A (rows p, q)
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::DegenerateInput(format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, dst, v.get(k, src));
        }
    }
    Ok(SymEigen { values, vectors })
}
