use crate::error::{Error, Result};
use crate::tensor::{center, dgemm_aat, FeatureMatrix, Matrix};

/// `F·Fᵀ`, unnormalized.
pub fn gram(f: &FeatureMatrix) -> Matrix {
    let n = f.rows();
    let mut out = vec![0.0; n * n];
    dgemm_aat(n, f.cols(), f.data(), &mut out);
    Matrix::new(n, n, out).expect("n x n buffer")
}

/// Row covariance with the unbiased `1/(M-1)` normalization.
pub fn covariance(f: &FeatureMatrix) -> Result<Matrix> {
    let m = f.cols();
    if m < 2 {
        return Err(Error::DegenerateInput(format!("covariance needs at least 2 samples per row, got {m}")));
    }
    let (centered, _) = center(f)?;
    Ok(scaled_gram(&centered, 1.0 / (m - 1) as f64))
}

/// Covariance of rows that are already centered.
pub(crate) fn centered_covariance(centered: &FeatureMatrix) -> Result<Matrix> {
    let m = centered.cols();
    if m < 2 {
        return Err(Error::DegenerateInput(format!("covariance needs at least 2 samples per row, got {m}")));
    }
    Ok(scaled_gram(centered, 1.0 / (m - 1) as f64))
}

fn scaled_gram(f: &FeatureMatrix, scale: f64) -> Matrix {
    let g = gram(f);
    let data = g.data().iter().map(|v| v * scale).collect();
    Matrix::new(g.rows(), g.cols(), data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn gram_of_identity() {
        let g = gram(&fm(&[vec![1.0, 0.0], vec![0.0, 1.0]]));
        assert_eq!(g, Matrix::identity(2));
    }

    #[test]
    fn gram_of_ones() {
        let g = gram(&fm(&[vec![1.0, 1.0], vec![1.0, 1.0]]));
        assert_eq!(g.data(), &[2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn gram_single_row() {
        let g = gram(&fm(&[vec![1.0; 7]]));
        assert_eq!(g.data(), &[7.0]);
    }

    #[test]
    fn covariance_hand_case() {
        let c = covariance(&fm(&[vec![1.0, 3.0], vec![2.0, 2.0]])).unwrap();
        assert_eq!(c.data(), &[2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn covariance_of_constant_rows() {
        let c = covariance(&fm(&[vec![4.0; 5], vec![-1.0; 5]])).unwrap();
        assert!(c.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn covariance_is_scaled_centered_gram() {
        let f = fm(&[vec![1.0, 5.0, -2.0, 0.5], vec![3.0, 1.0, 4.0, 1.0]]);
        let (centered, _) = center(&f).unwrap();
        let g = gram(&centered);
        let c = covariance(&f).unwrap();
        for (a, b) in c.data().iter().zip(g.data()) {
            assert!((a - b / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn covariance_needs_two_samples() {
        assert!(matches!(covariance(&fm(&[vec![1.0]])), Err(Error::DegenerateInput(_))));
    }
}
