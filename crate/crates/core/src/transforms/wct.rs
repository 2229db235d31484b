//! Whitening-coloring transform over [`FeatureMatrix`] rows.
//!
//! Eigenvalues at or below `EIGEN_FLOOR · λ_max` are dropped (rank truncation), never
//! clamped, on both the whitening and the coloring side.

use crate::error::{Error, Result};
use crate::tensor::{center, FeatureMatrix};

use super::eig::sym_eig;
use super::stats::centered_covariance;

/// Relative eigenvalue floor for rank truncation.
pub const EIGEN_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct Whitened {
    /// `f̂_c`: centered content features with identity covariance on the retained rank.
    pub features: FeatureMatrix,
    pub content_mean: Vec<f64>,
    /// Number of retained eigenpairs.
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct WctIntermediates {
    pub whitened: FeatureMatrix,
    /// `f̂_cs`: colored and re-centered on the style mean.
    pub colored: FeatureMatrix,
    pub style_mean: Vec<f64>,
}

pub fn whiten(content: &FeatureMatrix) -> Result<Whitened> {
    let (centered, content_mean) = center(content)?;
    let cov = centered_covariance(&centered)?;
    let eig = sym_eig(&cov)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    let floor = EIGEN_FLOOR * lambda_max;
    let rank = eig.values.iter().filter(|&&l| l > floor).count();
    if lambda_max <= 0.0 || rank == 0 {
        return Err(Error::DegenerateFeatures("content features have no variance to whiten".into()));
    }
    let w = eig.spectral_map(|l| l > floor, |l| l.powf(-0.5));
    Ok(Whitened { features: w.apply(&centered)?, content_mean, rank })
}

/// Imposes the covariance and mean of `style` on whitened features.
///
/// A style matrix with zero covariance colors everything to its mean.
pub fn color(whitened: &FeatureMatrix, style: &FeatureMatrix) -> Result<(FeatureMatrix, Vec<f64>)> {
    if whitened.rows() != style.rows() {
        return Err(Error::shape(format!(
            "coloring {} content rows with {} style rows",
            whitened.rows(),
            style.rows()
        )));
    }
    let (centered, style_mean) = center(style)?;
    let cov = centered_covariance(&centered)?;
    let eig = sym_eig(&cov)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    let floor = EIGEN_FLOOR * lambda_max;
    let c = eig.spectral_map(|l| lambda_max > 0.0 && l > floor, f64::sqrt);
    let colored = c.apply(whitened)?.add_row_offsets(&style_mean)?;
    Ok((colored, style_mean))
}

pub fn wct(content: &FeatureMatrix, style: &FeatureMatrix) -> Result<WctIntermediates> {
    let whitened = whiten(content)?.features;
    let (colored, style_mean) = color(&whitened, style)?;
    Ok(WctIntermediates { whitened, colored, style_mean })
}

/// `α·f̂_cs + (1 − α)·f_c`. Endpoints return exact copies.
pub fn wct_blend(content: &FeatureMatrix, colored: &FeatureMatrix, alpha: f64) -> Result<FeatureMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::argument(format!("blend alpha must be in [0, 1], got {alpha}")));
    }
    if content.rows() != colored.rows() || content.cols() != colored.cols() {
        return Err(Error::shape("blend operands differ in shape"));
    }
    if alpha == 0.0 {
        return Ok(content.clone());
    }
    if alpha == 1.0 {
        return Ok(colored.clone());
    }
    let mut out = content.clone();
    for (o, &t) in out.data_mut().iter_mut().zip(colored.data()) {
        *o = alpha * t + (1.0 - alpha) * *o;
    }
    Ok(out)
}
