//! Content and style losses over encoder activations. Diagnostics only: nothing here
//! is differentiated.

use crate::error::{Error, Result};
use crate::tensor::{FeatureMap, Matrix};

/// Weights for combining per-layer style terms with the content term.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleLossWeights {
    layer_weights: Vec<f64>,
    content_weight: f64,
    style_weight: f64,
}

impl StyleLossWeights {
    pub fn new(layer_weights: Vec<f64>, content_weight: f64, style_weight: f64) -> Result<Self> {
        let bad = |w: f64| !w.is_finite() || w < 0.0;
        if layer_weights.iter().any(|&w| bad(w)) || bad(content_weight) || bad(style_weight) {
            return Err(Error::argument("loss weights must be finite and non-negative"));
        }
        if !layer_weights.iter().any(|&w| w > 0.0) {
            return Err(Error::argument("at least one style layer weight must be positive"));
        }
        Ok(Self { layer_weights, content_weight, style_weight })
    }

    /// `1/L` per layer, content weight 1, style weight 1e3.
    pub fn uniform(layers: usize) -> Result<Self> {
        if layers == 0 {
            return Err(Error::argument("no style layers"));
        }
        Self::new(vec![1.0 / layers as f64; layers], 1.0, 1e3)
    }

    pub fn layer_weights(&self) -> &[f64] {
        &self.layer_weights
    }

    pub fn content_weight(&self) -> f64 {
        self.content_weight
    }

    pub fn style_weight(&self) -> f64 {
        self.style_weight
    }
}

/// `½ Σ (F − P)²`.
pub fn content_loss(f: &FeatureMap, p: &FeatureMap) -> Result<f64> {
    if !f.same_shape(p) {
        return Err(Error::shape(format!(
            "content loss between {}x{}x{} and {}x{}x{}",
            f.channels(),
            f.height(),
            f.width(),
            p.channels(),
            p.height(),
            p.width()
        )));
    }
    let sum: f64 = f
        .data()
        .iter()
        .zip(p.data())
        .map(|(&a, &b)| {
            let d = f64::from(a) - f64::from(b);
            d * d
        })
        .sum();
    Ok(0.5 * sum)
}

/// `Σ (G − A)² / (4 N² M²)` for one layer with `channels = N`, `positions = M`.
pub fn style_layer_loss(g: &Matrix, a: &Matrix, channels: usize, positions: usize) -> Result<f64> {
    if g.rows() != a.rows() || g.cols() != a.cols() {
        return Err(Error::shape("Gram matrices differ in size"));
    }
    if channels == 0 || positions == 0 {
        return Err(Error::DegenerateInput("style layer with no channels or positions".into()));
    }
    let sq: f64 = g.data().iter().zip(a.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    let (n, m) = (channels as f64, positions as f64);
    Ok(sq / (4.0 * n * n * m * m))
}

/// A generated-image Gram matrix and its style target for one layer.
#[derive(Debug, Clone)]
pub struct GramPair {
    pub generated: Matrix,
    pub target: Matrix,
    pub channels: usize,
    pub positions: usize,
}

/// `½ Σ_l ω_l E_l`.
pub fn combine_style_losses(layer_losses: &[f64], weights: &StyleLossWeights) -> Result<f64> {
    if layer_losses.len() != weights.layer_weights.len() {
        return Err(Error::argument(format!(
            "{} layer losses for {} layer weights",
            layer_losses.len(),
            weights.layer_weights.len()
        )));
    }
    Ok(0.5 * layer_losses.iter().zip(&weights.layer_weights).map(|(e, w)| e * w).sum::<f64>())
}

pub fn style_loss(pairs: &[GramPair], weights: &StyleLossWeights) -> Result<f64> {
    let e = pairs
        .iter()
        .map(|p| style_layer_loss(&p.generated, &p.target, p.channels, p.positions))
        .collect::<Result<Vec<_>>>()?;
    combine_style_losses(&e, weights)
}

/// `α·L_content + β·L_style` with α, β taken from `weights`.
pub fn total_loss(content: f64, style: f64, weights: &StyleLossWeights) -> f64 {
    weights.content_weight * content + weights.style_weight * style
}
