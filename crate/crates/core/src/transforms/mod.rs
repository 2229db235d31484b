//! Feature-statistics math: Gram and covariance representations, the style/content
//! losses, AdaIN, a symmetric eigensolver, and the whitening-coloring transform.

pub mod adain;
pub mod eig;
pub mod loss;
pub mod stats;
pub mod wct;

pub use adain::{adain, ADAIN_EPSILON};
pub use eig::{sym_eig, SymEigen};
pub use loss::{
    combine_style_losses, content_loss, style_layer_loss, style_loss, total_loss, GramPair, StyleLossWeights,
};
pub use stats::{covariance, gram};
pub use wct::{color, wct, wct_blend, whiten, WctIntermediates, Whitened, EIGEN_FLOOR};
