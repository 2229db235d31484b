//! Forward-only neural style transfer.
//!
//! A VGG-19 encoder slice maps an image to `relu{L}_1` activations, a feature transform
//! (AdaIN or whitening-coloring) imposes the style image's statistics, and a decoder maps
//! the result back to pixels. Multi-level cascades run deepest level first.

pub mod cli;
pub mod demo;
pub mod error;
pub mod evaluation;
pub mod imageio;
pub mod neuralnet;
pub mod pipeline;
pub mod tensor;
pub mod transforms;

pub use error::{Error, FormatError, Result};
pub use pipeline::{Method, MethodConfig, Stylizer};
pub use tensor::{FeatureMap, FeatureMatrix, Image, Matrix};
