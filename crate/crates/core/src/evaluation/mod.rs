//! Corpus-level SSIM and loss reports, and the runtime benchmark.

pub mod bench;
pub mod corpus;
pub mod ssim;

pub use bench::{benchmark, benchmark_interleaved, BenchReport, BenchRow, BENCH_CSV_HEADER};
pub use corpus::{evaluate_corpus, Corpus, EvalReport, EvalRow, LossMetric, EVAL_CSV_HEADER};
pub use ssim::{ssim, ssim_default, SsimParams};

use crate::error::Result;
use crate::imageio::resize;
use crate::pipeline::{MethodConfig, Stylizer};
use crate::tensor::Image;

/// Anything that turns a content/style pair into an output image.
pub trait Transfer: Sync {
    fn name(&self) -> &str;
    fn transfer(&self, content: &Image, style: &Image) -> Result<Image>;
}

/// One of the five methods with a fixed configuration.
pub struct MethodTransfer<'a> {
    stylizer: Stylizer<'a>,
    config: MethodConfig,
}

impl<'a> MethodTransfer<'a> {
    pub fn new(stylizer: Stylizer<'a>, config: MethodConfig) -> Self {
        Self { stylizer, config }
    }

    pub fn config(&self) -> &MethodConfig {
        &self.config
    }
}

impl Transfer for MethodTransfer<'_> {
    fn name(&self) -> &str {
        self.config.method.slug()
    }

    fn transfer(&self, content: &Image, style: &Image) -> Result<Image> {
        self.stylizer.stylize(content, style, &self.config)
    }
}

/// Debug method: returns the content resized to the output size, ignoring the style.
#[derive(Debug, Clone, Copy)]
pub struct Passthrough {
    pub output_size: (usize, usize),
}

impl Transfer for Passthrough {
    fn name(&self) -> &str {
        "passthrough"
    }

    fn transfer(&self, content: &Image, _style: &Image) -> Result<Image> {
        resize(content, self.output_size.0, self.output_size.1)
    }
}
