use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::neuralnet::{DecodeMode, EncoderLevel};

/// Output size used when none is given: 600x450.
pub const DEFAULT_OUTPUT_SIZE: (usize, usize) = (600, 450);

/// Feature-statistics transform applied between encoder and decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Adain,
    Wct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Single relu4_1 encoder-AdaIN-decoder pass.
    AdaIn,
    /// Five-level cascade with AdaIN at every level.
    UstAdaIn,
    /// Five-level WCT cascade.
    UstWct,
    /// Four-level WCT cascade (no relu5_1 stage).
    UstWct4,
    /// Four-level WCT cascade with unpooling decoders, then guided smoothing.
    PhotoR,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::AdaIn, Method::UstAdaIn, Method::UstWct, Method::UstWct4, Method::PhotoR];

    /// Command-line and report identifier.
    pub fn slug(self) -> &'static str {
        match self {
            Method::AdaIn => "adain",
            Method::UstAdaIn => "ust-adain",
            Method::UstWct => "ust-wct",
            Method::UstWct4 => "ust-wct4",
            Method::PhotoR => "photo-r",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::AdaIn => "AdaIN",
            Method::UstAdaIn => "UST-AdaIN",
            Method::UstWct => "UST-WCT",
            Method::UstWct4 => "UST-WCT4",
            Method::PhotoR => "PHOTO-R",
        }
    }

    pub fn default_alpha(self) -> f64 {
        match self {
            Method::AdaIn | Method::UstAdaIn | Method::PhotoR => 1.0,
            Method::UstWct | Method::UstWct4 => 0.6,
        }
    }

    /// Levels in execution order (deepest first).
    pub fn levels(self) -> Vec<EncoderLevel> {
        let raw: &[usize] = match self {
            Method::AdaIn => &[4],
            Method::UstAdaIn | Method::UstWct => &[5, 4, 3, 2, 1],
            Method::UstWct4 | Method::PhotoR => &[4, 3, 2, 1],
        };
        raw.iter().map(|&l| EncoderLevel::new(l).expect("static level")).collect()
    }

    pub fn transform(self) -> TransformKind {
        match self {
            Method::AdaIn | Method::UstAdaIn => TransformKind::Adain,
            Method::UstWct | Method::UstWct4 | Method::PhotoR => TransformKind::Wct,
        }
    }

    pub fn decode_mode(self) -> DecodeMode {
        match self {
            Method::PhotoR => DecodeMode::Unpool,
            _ => DecodeMode::Upsample,
        }
    }

    pub fn smooths(self) -> bool {
        self == Method::PhotoR
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL.into_iter().find(|m| m.slug() == lower || m.label().to_ascii_lowercase() == lower).ok_or_else(
            || {
                Error::argument(format!(
                    "unknown method `{s}` (expected one of adain, ust-adain, ust-wct, ust-wct4, photo-r)"
                ))
            },
        )
    }
}

/// Method selection plus the run parameters it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    /// Blend weight of the transformed features, in [0, 1].
    pub alpha: f64,
    /// (width, height) of the output; content and style are resized to it.
    pub output_size: (usize, usize),
    pub levels: Vec<EncoderLevel>,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        Self { method, alpha: method.default_alpha(), output_size: DEFAULT_OUTPUT_SIZE, levels: method.levels() }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_output_size(mut self, width: usize, height: usize) -> Self {
        self.output_size = (width, height);
        self
    }

    pub fn with_levels(mut self, levels: Vec<EncoderLevel>) -> Self {
        self.levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::argument(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if self.output_size.0 == 0 || self.output_size.1 == 0 {
            return Err(Error::argument("output size must be positive"));
        }
        if self.levels.is_empty() {
            return Err(Error::argument("level list is empty"));
        }
        Ok(())
    }
}
