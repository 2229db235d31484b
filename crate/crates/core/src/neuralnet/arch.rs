//! VGG-19 slice topology and the mirrored decoder topology.
//!
//! Channel widths are a parameter: the published networks use
//! [`Architecture::VGG19_WIDTHS`], while small hand-authored networks keep the same
//! layer list with narrower blocks.

use std::fmt;

use crate::error::{Error, Result};

/// Number of encoder levels (relu1_1 .. relu5_1).
pub const MAX_LEVEL: usize = 5;

/// Convolutions per VGG-19 block.
const BLOCK_CONVS: [usize; MAX_LEVEL] = [2, 2, 4, 4, 4];

/// Selects the VGG slice ending at `relu{level}_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EncoderLevel(u8);

impl EncoderLevel {
    pub fn new(level: usize) -> Result<Self> {
        if (1..=MAX_LEVEL).contains(&level) {
            Ok(Self(level as u8))
        } else {
            Err(Error::argument(format!("encoder level must be in 1..=5, got {level}")))
        }
    }

    pub fn get(self) -> usize {
        usize::from(self.0)
    }

    /// Number of 2x2 poolings before `relu{level}_1`.
    pub fn pool_count(self) -> usize {
        self.get() - 1
    }

    pub fn all() -> impl Iterator<Item = EncoderLevel> {
        (1..=MAX_LEVEL).map(|l| EncoderLevel(l as u8))
    }
}

impl fmt::Display for EncoderLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "relu{}_1", self.0)
    }
}

/// Which decoder family a weight prefix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DecoderKind {
    /// Nearest-neighbour upsampling in place of pooling (`decoder{L}.`).
    Upsample,
    /// Max-unpooling with recorded indices (`photo_decoder{L}.`).
    Unpool,
}

impl DecoderKind {
    pub fn prefix(self, level: EncoderLevel) -> String {
        match self {
            DecoderKind::Upsample => format!("decoder{}.", level.get()),
            DecoderKind::Unpool => format!("photo_decoder{}.", level.get()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvSpec {
    /// Canonical layer name without prefix or `.weight`/`.bias` suffix, e.g. `conv3_2`.
    pub name: String,
    pub in_channels: usize,
    pub out_channels: usize,
    pub relu: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerSpec {
    Conv(ConvSpec),
    /// Max pooling in encoders, upsampling/unpooling in decoders.
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub widths: [usize; MAX_LEVEL],
}

impl Architecture {
    pub const VGG19_WIDTHS: [usize; MAX_LEVEL] = [64, 128, 256, 512, 512];

    pub fn vgg19() -> Self {
        Self { widths: Self::VGG19_WIDTHS }
    }

    pub fn with_widths(widths: [usize; MAX_LEVEL]) -> Self {
        Self { widths }
    }

    /// Channel count of the `relu{level}_1` activation.
    pub fn channels(&self, level: EncoderLevel) -> usize {
        self.widths[level.get() - 1]
    }

    /// Layers from the RGB input through `relu{level}_1`.
    pub fn encoder(&self, level: EncoderLevel) -> Vec<LayerSpec> {
        let mut layers = Vec::new();
        let mut channels = 3;
        for block in 1..=level.get() {
            if block > 1 {
                layers.push(LayerSpec::Resample);
            }
            let convs = if block == level.get() { 1 } else { BLOCK_CONVS[block - 1] };
            for i in 1..=convs {
                let out = self.widths[block - 1];
                layers.push(LayerSpec::Conv(ConvSpec {
                    name: format!("conv{block}_{i}"),
                    in_channels: channels,
                    out_channels: out,
                    relu: true,
                }));
                channels = out;
            }
        }
        layers
    }

    /// Mirror of [`Self::encoder`]: reversed layer order, swapped channel counts, and no
    /// activation after the final RGB convolution.
    pub fn decoder(&self, level: EncoderLevel) -> Vec<LayerSpec> {
        let mut layers: Vec<LayerSpec> = self
            .encoder(level)
            .into_iter()
            .rev()
            .map(|l| match l {
                LayerSpec::Conv(c) => LayerSpec::Conv(ConvSpec {
                    name: c.name,
                    in_channels: c.out_channels,
                    out_channels: c.in_channels,
                    relu: true,
                }),
                LayerSpec::Resample => LayerSpec::Resample,
            })
            .collect();
        if let Some(LayerSpec::Conv(last)) = layers.last_mut() {
            last.relu = false;
        }
        layers
    }

    /// Every `(tensor name, shape)` a level-`level` encoder needs, for 3x3 kernels.
    pub fn encoder_manifest(&self, level: EncoderLevel) -> Vec<(String, Vec<usize>)> {
        manifest_of("", &self.encoder(level))
    }

    pub fn decoder_manifest(&self, level: EncoderLevel, kind: DecoderKind) -> Vec<(String, Vec<usize>)> {
        manifest_of(&kind.prefix(level), &self.decoder(level))
    }
}

fn manifest_of(prefix: &str, layers: &[LayerSpec]) -> Vec<(String, Vec<usize>)> {
    layers
        .iter()
        .filter_map(|l| match l {
            LayerSpec::Conv(c) => Some(c),
            LayerSpec::Resample => None,
        })
        .flat_map(|c| {
            [
                (format!("{prefix}{}.weight", c.name), vec![c.out_channels, c.in_channels, 3, 3]),
                (format!("{prefix}{}.bias", c.name), vec![c.out_channels]),
            ]
        })
        .collect()
}
