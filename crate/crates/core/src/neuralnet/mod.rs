//! Forward-only VGG-19 encoder slices, mirrored decoders, and their weights.

pub mod arch;
pub mod layers;
pub mod weights;

use std::collections::BTreeMap;

pub use arch::{Architecture, ConvSpec, DecoderKind, EncoderLevel, LayerSpec, MAX_LEVEL};
pub use layers::{conv2d, maxpool2, relu, unpool, upsample_nearest2, Conv2d, PoolIndices};
pub use weights::{load_weights, Tensor, WeightStore};

use crate::error::{Error, Result};
use crate::tensor::{FeatureMap, Image};

/// Per-channel mean subtracted after scaling to [0, 255], in B, G, R order.
pub const VGG_MEAN_BGR: [f32; 3] = [103.939, 116.779, 123.68];

/// Resampling used by a decoder in place of the encoder's pooling layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Upsample,
    Unpool,
}

impl DecodeMode {
    fn kind(self) -> DecoderKind {
        match self {
            DecodeMode::Upsample => DecoderKind::Upsample,
            DecodeMode::Unpool => DecoderKind::Unpool,
        }
    }
}

#[derive(Debug, Clone)]
enum Layer {
    Conv { conv: Conv2d, relu: bool },
    Resample,
}

/// Output of an encoder pass.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub features: FeatureMap,
    /// One entry per pooling layer, in encoder order.
    pub indices: Vec<PoolIndices>,
}

/// Encoders and decoders assembled from a validated [`WeightStore`].
///
/// The encoder is the longest VGG prefix fully present in the store; decoders are
/// optional per level and per [`DecoderKind`], but any decoder that is present must be
/// complete and shape-consistent.
#[derive(Debug, Clone)]
pub struct Network {
    arch: Architecture,
    depth: EncoderLevel,
    /// Encoder layers through `relu{depth}_1`.
    encoder: Vec<Layer>,
    /// Index into `encoder` just past the conv that ends each level.
    taps: Vec<usize>,
    decoders: BTreeMap<(DecoderKind, EncoderLevel), Vec<Layer>>,
}

impl Network {
    pub fn from_store(store: &WeightStore) -> Result<Self> {
        let mut widths = [0usize; MAX_LEVEL];
        let mut depth = 0;
        for (b, width) in widths.iter_mut().enumerate() {
            match store.get(&format!("conv{}_1.weight", b + 1)) {
                Ok(t) if t.shape().len() == 4 => *width = t.shape()[0],
                Ok(t) => {
                    return Err(Error::manifest(format!(
                        "conv{}_1.weight must be 4-D, has shape {:?}",
                        b + 1,
                        t.shape()
                    )))
                }
                Err(_) => break,
            }
            depth = b + 1;
        }
        if depth == 0 {
            return Err(Error::manifest("missing tensor `conv1_1.weight`"));
        }
        // Blocks past the inferred depth keep a placeholder width; they are never built.
        for b in depth..MAX_LEVEL {
            widths[b] = widths[depth - 1];
        }
        let arch = Architecture::with_widths(widths);

        // Shrink depth until every encoder tensor for that level is present, then
        // validate shapes strictly.
        let mut level = EncoderLevel::new(depth)?;
        while level.get() > 1 && !arch.encoder_manifest(level).iter().all(|(n, _)| store.contains(n)) {
            level = EncoderLevel::new(level.get() - 1)?;
        }
        let encoder = build_layers("", &arch.encoder(level), store)?;
        let taps = EncoderLevel::all().take_while(|l| *l <= level).map(|l| arch.encoder(l).len()).collect();

        let mut decoders = BTreeMap::new();
        for kind in [DecoderKind::Upsample, DecoderKind::Unpool] {
            for l in EncoderLevel::all() {
                let prefix = kind.prefix(l);
                if !store.names().any(|n| n.starts_with(&prefix)) {
                    continue;
                }
                if l > level {
                    return Err(Error::manifest(format!("{prefix}* present but the encoder only reaches {level}")));
                }
                decoders.insert((kind, l), build_layers(&prefix, &arch.decoder(l), store)?);
            }
        }
        Ok(Self { arch, depth: level, encoder, taps, decoders })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    /// Deepest encoder level available.
    pub fn depth(&self) -> EncoderLevel {
        self.depth
    }

    pub fn has_decoder(&self, level: EncoderLevel, mode: DecodeMode) -> bool {
        self.decoders.contains_key(&(mode.kind(), level))
    }

    /// Fails with a manifest error naming the first missing piece.
    pub fn require(&self, level: EncoderLevel, mode: DecodeMode) -> Result<()> {
        if level > self.depth {
            return Err(Error::manifest(format!("encoder weights stop before {level} (deepest: {})", self.depth)));
        }
        if !self.has_decoder(level, mode) {
            return Err(Error::manifest(format!("missing decoder tensors `{}*`", mode.kind().prefix(level))));
        }
        Ok(())
    }

    /// Activations at `relu{level}_1` plus the argmax indices of every pooling on the way.
    pub fn encode(&self, img: &Image, level: EncoderLevel) -> Result<Encoded> {
        self.check_level(level)?;
        let end = self.taps[level.get() - 1];
        let mut x = preprocess(img);
        let mut indices = Vec::with_capacity(level.pool_count());
        for layer in &self.encoder[..end] {
            x = match layer {
                Layer::Conv { conv, relu: r } => apply_conv(&x, conv, *r)?,
                Layer::Resample => {
                    let (pooled, idx) = maxpool2(&x)?;
                    indices.push(idx);
                    pooled
                }
            };
        }
        Ok(Encoded { features: x, indices })
    }

    /// Single pass collecting the activations at each requested level.
    pub fn encode_taps(&self, img: &Image, levels: &[EncoderLevel]) -> Result<Vec<FeatureMap>> {
        let Some(&deepest) = levels.iter().max() else {
            return Ok(Vec::new());
        };
        self.check_level(deepest)?;
        let mut x = preprocess(img);
        let mut by_level: BTreeMap<EncoderLevel, FeatureMap> = BTreeMap::new();
        for (i, layer) in self.encoder[..self.taps[deepest.get() - 1]].iter().enumerate() {
            x = match layer {
                Layer::Conv { conv, relu: r } => apply_conv(&x, conv, *r)?,
                Layer::Resample => maxpool2(&x)?.0,
            };
            if let Some(l) = self.taps.iter().position(|&t| t == i + 1) {
                let l = EncoderLevel::new(l + 1)?;
                if levels.contains(&l) {
                    by_level.insert(l, x.clone());
                }
            }
        }
        Ok(levels.iter().map(|l| by_level[l].clone()).collect())
    }

    /// Maps `relu{level}_1` activations back to an image clamped to [0, 1].
    ///
    /// `Unpool` mode uses the `photo_decoder{level}` weights and needs the indices
    /// returned by the matching [`Network::encode`].
    pub fn decode(
        &self,
        features: &FeatureMap,
        level: EncoderLevel,
        mode: DecodeMode,
        indices: Option<&[PoolIndices]>,
    ) -> Result<Image> {
        let layers = self
            .decoders
            .get(&(mode.kind(), level))
            .ok_or_else(|| Error::manifest(format!("missing decoder tensors `{}*`", mode.kind().prefix(level))))?;
        let indices = match mode {
            DecodeMode::Unpool => {
                let idx = indices.ok_or_else(|| Error::argument("unpool decoding needs the encoder's pool indices"))?;
                if idx.len() != level.pool_count() {
                    return Err(Error::argument(format!(
                        "{level} decoding needs {} pool index sets, got {}",
                        level.pool_count(),
                        idx.len()
                    )));
                }
                Some(idx)
            }
            DecodeMode::Upsample => None,
        };
        if features.channels() != self.arch.channels(level) {
            return Err(Error::shape(format!(
                "{level} decoder expects {} channels, got {}",
                self.arch.channels(level),
                features.channels()
            )));
        }
        let mut x = features.clone();
        let mut pending = indices.map(|i| i.iter().rev());
        for layer in layers {
            x = match layer {
                Layer::Conv { conv, relu: r } => apply_conv(&x, conv, *r)?,
                Layer::Resample => match pending.as_mut() {
                    Some(it) => unpool(&x, it.next().expect("index count checked"))?,
                    None => upsample_nearest2(&x),
                },
            };
        }
        postprocess(&x)
    }

    fn check_level(&self, level: EncoderLevel) -> Result<()> {
        if level > self.depth {
            return Err(Error::manifest(format!("encoder weights stop before {level} (deepest: {})", self.depth)));
        }
        Ok(())
    }
}

fn apply_conv(x: &FeatureMap, conv: &Conv2d, with_relu: bool) -> Result<FeatureMap> {
    let y = conv.forward(x)?;
    Ok(if with_relu { relu(&y) } else { y })
}

fn build_layers(prefix: &str, specs: &[LayerSpec], store: &WeightStore) -> Result<Vec<Layer>> {
    specs
        .iter()
        .map(|spec| match spec {
            LayerSpec::Resample => Ok(Layer::Resample),
            LayerSpec::Conv(c) => Ok(Layer::Conv { conv: load_conv(prefix, c, store)?, relu: c.relu }),
        })
        .collect()
}

fn load_conv(prefix: &str, spec: &ConvSpec, store: &WeightStore) -> Result<Conv2d> {
    let wname = format!("{prefix}{}.weight", spec.name);
    let bname = format!("{prefix}{}.bias", spec.name);
    let w = store.get(&wname)?;
    let b = store.get(&bname)?;
    let shape = w.shape();
    let kernel_ok = shape.len() == 4 && shape[2] == shape[3] && matches!(shape[2], 1 | 3);
    if !kernel_ok || shape[0] != spec.out_channels || shape[1] != spec.in_channels {
        return Err(Error::manifest(format!(
            "`{wname}` has shape {shape:?}, expected [{}, {}, 3, 3] (or 1x1)",
            spec.out_channels, spec.in_channels
        )));
    }
    if b.shape() != [spec.out_channels] {
        return Err(Error::manifest(format!("`{bname}` has shape {:?}, expected [{}]", b.shape(), spec.out_channels)));
    }
    Conv2d::new(spec.out_channels, spec.in_channels, shape[2], w.data().to_vec(), b.data().to_vec())
}

/// RGB in [0, 1] to the VGG input convention: BGR order, scaled to [0, 255], mean removed.
pub fn preprocess(img: &Image) -> FeatureMap {
    let n = img.width() * img.height();
    let mut data = vec![0.0f32; 3 * n];
    for (i, p) in img.data().chunks_exact(3).enumerate() {
        for (c, mean) in VGG_MEAN_BGR.iter().enumerate() {
            data[c * n + i] = p[2 - c] * 255.0 - mean;
        }
    }
    FeatureMap::from_parts(3, img.height(), img.width(), data)
}

/// Inverse of [`preprocess`], clamping into [0, 1].
pub fn postprocess(x: &FeatureMap) -> Result<Image> {
    if x.channels() != 3 {
        return Err(Error::shape(format!("decoder produced {} channels, expected 3", x.channels())));
    }
    let n = x.plane_len();
    let mut data = Vec::with_capacity(3 * n);
    for i in 0..n {
        for c in 0..3 {
            let bgr = 2 - c;
            let v = (x.data()[bgr * n + i] + VGG_MEAN_BGR[bgr]) / 255.0;
            data.push(if v.is_finite() { v } else { 0.0 });
        }
    }
    Image::new(x.width(), x.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preprocess_round_trip() {
        let img = Image::from_fn(3, 2, |x, y| [x as f32 * 0.3, y as f32 * 0.5, 0.25]);
        let back = postprocess(&preprocess(&img)).unwrap();
        assert!(img.mean_abs_diff(&back).unwrap() < 1e-6);
    }

    #[test]
    fn preprocess_is_bgr_minus_mean() {
        let img = Image::filled(1, 1, [1.0, 0.0, 0.0]);
        let f = preprocess(&img);
        assert_eq!(f.data(), &[-103.939, -116.779, 255.0 - 123.68]);
    }

    #[test]
    fn empty_store_is_manifest_error() {
        assert!(matches!(Network::from_store(&WeightStore::default()), Err(Error::Manifest(_))));
    }
}
