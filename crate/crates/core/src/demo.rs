//! Hand-authored weights and a procedural image corpus for running the engine without
//! pretrained checkpoints.
//!
//! The demo network is a narrow VGG-shaped reconstruction network built from fixed
//! kernels. Every color value `x` travels as two strictly positive channels `B + x` and
//! `B − x` (offset `B`), so the ReLUs never clip, and `(U − V)/2` recovers `x`. A
//! constant channel rides along, and each block appends a few "probe" channels
//! (Laplacian, gradients, saddle of the luma). The encoder convolution in front of each
//! pooling is a binomial blur, so pooling sees band-limited features.
//!
//! Upsampling decoders blur after each upsample (bilinear interpolation overall). Their
//! first convolution smooths the colors by `gain·Δ` and subtracts `gain·Δ` of the luma,
//! read from the block's newest Laplacian probe. On the content's own features the two
//! nearly cancel; after a feature transform the probe carries the style's texture energy,
//! which is how structure from the style reaches the pixels.
//!
//! Unpooling decoders ignore the probes and only move color. Unpooled maps hold one value
//! per 2x2 cell at the position of the content's maximum, so the first convolution after
//! each unpooling gathers every cell's value into all four of its pixels: the constant
//! channel pools to the top-left corner of every cell (ties resolve to the first
//! position), which gives each pixel its parity, and a ReLU gate keeps only the 2x2 sum
//! aligned with the pixel's own cell.
//!
//! Level-1 reconstruction is exact with unpooling, and with upsampling at zero detail gain.

use std::f32::consts::PI;

use crate::error::{Error, Result};
use crate::neuralnet::{Architecture, ConvSpec, DecoderKind, EncoderLevel, LayerSpec, Tensor, WeightStore, MAX_LEVEL};
use crate::tensor::Image;

/// Default demo channel widths per block.
pub const DEMO_WIDTHS: [usize; MAX_LEVEL] = [12, 14, 16, 20, 24];

/// Default gain of the Laplacian probes added back by the upsampling decoders.
pub const DEMO_DETAIL_GAIN: f32 = 0.25;

/// `B + x` for the three input channels, then `B − x`.
const COLOR: usize = 6;
/// Index of the constant channel.
const CONST: usize = 6;
/// Minimum width of every block: color, constant, and the 4x3 gate outputs.
pub const MIN_WIDTH: usize = 12;

const OFFSET: f32 = 256.0;
/// Keeps unpooled color values positive.
const LIFT: f32 = 256.0;
/// Larger than any 2x2 sum of lifted values; closes the ReLU gate for other cells.
const GATE: f32 = 4096.0;

type Kernel = [f32; 9];

const CENTER: Kernel = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
const BLUR: Kernel =
    [1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0, 2.0 / 16.0, 4.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0];
const LAPLACIAN: usize = 0;
const PROBES: [Kernel; 4] = [
    [0.0, 0.125, 0.0, 0.125, -0.5, 0.125, 0.0, 0.125, 0.0],
    [0.0, 0.0, 0.0, -0.5, 0.0, 0.5, 0.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0],
    [0.25, 0.0, -0.25, 0.0, 0.0, 0.0, -0.25, 0.0, 0.25],
];

/// Parameters of the hand-authored network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoNet {
    /// Channel widths per block; non-decreasing, each at least [`MIN_WIDTH`].
    pub widths: [usize; MAX_LEVEL],
    pub detail_gain: f32,
}

impl Default for DemoNet {
    fn default() -> Self {
        Self { widths: DEMO_WIDTHS, detail_gain: DEMO_DETAIL_GAIN }
    }
}

/// [`DemoNet::weights`] with the default detail gain.
pub fn demo_weights(widths: [usize; MAX_LEVEL]) -> Result<WeightStore> {
    DemoNet { widths, ..DemoNet::default() }.weights()
}

impl DemoNet {
    /// Encoder through `relu5_1` plus upsampling and unpooling decoders for all levels.
    pub fn weights(&self) -> Result<WeightStore> {
        let widths = self.widths;
        if widths[0] < MIN_WIDTH || widths.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::argument(format!(
                "demo widths must be non-decreasing and at least {MIN_WIDTH}, got {widths:?}"
            )));
        }
        let arch = Architecture::with_widths(widths);
        let deepest = EncoderLevel::new(MAX_LEVEL)?;
        let mut tensors = Vec::new();

        let encoder = arch.encoder(deepest);
        for (i, layer) in encoder.iter().enumerate() {
            let LayerSpec::Conv(spec) = layer else { continue };
            let before_pool = matches!(encoder.get(i + 1), Some(LayerSpec::Resample));
            let conv = if spec.in_channels == 3 {
                input_conv(spec)
            } else if spec.name.ends_with("_1") {
                expand_conv(spec)
            } else {
                diagonal_conv(spec, if before_pool { &BLUR } else { &CENTER })
            };
            conv.push_into(&mut tensors, "", &spec.name)?;
        }

        for level in EncoderLevel::all() {
            let prefix = DecoderKind::Upsample.prefix(level);
            let decoder = arch.decoder(level);
            for (i, layer) in decoder.iter().enumerate() {
                let LayerSpec::Conv(spec) = layer else { continue };
                let after = i > 0 && matches!(decoder[i - 1], LayerSpec::Resample);
                let kernel = if i == 0 {
                    self.detail_kernel()
                } else if after {
                    BLUR
                } else {
                    CENTER
                };
                let mut conv =
                    if spec.out_channels == 3 { output_conv(spec, &kernel) } else { color_conv(spec, &kernel) };
                if i == 0 {
                    if let Some(probe) = newest_laplacian(&widths, level.get()) {
                        conv.add_detail(probe, self.detail_gain);
                    }
                }
                conv.push_into(&mut tensors, &prefix, &spec.name)?;
            }
        }

        for level in EncoderLevel::all() {
            let prefix = DecoderKind::Unpool.prefix(level);
            let decoder = arch.decoder(level);
            for (i, layer) in decoder.iter().enumerate() {
                let LayerSpec::Conv(spec) = layer else { continue };
                let after = i > 0 && matches!(decoder[i - 1], LayerSpec::Resample);
                let gathered = i > 1 && matches!(decoder[i - 2], LayerSpec::Resample);
                let conv = if i == 0 && spec.out_channels == 3 {
                    output_conv(spec, &CENTER)
                } else if i == 0 {
                    lift_conv(spec)
                } else if after {
                    gate_conv(spec)
                } else if gathered {
                    gather_conv(spec)
                } else {
                    carry_conv(spec)
                };
                conv.push_into(&mut tensors, &prefix, &spec.name)?;
            }
        }
        Ok(tensors.into_iter().collect())
    }
}

impl DemoNet {
    /// `I + gain·Δ` to second order; cancels the added Laplacian on smooth content.
    fn detail_kernel(&self) -> Kernel {
        let g = 4.0 * self.detail_gain;
        std::array::from_fn(|k| CENTER[k] + g * (BLUR[k] - CENTER[k]))
    }
}

/// Laplacian probe created by the last block of `level`, if that block adds probes.
fn newest_laplacian(widths: &[usize; MAX_LEVEL], level: usize) -> Option<usize> {
    let first = if level == 1 { CONST + 1 } else { widths[level - 2] };
    (widths[level - 1] > first + LAPLACIAN).then_some(first + LAPLACIAN)
}

struct ConvBuilder {
    out: usize,
    inp: usize,
    weight: Vec<f32>,
    bias: Vec<f32>,
}

impl ConvBuilder {
    fn new(spec: &ConvSpec) -> Self {
        let (out, inp) = (spec.out_channels, spec.in_channels);
        Self { out, inp, weight: vec![0.0; out * inp * 9], bias: vec![0.0; out] }
    }

    fn add(&mut self, o: usize, i: usize, kernel: &Kernel, scale: f32) {
        let base = (o * self.inp + i) * 9;
        for (w, k) in self.weight[base..base + 9].iter_mut().zip(kernel) {
            *w += k * scale;
        }
    }

    /// Adds `−gain·Δ` of the luma, read from a probe channel, to the colors this conv
    /// produces.
    fn add_detail(&mut self, probe: usize, gain: f32) {
        // The probe kernel is the 5-point Laplacian divided by 8.
        let g = 8.0 * gain;
        for c in 0..3 {
            self.add(c, probe, &CENTER, -g);
            self.bias[c] += g * OFFSET;
            if self.out > 3 {
                self.add(3 + c, probe, &CENTER, g);
                self.bias[3 + c] -= g * OFFSET;
            }
        }
    }

    fn push_into(self, tensors: &mut Vec<(String, Tensor)>, prefix: &str, name: &str) -> Result<()> {
        tensors.push((format!("{prefix}{name}.weight"), Tensor::new(vec![self.out, self.inp, 3, 3], self.weight)?));
        tensors.push((format!("{prefix}{name}.bias"), Tensor::new(vec![self.out], self.bias)?));
        Ok(())
    }
}

fn input_conv(spec: &ConvSpec) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..3 {
        b.add(c, c, &CENTER, 1.0);
        b.add(3 + c, c, &CENTER, -1.0);
        b.bias[c] = OFFSET;
        b.bias[3 + c] = OFFSET;
    }
    b.bias[CONST] = OFFSET;
    for (j, o) in (CONST + 1..b.out).enumerate() {
        for c in 0..3 {
            b.add(o, c, &PROBES[j % PROBES.len()], 1.0 / 3.0);
        }
        b.bias[o] = OFFSET;
    }
    b
}

/// First conv of a block: carries every incoming channel and appends new probes of the
/// luma `Σ_c (U_c − V_c) / 6`.
fn expand_conv(spec: &ConvSpec) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..b.inp.min(b.out) {
        b.add(c, c, &CENTER, 1.0);
    }
    for (j, o) in (b.inp..b.out).enumerate() {
        for c in 0..3 {
            b.add(o, c, &PROBES[j % PROBES.len()], 1.0 / 6.0);
            b.add(o, 3 + c, &PROBES[j % PROBES.len()], -1.0 / 6.0);
        }
        b.bias[o] = OFFSET;
    }
    b
}

fn diagonal_conv(spec: &ConvSpec, kernel: &Kernel) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..b.inp.min(b.out) {
        b.add(c, c, kernel, 1.0);
    }
    b
}

/// Filters the color channels and drops everything else.
fn color_conv(spec: &ConvSpec, kernel: &Kernel) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..COLOR {
        b.add(c, c, kernel, 1.0);
    }
    b
}

/// `x = (U − V)/2`, after an optional filter.
fn output_conv(spec: &ConvSpec, kernel: &Kernel) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..3 {
        b.add(c, c, kernel, 0.5);
        b.add(c, 3 + c, kernel, -0.5);
    }
    b
}

/// `(U, V) → x + LIFT` in channels 0..3, plus the constant `GATE` channel.
fn lift_conv(spec: &ConvSpec) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..3 {
        b.add(c, c, &CENTER, 0.5);
        b.add(c, 3 + c, &CENTER, -0.5);
        b.bias[c] = LIFT;
    }
    b.bias[CONST] = GATE;
    b
}

/// Passes the lifted colors and re-emits the constant channel.
fn carry_conv(spec: &ConvSpec) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..3 {
        b.add(c, c, &CENTER, 1.0);
    }
    b.bias[CONST] = GATE;
    b
}

/// Right after unpooling: for each of the four pixel parities `(py, px)`, the 2x2 sum of
/// the cell whose top-left corner sits at `(−py, −px)`, gated open only where the
/// unpooled constant channel marks that corner. Output channel `4c + parity`.
fn gate_conv(spec: &ConvSpec) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for (q, (py, px)) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        let mut cell = [0.0f32; 9];
        for dy in 0..2 {
            for dx in 0..2 {
                cell[(1 - py + dy) * 3 + (1 - px + dx)] = 1.0;
            }
        }
        let mut corner = [0.0f32; 9];
        corner[(1 - py) * 3 + (1 - px)] = 1.0;
        for c in 0..3 {
            let o = 4 * c + q;
            b.add(o, c, &cell, 1.0);
            b.add(o, CONST, &corner, 1.0);
            b.bias[o] = -GATE;
        }
    }
    b
}

/// Sums the four gated parities back into one lifted color per channel, then smooths.
fn gather_conv(spec: &ConvSpec) -> ConvBuilder {
    let mut b = ConvBuilder::new(spec);
    for c in 0..3 {
        for q in 0..4 {
            b.add(c, 4 * c + q, &BLUR, 1.0);
        }
        if b.out == 3 {
            b.bias[c] = -LIFT;
        }
    }
    if b.out > CONST {
        b.bias[CONST] = GATE;
    }
    b
}

/// Named images for evaluation and benchmarking.
#[derive(Debug, Clone)]
pub struct DemoCorpus {
    pub contents: Vec<(String, Image)>,
    pub styles: Vec<(String, Image)>,
}

/// `count` smooth photo-like content scenes and `count` textured style images.
pub fn demo_corpus(width: usize, height: usize, count: usize) -> DemoCorpus {
    DemoCorpus {
        contents: (0..count).map(|i| (format!("content_{i:02}"), content_scene(width, height, i))).collect(),
        styles: (0..count).map(|i| (format!("style_{i:02}"), style_texture(width, height, i))).collect(),
    }
}

/// Deterministic low-discrepancy value in [0, 1) for scene parameters.
fn param(i: usize, k: usize) -> f32 {
    let v = (i as f64 + 1.0) * 0.618_033_988_75 + (k as f64 + 1.0) * 0.414_213_562_37 * (i as f64 + 2.0);
    (v - v.floor()) as f32
}

fn palette(t: f32) -> [f32; 3] {
    [
        0.5 + 0.4 * (2.0 * PI * t).cos(),
        0.5 + 0.4 * (2.0 * PI * (t + 0.33)).cos(),
        0.5 + 0.4 * (2.0 * PI * (t + 0.67)).cos(),
    ]
}

fn mix(a: [f32; 3], b: [f32; 3], t: f32) -> [f32; 3] {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
}

fn smoothstep(e0: f32, e1: f32, x: f32) -> f32 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Integer-lattice hash in [0, 1) for value noise.
fn lattice(ix: i64, iy: i64, seed: u64) -> f32 {
    let mut h = (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ seed.wrapping_mul(0x1656_67B1_9E37_79F9);
    h ^= h >> 31;
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 29;
    (h >> 40) as f32 / (1u64 << 24) as f32
}

/// Smoothly interpolated value noise at `cell` pixels per lattice step.
fn value_noise(x: f32, y: f32, cell: f32, seed: u64) -> f32 {
    let (fx, fy) = (x / cell, y / cell);
    let (ix, iy) = (fx.floor(), fy.floor());
    let (tx, ty) = (smoothstep(0.0, 1.0, fx - ix), smoothstep(0.0, 1.0, fy - iy));
    let (ix, iy) = (ix as i64, iy as i64);
    let top = lattice(ix, iy, seed) + (lattice(ix + 1, iy, seed) - lattice(ix, iy, seed)) * tx;
    let bottom = lattice(ix, iy + 1, seed) + (lattice(ix + 1, iy + 1, seed) - lattice(ix, iy + 1, seed)) * tx;
    top + (bottom - top) * ty
}

/// Four octaves of value noise, from 32-pixel to 4-pixel features, in [0, 1].
fn fractal_noise(x: f32, y: f32, seed: u64) -> f32 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    for (octave, cell) in [32.0, 16.0, 8.0, 4.0].into_iter().enumerate() {
        let amp = 0.5f32.powi(octave as i32);
        sum += amp * value_noise(x, y, cell, seed + octave as u64);
        norm += amp;
    }
    sum / norm
}

/// A photo-like scene: a vertical gradient, a few crisp shaded shapes, and fractal
/// surface detail.
pub fn content_scene(width: usize, height: usize, index: usize) -> Image {
    let top = palette(param(index, 0));
    let bottom = palette(param(index, 1));
    let blobs: Vec<([f32; 2], [f32; 2], [f32; 3])> = (0..4)
        .map(|k| {
            let center = [0.15 + 0.7 * param(index, 2 + 3 * k), 0.15 + 0.7 * param(index, 3 + 3 * k)];
            let radius = [0.12 + 0.18 * param(index, 4 + 3 * k), 0.1 + 0.15 * param(index, 5 + 3 * k)];
            (center, radius, palette(param(index, 20 + k)))
        })
        .collect();
    let scale = width.max(height) as f32;
    let seed = index as u64 * 101 + 7;
    Image::from_fn(width, height, |x, y| {
        let (u, v) = (x as f32 / width as f32, y as f32 / height as f32);
        let mut rgb = mix(top, bottom, v);
        for (center, radius, color) in &blobs {
            let dx = (u - center[0]) / radius[0];
            let dy = (v - center[1]) / radius[1];
            let r = (dx * dx + dy * dy).sqrt();
            // Edges about 1.5 pixels wide regardless of image size.
            let edge = 1.5 / (scale * radius[0].min(radius[1]));
            let inside = 1.0 - smoothstep(1.0 - edge, 1.0 + edge, r);
            let shade = 1.0 - 0.25 * dy.clamp(-1.0, 1.0);
            let c = [color[0] * shade, color[1] * shade, color[2] * shade];
            rgb = mix(rgb, c, inside);
        }
        let detail = fractal_noise(x as f32, y as f32, seed) - 0.5;
        rgb.map(|c| (c + 0.35 * detail).clamp(0.0, 1.0))
    })
}

/// Periodic patterns (stripes, checks, waves, rings, plaid) in saturated palettes.
const GRAIN: f32 = 0.2;

pub fn style_texture(width: usize, height: usize, index: usize) -> Image {
    let a = palette(param(index, 7));
    let b = palette(param(index, 8) + 0.5);
    let c = palette(param(index, 9) + 0.25);
    let period = 10.0 + 20.0 * param(index, 10);
    let angle = PI * param(index, 11);
    let (ca, sa) = (angle.cos(), angle.sin());
    let kind = index % 5;
    Image::from_fn(width, height, |x, y| {
        let (x, y) = (x as f32, y as f32);
        let s = (x * ca + y * sa) / period;
        let t = (-x * sa + y * ca) / period;
        let w = match kind {
            0 => 0.5 + 0.5 * (2.0 * PI * s).sin(),
            1 => {
                if ((s.floor() + t.floor()) as i64).rem_euclid(2) == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            2 => 0.5 + 0.5 * (2.0 * PI * (s + 0.3 * (2.0 * PI * t / 3.0).sin())).sin(),
            3 => {
                let r = ((x - width as f32 / 2.0).powi(2) + (y - height as f32 / 2.0).powi(2)).sqrt();
                0.5 + 0.5 * (2.0 * PI * r / period).sin()
            }
            _ => 0.25 * (2.0 + (2.0 * PI * s).sin() + (2.0 * PI * t).sin()),
        };
        let accent = 0.5 + 0.5 * (2.0 * PI * (s * 0.37 + t * 0.23)).sin();
        // Canvas grain.
        let grain = GRAIN * (value_noise(x, y, 2.0, 1000 + index as u64) - 0.5);
        mix(mix(a, b, w), c, 0.35 * accent).map(|v| (v + grain).clamp(0.0, 1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::{DecodeMode, Network};

    fn small_net() -> Network {
        Network::from_store(&demo_weights(DEMO_WIDTHS).unwrap()).unwrap()
    }

    #[test]
    fn full_manifest_is_present() {
        let net = small_net();
        assert_eq!(net.depth().get(), 5);
        for level in EncoderLevel::all() {
            assert!(net.has_decoder(level, DecodeMode::Upsample));
            assert!(net.has_decoder(level, DecodeMode::Unpool));
        }
    }

    #[test]
    fn level_one_reconstruction_is_exact() {
        let plain = DemoNet { detail_gain: 0.0, ..DemoNet::default() };
        let img = content_scene(32, 24, 1);
        let l1 = EncoderLevel::new(1).unwrap();
        for (net, mode) in [
            (Network::from_store(&plain.weights().unwrap()).unwrap(), DecodeMode::Upsample),
            (small_net(), DecodeMode::Unpool),
        ] {
            let enc = net.encode(&img, l1).unwrap();
            let out = net.decode(&enc.features, l1, mode, Some(&enc.indices)).unwrap();
            assert!(out.mean_abs_diff(&img).unwrap() < 1e-4);
        }
    }

    #[test]
    fn features_stay_positive() {
        let net = small_net();
        let img = style_texture(48, 32, 1);
        for level in EncoderLevel::all() {
            let enc = net.encode(&img, level).unwrap();
            assert!(enc.features.data().iter().all(|&v| v > 0.0), "{level}");
        }
    }

    #[test]
    fn constant_image_reconstructs_at_every_level() {
        let net = small_net();
        let img = Image::filled(32, 32, [0.2, 0.5, 0.7]);
        for level in EncoderLevel::all() {
            let enc = net.encode(&img, level).unwrap();
            for mode in [DecodeMode::Upsample, DecodeMode::Unpool] {
                let out = net.decode(&enc.features, level, mode, Some(&enc.indices)).unwrap();
                assert!(out.mean_abs_diff(&img).unwrap() < 1e-4, "{level} {mode:?}");
            }
        }
    }

    #[test]
    fn rejects_narrow_widths() {
        assert!(demo_weights([8, 16, 16, 16, 16]).is_err());
        assert!(demo_weights([16, 12, 16, 16, 16]).is_err());
        assert!(DemoNet { widths: [12; 5], detail_gain: 0.0 }.weights().is_ok());
    }

    #[test]
    fn corpus_is_deterministic_and_in_range() {
        let a = demo_corpus(40, 30, 3);
        let b = demo_corpus(40, 30, 3);
        assert_eq!(a.contents.len(), 3);
        for ((_, x), (_, y)) in a.styles.iter().zip(&b.styles) {
            assert_eq!(x, y);
        }
        assert!(a.contents[0].1.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
