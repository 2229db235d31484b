//! Forward-only CNN layers over [`FeatureMap`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::FeatureMap;

/// A square-kernel convolution with stride 1 and reflection padding.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    out_channels: usize,
    in_channels: usize,
    kernel: usize,
    /// (out, in, k, k) row-major, i.e. a `out x (in*k*k)` matrix.
    weight: Vec<f32>,
    bias: Vec<f32>,
}

impl Conv2d {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        weight: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<Self> {
        if kernel == 0 || kernel.is_multiple_of(2) {
            return Err(Error::shape(format!("kernel size must be odd, got {kernel}")));
        }
        if weight.len() != out_channels * in_channels * kernel * kernel {
            return Err(Error::shape(format!(
                "conv weight has {} values, expected {out_channels}x{in_channels}x{kernel}x{kernel}",
                weight.len()
            )));
        }
        if bias.len() != out_channels {
            return Err(Error::shape(format!("conv bias has {} values, expected {out_channels}", bias.len())));
        }
        Ok(Self { out_channels, in_channels, kernel, weight, bias })
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn weight(&self) -> &[f32] {
        &self.weight
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn forward(&self, input: &FeatureMap) -> Result<FeatureMap> {
        conv2d(input, self)
    }
}

/// Index into a dimension of length `n` with mirror reflection (no edge repeat).
/// A length-1 dimension has nothing to reflect and clamps instead.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let mut i = i;
    // Loop handles pads wider than the dimension (1x1 maps under 3x3 kernels).
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Target number of output pixels per im2col block.
const BLOCK_PIXELS: usize = 8192;

/// Stride-1 cross-correlation with reflection padding; output keeps the input's spatial size.
///
/// Rows are processed in fixed-size blocks (independent of the thread count): each block is
/// unrolled into a column buffer and multiplied by the kernel matrix, so results are
/// identical however rayon schedules the blocks.
pub fn conv2d(input: &FeatureMap, conv: &Conv2d) -> Result<FeatureMap> {
    if input.channels() != conv.in_channels {
        return Err(Error::shape(format!(
            "conv expects {} input channels, got {}",
            conv.in_channels,
            input.channels()
        )));
    }
    let (h, w) = (input.height(), input.width());
    let plane = h * w;
    let cout = conv.out_channels;
    if plane == 0 {
        return Ok(FeatureMap::zeros(cout, h, w));
    }
    let k = conv.kernel;
    let depth = conv.in_channels * k * k;
    let rows_per_block = (BLOCK_PIXELS / w).max(1);
    let blocks: Vec<(usize, usize)> =
        (0..h).step_by(rows_per_block).map(|y0| (y0, (y0 + rows_per_block).min(h))).collect();

    let results: Vec<Vec<f32>> = blocks
        .par_iter()
        .map(|&(y0, y1)| {
            let cols = (y1 - y0) * w;
            let mut out = vec![0.0f32; cout * cols];
            if k == 1 {
                // Column matrix is the input block itself, one strided view per channel.
                let mut col = vec![0.0f32; depth * cols];
                for ci in 0..conv.in_channels {
                    col[ci * cols..(ci + 1) * cols].copy_from_slice(&input.channel(ci)[y0 * w..y1 * w]);
                }
                sgemm(cout, depth, cols, &conv.weight, &col, &mut out);
            } else {
                let col = im2col(input, k, y0, y1);
                sgemm(cout, depth, cols, &conv.weight, &col, &mut out);
            }
            for (co, row) in out.chunks_mut(cols).enumerate() {
                let b = conv.bias[co];
                row.iter_mut().for_each(|v| *v += b);
            }
            out
        })
        .collect();

    let mut data = vec![0.0f32; cout * plane];
    for (&(y0, y1), block) in blocks.iter().zip(&results) {
        let cols = (y1 - y0) * w;
        for co in 0..cout {
            data[co * plane + y0 * w..co * plane + y1 * w].copy_from_slice(&block[co * cols..(co + 1) * cols]);
        }
    }
    Ok(FeatureMap::from_parts(cout, h, w, data))
}

/// Unrolls output rows `y0..y1` into a `(C*k*k) x ((y1-y0)*W)` column matrix.
fn im2col(input: &FeatureMap, k: usize, y0: usize, y1: usize) -> Vec<f32> {
    let (h, w) = (input.height(), input.width());
    let pad = (k / 2) as isize;
    let cols = (y1 - y0) * w;
    let mut col = vec![0.0f32; input.channels() * k * k * cols];
    // Precomputed reflected column indices for each horizontal tap.
    let xmap: Vec<Vec<usize>> =
        (0..k).map(|kx| (0..w).map(|x| reflect(x as isize + kx as isize - pad, w)).collect()).collect();
    for ci in 0..input.channels() {
        let src = input.channel(ci);
        for ky in 0..k {
            for (kx, xs) in xmap.iter().enumerate() {
                let base = ((ci * k + ky) * k + kx) * cols;
                for y in y0..y1 {
                    let sy = reflect(y as isize + ky as isize - pad, h);
                    let src_row = &src[sy * w..(sy + 1) * w];
                    let dst = &mut col[base + (y - y0) * w..base + (y - y0 + 1) * w];
                    for (d, &sx) in dst.iter_mut().zip(xs) {
                        *d = src_row[sx];
                    }
                }
            }
        }
    }
    col
}

fn sgemm(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32]) {
    if k == 0 {
        c.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    // SAFETY: all three buffers are row-major with the strides given here.
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub fn relu(input: &FeatureMap) -> FeatureMap {
    let data = input.data().iter().map(|&v| v.max(0.0)).collect();
    FeatureMap::from_parts(input.channels(), input.height(), input.width(), data)
}

/// Argmax offsets recorded by [`maxpool2`], one per pooled element.
///
/// Each offset is `dy * 2 + dx` inside its 2x2 window, so it can never point outside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolIndices {
    channels: usize,
    /// Spatial size of the map *before* pooling.
    height: usize,
    width: usize,
    offsets: Vec<u8>,
}

impl PoolIndices {
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn input_height(&self) -> usize {
        self.height
    }

    pub fn input_width(&self) -> usize {
        self.width
    }

    pub fn offsets(&self) -> &[u8] {
        &self.offsets
    }

    /// Absolute (y, x) of the argmax for pooled element `(c, oy, ox)`.
    pub fn position(&self, c: usize, oy: usize, ox: usize) -> (usize, usize) {
        let ow = self.width / 2;
        let off = self.offsets[(c * (self.height / 2) + oy) * ow + ox];
        (2 * oy + usize::from(off / 2), 2 * ox + usize::from(off % 2))
    }
}

/// 2x2 max pooling with stride 2. Ties go to the first position in row-major scan order.
pub fn maxpool2(input: &FeatureMap) -> Result<(FeatureMap, PoolIndices)> {
    let (c, h, w) = (input.channels(), input.height(), input.width());
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::shape(format!("max pooling needs even dimensions, got {h}x{w}")));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut data = Vec::with_capacity(c * oh * ow);
    let mut offsets = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let src = input.channel(ch);
        for oy in 0..oh {
            let r0 = &src[2 * oy * w..(2 * oy + 1) * w];
            let r1 = &src[(2 * oy + 1) * w..(2 * oy + 2) * w];
            for ox in 0..ow {
                let window = [r0[2 * ox], r0[2 * ox + 1], r1[2 * ox], r1[2 * ox + 1]];
                let mut best = 0u8;
                for i in 1..4u8 {
                    if window[usize::from(i)] > window[usize::from(best)] {
                        best = i;
                    }
                }
                data.push(window[usize::from(best)]);
                offsets.push(best);
            }
        }
    }
    Ok((FeatureMap::from_parts(c, oh, ow, data), PoolIndices { channels: c, height: h, width: w, offsets }))
}

/// Nearest-neighbour 2x upsampling.
pub fn upsample_nearest2(input: &FeatureMap) -> FeatureMap {
    let (c, h, w) = (input.channels(), input.height(), input.width());
    let (oh, ow) = (2 * h, 2 * w);
    let mut data = vec![0.0f32; c * oh * ow];
    for ch in 0..c {
        let src = input.channel(ch);
        let dst = &mut data[ch * oh * ow..(ch + 1) * oh * ow];
        for y in 0..oh {
            let srow = &src[(y / 2) * w..(y / 2 + 1) * w];
            for (x, d) in dst[y * ow..(y + 1) * ow].iter_mut().enumerate() {
                *d = srow[x / 2];
            }
        }
    }
    FeatureMap::from_parts(c, oh, ow, data)
}

/// Scatters each value to the argmax position recorded by the matching [`maxpool2`];
/// the other three positions of every window are zero.
pub fn unpool(input: &FeatureMap, indices: &PoolIndices) -> Result<FeatureMap> {
    let (c, h, w) = (input.channels(), input.height(), input.width());
    if indices.channels != c || indices.height != 2 * h || indices.width != 2 * w {
        return Err(Error::shape(format!(
            "pool indices for {}x{}x{} cannot unpool a {c}x{h}x{w} map",
            indices.channels, indices.height, indices.width
        )));
    }
    let (oh, ow) = (2 * h, 2 * w);
    let mut data = vec![0.0f32; c * oh * ow];
    for ch in 0..c {
        let src = input.channel(ch);
        for oy in 0..h {
            for ox in 0..w {
                let (y, x) = indices.position(ch, oy, ox);
                data[(ch * oh + y) * ow + x] = src[oy * w + ox];
            }
        }
    }
    Ok(FeatureMap::from_parts(c, oh, ow, data))
}
