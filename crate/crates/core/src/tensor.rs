//! Dense containers shared by every stage of the engine.
//!
//! All spatial data uses one canonical layout: row-major, channel-major
//! (C -> H -> W) for feature maps and interleaved RGB (H -> W -> 3) for images.
//! Feature maps store `f32`; the statistics view ([`FeatureMatrix`]) and the
//! small square matrices derived from it store `f64`.

use crate::error::{Error, Result};

/// A C x H x W activation tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FeatureMap {
    /// Validating constructor: length must equal C*H*W and every element must be finite.
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::shape(format!(
                "feature map {channels}x{height}x{width} needs {} values, got {}",
                channels * height * width,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::argument(format!("non-finite activation at flat index {i}")));
        }
        Ok(Self { channels, height, width, data })
    }

    /// Layer outputs are finite by construction when their inputs are; only checked in debug builds.
    pub(crate) fn from_parts(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), channels * height * width);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { channels, height, width, data }
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::from_parts(channels, height, width, vec![0.0; channels * height * width])
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn at(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn same_shape(&self, other: &FeatureMap) -> bool {
        self.channels == other.channels && self.height == other.height && self.width == other.width
    }
}

/// N x M statistics view of a feature map: one row per channel, one column per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "feature matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("ragged rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// Adds `mean[r]` to every element of row `r`.
    pub fn add_row_offsets(&self, mean: &[f64]) -> Result<FeatureMatrix> {
        if mean.len() != self.rows {
            return Err(Error::shape(format!("offset vector has {} entries for {} rows", mean.len(), self.rows)));
        }
        let mut out = self.clone();
        for (row, m) in out.data.chunks_mut(self.cols.max(1)).zip(mean) {
            row.iter_mut().for_each(|v| *v += m);
        }
        Ok(out)
    }
}

/// Small dense `f64` matrix (Gram, covariance, eigenvectors, transforms).
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!("matrix {rows}x{cols} needs {} values, got {}", rows * cols, data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("ragged rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`; panics on shape mismatch.
    pub fn frobenius_distance(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        dgemm(self.rows, self.cols, other.cols, &self.data, &other.data, &mut out.data);
        Ok(out)
    }

    /// `self · F` for a feature matrix with as many rows as `self` has columns.
    pub fn apply(&self, f: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.cols != f.rows() {
            return Err(Error::shape(format!(
                "cannot apply {}x{} transform to {} feature rows",
                self.rows,
                self.cols,
                f.rows()
            )));
        }
        let mut out = vec![0.0; self.rows * f.cols()];
        dgemm(self.rows, self.cols, f.cols(), &self.data, f.data(), &mut out);
        FeatureMatrix::new(self.rows, f.cols(), out)
    }
}

/// Row-major `c = a(m×k) · b(k×n)`.
pub(crate) fn dgemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    // SAFETY: slice lengths match the row-major strides passed below.
    unsafe {
        matrixmultiply::dgemm(
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

/// Row-major `c = a(m×k) · a(m×k)ᵀ`.
pub(crate) fn dgemm_aat(m: usize, k: usize, a: &[f64], c: &mut [f64]) {
    if m == 0 {
        return;
    }
    if k == 0 {
        c.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    // SAFETY: the transpose is expressed through strides over the same buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            m,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            a.as_ptr(),
            1,
            k as isize,
            0.0,
            c.as_mut_ptr(),
            m as isize,
            1,
        );
    }
    // Symmetrize exactly; the kernel may round the two triangles differently.
    for i in 0..m {
        for j in (i + 1)..m {
            let v = 0.5 * (c[i * m + j] + c[j * m + i]);
            c[i * m + j] = v;
            c[j * m + i] = v;
        }
    }
}

/// Flattens each channel to one row.
pub fn to_matrix(f: &FeatureMap) -> FeatureMatrix {
    FeatureMatrix { rows: f.channels, cols: f.plane_len(), data: f.data.iter().map(|&v| f64::from(v)).collect() }
}

/// Inverse of [`to_matrix`] for the given spatial size.
pub fn from_matrix(m: &FeatureMatrix, height: usize, width: usize) -> Result<FeatureMap> {
    if m.cols != height * width {
        return Err(Error::shape(format!("{} columns cannot be viewed as {height}x{width}", m.cols)));
    }
    FeatureMap::new(m.rows, height, width, m.data.iter().map(|&v| v as f32).collect())
}

/// Per-channel mean and population variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub mean: f64,
    pub variance: f64,
}

impl ChannelStats {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn channel_stats(f: &FeatureMap) -> Result<Vec<ChannelStats>> {
    let n = f.plane_len();
    if n == 0 {
        return Err(Error::DegenerateInput("channel statistics of an empty plane".into()));
    }
    Ok((0..f.channels).map(|c| slice_stats(f.channel(c).iter().map(|&v| f64::from(v)), n)).collect())
}

pub(crate) fn slice_stats(values: impl Iterator<Item = f64> + Clone, n: usize) -> ChannelStats {
    let mean = values.clone().sum::<f64>() / n as f64;
    let variance = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    ChannelStats { mean, variance }
}

/// Subtracts each row's mean; returns the centered matrix and the mean vector.
pub fn center(m: &FeatureMatrix) -> Result<(FeatureMatrix, Vec<f64>)> {
    if m.cols == 0 {
        return Err(Error::DegenerateInput("cannot center a matrix with no columns".into()));
    }
    let mut out = m.clone();
    let mut means = Vec::with_capacity(m.rows);
    for row in out.data.chunks_mut(m.cols) {
        let mean = row.iter().sum::<f64>() / m.cols as f64;
        row.iter_mut().for_each(|v| *v -= mean);
        means.push(mean);
    }
    Ok((out, means))
}

/// H x W RGB raster with every component in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

impl Image {
    /// Interleaved RGB data; values are clamped into [0, 1], non-finite values rejected.
    pub fn new(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::shape(format!(
                "{width}x{height} RGB image needs {} values, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Image("non-finite pixel value".into()));
        }
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let rgb = rgb.map(|v| v.clamp(0.0, 1.0));
        Self { width, height, data: std::iter::repeat_n(rgb, width * height).flatten().collect() }
    }

    /// Builds an image from a per-pixel function returning RGB.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 }));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// ITU-R BT.601 luma plane, row-major.
    pub fn luma(&self) -> Vec<f64> {
        self.data
            .chunks_exact(3)
            .map(|p| {
                LUMA_WEIGHTS[0] * f64::from(p[0])
                    + LUMA_WEIGHTS[1] * f64::from(p[1])
                    + LUMA_WEIGHTS[2] * f64::from(p[2])
            })
            .collect()
    }

    /// One plane per color channel (R, G, B).
    pub fn planes(&self) -> [Vec<f32>; 3] {
        let mut planes = [
            Vec::with_capacity(self.width * self.height),
            Vec::with_capacity(self.width * self.height),
            Vec::with_capacity(self.width * self.height),
        ];
        for p in self.data.chunks_exact(3) {
            for c in 0..3 {
                planes[c].push(p[c]);
            }
        }
        planes
    }

    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f32>; 3]) -> Result<Self> {
        let n = width * height;
        if planes.iter().any(|p| p.len() != n) {
            return Err(Error::shape("plane length does not match image size"));
        }
        let mut data = Vec::with_capacity(n * 3);
        for ((&r, &g), &b) in planes[0].iter().zip(&planes[1]).zip(&planes[2]) {
            data.extend([r, g, b]);
        }
        Image::new(width, height, data)
    }

    /// Pads right/bottom by edge replication up to the next multiple of `multiple`.
    pub fn pad_to_multiple(&self, multiple: usize) -> Image {
        let w = self.width.div_ceil(multiple).max(1) * multiple;
        let h = self.height.div_ceil(multiple).max(1) * multiple;
        if w == self.width && h == self.height {
            return self.clone();
        }
        Image::from_fn(w, h, |x, y| self.pixel(x.min(self.width - 1), y.min(self.height - 1)))
    }

    /// Top-left `width x height` window.
    pub fn crop(&self, width: usize, height: usize) -> Result<Image> {
        if width > self.width || height > self.height {
            return Err(Error::shape(format!("cannot crop {}x{} image to {width}x{height}", self.width, self.height)));
        }
        Ok(Image::from_fn(width, height, |x, y| self.pixel(x, y)))
    }

    pub fn mean_abs_diff(&self, other: &Image) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::shape("image sizes differ"));
        }
        let sum: f64 = self.data.iter().zip(&other.data).map(|(a, b)| f64::from((a - b).abs())).sum();
        Ok(sum / self.data.len().max(1) as f64)
    }
}
