//! Edge-aware smoothing for the photorealistic method's second step.
//!
//! A guided filter with a grayscale guide: inside every `(2r+1)²` window the output is
//! modeled as `a·I + b` with `I` the guide luma, so pixels with similar guide content end
//! up stylized alike while guide edges survive.

use crate::error::{Error, Result};
use crate::tensor::Image;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidedFilter {
    pub radius: usize,
    pub epsilon: f64,
}

impl Default for GuidedFilter {
    fn default() -> Self {
        Self { radius: 7, epsilon: 1e-4 }
    }
}

impl GuidedFilter {
    pub fn apply(&self, input: &Image, guide: &Image) -> Result<Image> {
        let (w, h) = (input.width(), input.height());
        if guide.width() != w || guide.height() != h {
            return Err(Error::shape(format!("guide is {}x{}, input is {w}x{h}", guide.width(), guide.height())));
        }
        let guide_luma = guide.luma();
        let boxf = BoxFilter::new(w, h, self.radius);
        let mean_i = boxf.mean(&guide_luma);
        let ii: Vec<f64> = guide_luma.iter().map(|v| v * v).collect();
        let var_i: Vec<f64> = boxf.mean(&ii).iter().zip(&mean_i).map(|(m2, m)| (m2 - m * m).max(0.0)).collect();

        let planes = input.planes();
        let mut out: [Vec<f32>; 3] = Default::default();
        for (c, plane) in planes.iter().enumerate() {
            let p: Vec<f64> = plane.iter().map(|&v| f64::from(v)).collect();
            let ip: Vec<f64> = p.iter().zip(&guide_luma).map(|(a, b)| a * b).collect();
            let mean_p = boxf.mean(&p);
            let mean_ip = boxf.mean(&ip);
            let mut a = vec![0.0; w * h];
            let mut b = vec![0.0; w * h];
            for k in 0..w * h {
                let cov = mean_ip[k] - mean_i[k] * mean_p[k];
                a[k] = cov / (var_i[k] + self.epsilon);
                b[k] = mean_p[k] - a[k] * mean_i[k];
            }
            let mean_a = boxf.mean(&a);
            let mean_b = boxf.mean(&b);
            out[c] = (0..w * h).map(|k| (mean_a[k] * guide_luma[k] + mean_b[k]).clamp(0.0, 1.0) as f32).collect();
        }
        Image::from_planes(w, h, &out)
    }
}

/// Guided filter with the default radius 7 and regularization 1e-4.
pub fn smooth(stylized: &Image, guide: &Image) -> Result<Image> {
    GuidedFilter::default().apply(stylized, guide)
}

/// Windowed mean via a summed-area table; windows are clipped at the borders.
struct BoxFilter {
    width: usize,
    height: usize,
    radius: usize,
}

impl BoxFilter {
    fn new(width: usize, height: usize, radius: usize) -> Self {
        Self { width, height, radius }
    }

    fn mean(&self, src: &[f64]) -> Vec<f64> {
        let (w, h, r) = (self.width, self.height, self.radius);
        let stride = w + 1;
        let mut sat = vec![0.0f64; (h + 1) * stride];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += src[y * w + x];
                sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
            }
        }
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
            for x in 0..w {
                let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
                let sum = sat[y1 * stride + x1] - sat[y0 * stride + x1] - sat[y1 * stride + x0] + sat[y0 * stride + x0];
                out[y * w + x] = sum / ((y1 - y0) * (x1 - x0)) as f64;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_mean_matches_direct_sum() {
        let (w, h) = (6, 5);
        let src: Vec<f64> = (0..w * h).map(|i| ((i * 7) % 11) as f64).collect();
        let got = BoxFilter::new(w, h, 1).mean(&src);
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                let mut n = 0.0;
                for yy in y.saturating_sub(1)..(y + 2).min(h) {
                    for xx in x.saturating_sub(1)..(x + 2).min(w) {
                        s += src[yy * w + xx];
                        n += 1.0;
                    }
                }
                assert!((got[y * w + x] - s / n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_input_is_unchanged() {
        let input = Image::filled(20, 12, [0.3, 0.6, 0.9]);
        let out = smooth(&input, &input).unwrap();
        assert!(out.mean_abs_diff(&input).unwrap() < 1e-6);
    }

    #[test]
    fn impulse_on_flat_region_is_suppressed() {
        let guide = Image::filled(31, 31, [0.5, 0.5, 0.5]);
        let input = Image::from_fn(31, 31, |x, y| if (x, y) == (15, 15) { [1.0, 1.0, 1.0] } else { [0.5, 0.5, 0.5] });
        let out = smooth(&input, &guide).unwrap();
        let residual = (out.pixel(15, 15)[0] - 0.5).abs();
        assert!(residual < 0.1 * 0.5, "residual {residual}");
    }

    #[test]
    fn size_mismatch() {
        let a = Image::filled(4, 4, [0.0; 3]);
        let b = Image::filled(4, 5, [0.0; 3]);
        assert!(matches!(smooth(&a, &b), Err(Error::Shape(_))));
    }
}
