//! Structural similarity on luma with a Gaussian window.

use crate::error::{Error, Result};
use crate::tensor::Image;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    /// Odd window side length.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self { window: 11, sigma: 1.5, k1: 0.01, k2: 0.03, dynamic_range: 1.0 }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::argument(format!("SSIM window must be odd, got {}", self.window)));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.sigma) || !positive(self.k1) || !positive(self.k2) || !positive(self.dynamic_range) {
            return Err(Error::argument("SSIM sigma, K1, K2 and L must be positive"));
        }
        Ok(())
    }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn taps(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    }

    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

/// Mean SSIM over every window position that lies fully inside the image.
pub fn ssim(a: &Image, b: &Image, p: &SsimParams) -> Result<f64> {
    let (w, h) = check_inputs(a, b, p)?;
    ssim_luma(&a.luma(), &b.luma(), w, h, p)
}

/// SSIM with default parameters.
pub fn ssim_default(a: &Image, b: &Image) -> Result<f64> {
    ssim(a, b, &SsimParams::default())
}

pub(crate) fn check_inputs(a: &Image, b: &Image, p: &SsimParams) -> Result<(usize, usize)> {
    p.validate()?;
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::shape(format!(
            "SSIM of {}x{} and {}x{} images",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    if a.width() < p.window || a.height() < p.window {
        return Err(Error::argument(format!(
            "image {}x{} is smaller than the {}x{} SSIM window",
            a.width(),
            a.height(),
            p.window,
            p.window
        )));
    }
    Ok((a.width(), a.height()))
}

fn ssim_luma(x: &[f64], y: &[f64], w: usize, h: usize, p: &SsimParams) -> Result<f64> {
    let taps = p.taps();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mu_x = filter_valid(x, w, h, &taps);
    let mu_y = filter_valid(y, w, h, &taps);
    let e_xx = filter_valid(&xx, w, h, &taps);
    let e_yy = filter_valid(&yy, w, h, &taps);
    let e_xy = filter_valid(&xy, w, h, &taps);
    let (c1, c2) = (p.c1(), p.c2());
    let n = mu_x.len();
    let mut sum = 0.0;
    for k in 0..n {
        let (mx, my) = (mu_x[k], mu_y[k]);
        let vx = e_xx[k] - mx * mx;
        let vy = e_yy[k] - my * my;
        let cov = e_xy[k] - mx * my;
        sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(sum / n as f64)
}

/// Separable weighted sums over valid positions only.
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().zip(&line[x..x + k]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for (i, t) in taps.iter().enumerate() {
            let src_row = &rows[(y + i) * ow..(y + i + 1) * ow];
            for (o, v) in out[y * ow..(y + 1) * ow].iter_mut().zip(src_row) {
                *o += t * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taps_sum_to_one() {
        let taps = SsimParams::default().taps();
        assert_eq!(taps.len(), 11);
        assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((taps[0] - taps[10]).abs() < 1e-18);
    }

    #[test]
    fn identical_images_score_one() {
        let img = Image::from_fn(20, 17, |x, y| [(x * y % 7) as f32 / 7.0, 0.3, (x % 3) as f32 / 3.0]);
        assert!((ssim_default(&img, &img).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_offset_matches_closed_form() {
        // Constant images have zero variance, so SSIM reduces to the luminance term.
        let a = Image::filled(16, 16, [0.2; 3]);
        let b = Image::filled(16, 16, [0.7; 3]);
        let p = SsimParams::default();
        let (mx, my) = (a.luma()[0], b.luma()[0]);
        let expected = (2.0 * mx * my + p.c1()) / (mx * mx + my * my + p.c1());
        let got = ssim(&a, &b, &p).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        assert!(got < 1.0);
    }

    #[test]
    fn input_errors() {
        let a = Image::filled(16, 16, [0.0; 3]);
        assert!(matches!(ssim_default(&a, &Image::filled(16, 15, [0.0; 3])), Err(Error::Shape(_))));
        let small = Image::filled(10, 16, [0.0; 3]);
        assert!(matches!(ssim_default(&small, &small), Err(Error::Argument(_))));
        let bad = SsimParams { k1: 0.0, ..SsimParams::default() };
        assert!(ssim(&a, &a, &bad).is_err());
        let even = SsimParams { window: 10, ..SsimParams::default() };
        assert!(ssim(&a, &a, &even).is_err());
    }
}
