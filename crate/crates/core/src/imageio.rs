//! PNG/JPEG reading, PNG writing, and bilinear resizing.

use std::path::Path;

use image::{imageops, ImageBuffer, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::tensor::Image;

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))?.to_rgb32f();
    Image::new(img.width() as usize, img.height() as usize, img.into_raw())
}

/// 8-bit PNG; values are rounded to the nearest code.
pub fn save_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    to_rgb8(img)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}

pub fn to_rgb8(img: &Image) -> RgbImage {
    let bytes = img.data().iter().map(|&v| (v * 255.0).round() as u8).collect();
    RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes).expect("buffer matches size")
}

pub fn from_rgb8(img: &RgbImage) -> Image {
    let data = img.as_raw().iter().map(|&b| f32::from(b) / 255.0).collect();
    Image::new(img.width() as usize, img.height() as usize, data).expect("buffer matches size")
}

/// Bilinear (triangle-filter) resize. Returns a copy when the size already matches.
pub fn resize(img: &Image, width: usize, height: usize) -> Result<Image> {
    if width == 0 || height == 0 {
        return Err(Error::argument(format!("cannot resize to {width}x{height}")));
    }
    if img.width() == width && img.height() == height {
        return Ok(img.clone());
    }
    let buf: ImageBuffer<Rgb<f32>, Vec<f32>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
            .ok_or_else(|| Error::Image("image buffer size mismatch".into()))?;
    let out = imageops::resize(&buf, width as u32, height as u32, imageops::FilterType::Triangle);
    Image::new(width, height, out.into_raw())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_quantized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = Image::from_fn(5, 4, |x, y| [x as f32 / 4.0, y as f32 / 3.0, 0.5]);
        save_png(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!((back.width(), back.height()), (5, 4));
        assert!(img.mean_abs_diff(&back).unwrap() <= 0.5 / 255.0 + 1e-6);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = Image::filled(10, 6, [0.2, 0.4, 0.6]);
        let out = resize(&img, 7, 13).unwrap();
        assert_eq!((out.width(), out.height()), (7, 13));
        for v in out.data().chunks_exact(3) {
            assert!((v[0] - 0.2).abs() < 1e-5 && (v[2] - 0.6).abs() < 1e-5);
        }
        assert!(resize(&img, 0, 3).is_err());
    }

    #[test]
    fn missing_file_is_image_error() {
        assert!(matches!(load_image("/nonexistent/x.png"), Err(Error::Image(_))));
    }
}
