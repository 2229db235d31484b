use crate::error::{Error, Result};
use crate::tensor::{channel_stats, FeatureMap};

/// Added to the content variance under the square root; keeps constant channels finite.
pub const ADAIN_EPSILON: f64 = 1e-5;

/// Re-normalizes each content channel to the style channel's mean and standard deviation.
///
/// Spatial sizes may differ; only the channel counts must agree.
pub fn adain(content: &FeatureMap, style: &FeatureMap) -> Result<FeatureMap> {
    if content.channels() != style.channels() {
        return Err(Error::shape(format!(
            "AdaIN needs matching channel counts, got {} and {}",
            content.channels(),
            style.channels()
        )));
    }
    let cs = channel_stats(content)?;
    let ss = channel_stats(style)?;
    let n = content.plane_len();
    let mut data = Vec::with_capacity(content.data().len());
    for (c, (cstat, sstat)) in cs.iter().zip(&ss).enumerate() {
        let scale = sstat.std_dev() / (cstat.variance + ADAIN_EPSILON).sqrt();
        data.extend(content.channel(c).iter().map(|&x| (scale * (f64::from(x) - cstat.mean) + sstat.mean) as f32));
    }
    debug_assert_eq!(data.len(), content.channels() * n);
    FeatureMap::new(content.channels(), content.height(), content.width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case() {
        let c = FeatureMap::new(1, 1, 2, vec![1.0, 3.0]).unwrap();
        let s = FeatureMap::new(1, 1, 2, vec![10.0, 14.0]).unwrap();
        let out = adain(&c, &s).unwrap();
        assert!((out.data()[0] - 10.0).abs() < 1e-4);
        assert!((out.data()[1] - 14.0).abs() < 1e-4);
    }

    #[test]
    fn style_equal_to_content_is_fixed_point() {
        let c = FeatureMap::new(2, 2, 2, vec![1.0, -2.0, 0.5, 4.0, 9.0, 8.0, 7.0, 6.0]).unwrap();
        let out = adain(&c, &c).unwrap();
        for (a, b) in out.data().iter().zip(c.data()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn spatial_sizes_may_differ() {
        let c = FeatureMap::new(1, 2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let s = FeatureMap::new(1, 1, 3, vec![5.0, 5.0, 5.0]).unwrap();
        let out = adain(&c, &s).unwrap();
        assert!(out.data().iter().all(|&v| (v - 5.0).abs() < 1e-6));
    }

    #[test]
    fn constant_content_channel_is_finite() {
        let c = FeatureMap::new(1, 1, 3, vec![2.0; 3]).unwrap();
        let s = FeatureMap::new(1, 1, 2, vec![0.0, 10.0]).unwrap();
        let out = adain(&c, &s).unwrap();
        assert!(out.data().iter().all(|&v| (v - 5.0).abs() < 1e-6));
    }

    #[test]
    fn channel_mismatch() {
        let c = FeatureMap::new(1, 1, 1, vec![0.0]).unwrap();
        let s = FeatureMap::new(2, 1, 1, vec![0.0, 0.0]).unwrap();
        assert!(matches!(adain(&c, &s), Err(Error::Shape(_))));
    }
}
