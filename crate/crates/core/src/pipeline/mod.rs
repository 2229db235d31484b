//! End-to-end stylization: encode, transform feature statistics, decode; cascaded over
//! encoder levels from deepest to shallowest.

pub mod method;
pub mod observer;
pub mod smooth;

pub use method::{Method, MethodConfig, TransformKind, DEFAULT_OUTPUT_SIZE};
pub use observer::{NoopObserver, Observer, PassCounters, Role, StageReport};
pub use smooth::{smooth, GuidedFilter};

use crate::error::{Error, Result};
use crate::imageio::resize;
use crate::neuralnet::{DecodeMode, EncoderLevel, Network};
use crate::tensor::{from_matrix, to_matrix, FeatureMap, FeatureMatrix, Image};
use crate::transforms::{adain, color, covariance, wct_blend, whiten};

/// Working images are padded to a multiple of this so every pooling sees even sizes.
pub const SIZE_MULTIPLE: usize = 16;

static NOOP: NoopObserver = NoopObserver;

/// Runs the style-transfer methods against one [`Network`].
///
/// Stateless apart from the borrowed observer, so one network can serve many
/// concurrent stylizers.
#[derive(Clone, Copy)]
pub struct Stylizer<'a> {
    net: &'a Network,
    observer: &'a dyn Observer,
    check_statistics: bool,
}

impl<'a> Stylizer<'a> {
    pub fn new(net: &'a Network) -> Self {
        Self { net, observer: &NOOP, check_statistics: false }
    }

    pub fn with_observer(mut self, observer: &'a dyn Observer) -> Self {
        self.observer = observer;
        self
    }

    /// When enabled every WCT stage reports the relative Frobenius error between the
    /// colored (pre-blend) feature covariance and the style covariance.
    pub fn check_statistics(mut self, on: bool) -> Self {
        self.check_statistics = on;
        self
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    /// Resizes both images to `cfg.output_size` and runs the configured method.
    pub fn stylize(&self, content: &Image, style: &Image, cfg: &MethodConfig) -> Result<Image> {
        cfg.validate()?;
        let mode = cfg.method.decode_mode();
        for &level in &cfg.levels {
            self.net.require(level, mode)?;
        }
        let (w, h) = cfg.output_size;
        let content = resize(content, w, h)?;
        let style = resize(style, w, h)?;
        let stylized = self.cascade(&content, &style, &cfg.levels, cfg.method.transform(), cfg.alpha, mode)?;
        if cfg.method.smooths() {
            let out = smooth(&stylized, &content)?;
            self.observer.smoothed();
            Ok(out)
        } else {
            Ok(stylized)
        }
    }

    /// Multi-level cascade with upsampling decoders: each level's output becomes the
    /// next level's content; the style image feeds every level.
    pub fn stylize_multilevel(
        &self,
        content: &Image,
        style: &Image,
        levels: &[EncoderLevel],
        transform: TransformKind,
        alpha: f64,
    ) -> Result<Image> {
        let style = resize(style, content.width(), content.height())?;
        self.cascade(content, &style, levels, transform, alpha, DecodeMode::Upsample)
    }

    /// Photorealistic variant: a four-level WCT cascade with unpooling decoders followed by
    /// guided smoothing against the content image.
    pub fn photo_r(&self, content: &Image, style: &Image, alpha: f64) -> Result<Image> {
        let style = resize(style, content.width(), content.height())?;
        let levels = Method::PhotoR.levels();
        let stylized = self.cascade(content, &style, &levels, TransformKind::Wct, alpha, DecodeMode::Unpool)?;
        let out = smooth(&stylized, content)?;
        self.observer.smoothed();
        Ok(out)
    }

    /// Core cascade; `style` must already match `content` in size.
    fn cascade(
        &self,
        content: &Image,
        style: &Image,
        levels: &[EncoderLevel],
        transform: TransformKind,
        alpha: f64,
        mode: DecodeMode,
    ) -> Result<Image> {
        if levels.is_empty() {
            return Err(Error::argument("level list is empty"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::argument(format!("alpha must be in [0, 1], got {alpha}")));
        }
        for &level in levels {
            self.net.require(level, mode)?;
        }
        let (w, h) = (content.width(), content.height());
        // The style never changes between stages, so one pass yields every level's features.
        let style_taps = self.net.encode_taps(&style.pad_to_multiple(SIZE_MULTIPLE), levels)?;
        let mut current = content.pad_to_multiple(SIZE_MULTIPLE);
        for (&level, style_features) in levels.iter().zip(&style_taps) {
            self.observer.encoded(Role::Style, level);
            current = self.stage(&current, style_features, level, transform, alpha, mode)?;
        }
        current.crop(w, h)
    }

    fn stage(
        &self,
        content: &Image,
        style: &FeatureMap,
        level: EncoderLevel,
        transform: TransformKind,
        alpha: f64,
        mode: DecodeMode,
    ) -> Result<Image> {
        let enc_c = self.net.encode(content, level)?;
        self.observer.encoded(Role::Content, level);

        let (features, covariance_error) = match transform {
            TransformKind::Adain => {
                let transformed = adain(&enc_c.features, style)?;
                (blend_maps(&enc_c.features, &transformed, alpha)?, None)
            }
            TransformKind::Wct => {
                let fc = to_matrix(&enc_c.features);
                let fs = to_matrix(style);
                let colored = wct_colored(&fc, &fs)?;
                let err = if self.check_statistics { Some(covariance_relative_error(&colored, &fs)?) } else { None };
                let blended = wct_blend(&fc, &colored, alpha)?;
                (from_matrix(&blended, enc_c.features.height(), enc_c.features.width())?, err)
            }
        };

        let out = self.net.decode(&features, level, mode, Some(&enc_c.indices))?;
        self.observer.decoded(level);
        self.observer.stage_finished(&StageReport { level, output: &out, covariance_error });
        Ok(out)
    }
}

/// Whitening then coloring; content without any variance colors straight to the style mean.
fn wct_colored(fc: &FeatureMatrix, fs: &FeatureMatrix) -> Result<FeatureMatrix> {
    let whitened = match whiten(fc) {
        Ok(w) => w.features,
        Err(Error::DegenerateFeatures(_)) => FeatureMatrix::new(fc.rows(), fc.cols(), vec![0.0; fc.data().len()])?,
        Err(e) => return Err(e),
    };
    Ok(color(&whitened, fs)?.0)
}

fn covariance_relative_error(colored: &FeatureMatrix, style: &FeatureMatrix) -> Result<f64> {
    let target = covariance(style)?;
    let got = covariance(colored)?;
    let norm = target.frobenius_norm();
    let diff = got.frobenius_distance(&target);
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

fn blend_maps(content: &FeatureMap, transformed: &FeatureMap, alpha: f64) -> Result<FeatureMap> {
    let blended = wct_blend(&to_matrix(content), &to_matrix(transformed), alpha)?;
    from_matrix(&blended, content.height(), content.width())
}
