//! C ABI over `nst-core`.
//!
//! Networks and images are opaque heap handles owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`NstStatus`]; on failure
//! [`nst_last_error`] describes the problem for the calling thread. Panics never cross
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use nst::demo::DemoNet;
use nst::evaluation::ssim_default;
use nst::imageio::{load_image, save_png};
use nst::neuralnet::{load_weights, Network};
use nst::{Error, Image, Method, MethodConfig, Stylizer};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NstStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ImageError = 3,
    WeightError = 4,
    ShapeError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NstMethod {
    Adain = 0,
    UstAdain = 1,
    UstWct = 2,
    UstWct4 = 3,
    PhotoR = 4,
}

impl From<NstMethod> for Method {
    fn from(m: NstMethod) -> Self {
        match m {
            NstMethod::Adain => Method::AdaIn,
            NstMethod::UstAdain => Method::UstAdaIn,
            NstMethod::UstWct => Method::UstWct,
            NstMethod::UstWct4 => Method::UstWct4,
            NstMethod::PhotoR => Method::PhotoR,
        }
    }
}

/// Loaded encoder and decoders.
pub struct NstNetwork(Network);

/// RGB image with values in [0, 1].
pub struct NstImage(Image);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> NstStatus {
    match e {
        Error::Format(_) | Error::UnsupportedDtype { .. } | Error::Manifest(_) => NstStatus::WeightError,
        Error::Image(_) | Error::Io(_) => NstStatus::ImageError,
        Error::Shape(_) => NstStatus::ShapeError,
        Error::Argument(_) | Error::DegenerateInput(_) | Error::DegenerateFeatures(_) => NstStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (NstStatus, String)>) -> NstStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NstStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NstStatus::Panic
        }
    }
}

fn fail(e: Error) -> (NstStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NstStatus, String) {
    (NstStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, (NstStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| (NstStatus::InvalidArgument, format!("`{what}` is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_arg<'a, T>(p: *mut *mut T, what: &str) -> Result<&'a mut *mut T, (NstStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NstStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread; empty after a success. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn nst_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nst_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an NSTW weight file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn nst_network_load(path: *const c_char, out: *mut *mut NstNetwork) -> NstStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = path_arg(path, "path")?;
        let net = load_weights(&path)
            .and_then(|store| Network::from_store(&store))
            .map_err(|e| (NstStatus::WeightError, format!("{}: {e}", path.display())))?;
        *out = Box::into_raw(Box::new(NstNetwork(net)));
        Ok(())
    })
}

/// Builds the hand-authored demo network.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn nst_network_demo(out: *mut *mut NstNetwork) -> NstStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let net = DemoNet::default().weights().and_then(|s| Network::from_store(&s)).map_err(fail)?;
        *out = Box::into_raw(Box::new(NstNetwork(net)));
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn nst_network_free(net: *mut NstNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Copies `width * height * 3` interleaved RGB floats into a new image. Values are
/// clamped to [0, 1]; non-finite values are rejected.
///
/// # Safety
/// `rgb` must point to `width * height * 3` readable floats and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nst_image_new(width: u32, height: u32, rgb: *const f32, out: *mut *mut NstImage) -> NstStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if rgb.is_null() {
            return Err(null("rgb"));
        }
        let len = (width as usize)
            .checked_mul(height as usize)
            .and_then(|n| n.checked_mul(3))
            .ok_or((NstStatus::InvalidArgument, "image size overflows".to_string()))?;
        let data = std::slice::from_raw_parts(rgb, len).to_vec();
        let img = Image::new(width as usize, height as usize, data).map_err(fail)?;
        *out = Box::into_raw(Box::new(NstImage(img)));
        Ok(())
    })
}

/// Reads a PNG or JPEG file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nst_image_load(path: *const c_char, out: *mut *mut NstImage) -> NstStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let img = load_image(path_arg(path, "path")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(NstImage(img)));
        Ok(())
    })
}

/// Writes an 8-bit PNG.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nst_image_save_png(img: *const NstImage, path: *const c_char) -> NstStatus {
    guard(|| {
        let img = ref_arg(img, "img")?;
        save_png(&img.0, path_arg(path, "path")?).map_err(fail)
    })
}

/// Width in pixels, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nst_image_width(img: *const NstImage) -> u32 {
    img.as_ref().map_or(0, |i| i.0.width() as u32)
}

/// Height in pixels, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nst_image_height(img: *const NstImage) -> u32 {
    img.as_ref().map_or(0, |i| i.0.height() as u32)
}

/// Copies the interleaved RGB pixels into `dst`, which must hold exactly
/// `width * height * 3` floats.
///
/// # Safety
/// `img` must be a live handle and `dst` must point to `len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn nst_image_copy_pixels(img: *const NstImage, dst: *mut f32, len: usize) -> NstStatus {
    guard(|| {
        let img = ref_arg(img, "img")?;
        if dst.is_null() {
            return Err(null("dst"));
        }
        let src = img.0.data();
        if len != src.len() {
            return Err((NstStatus::ShapeError, format!("buffer holds {len} floats, image has {}", src.len())));
        }
        std::slice::from_raw_parts_mut(dst, len).copy_from_slice(src);
        Ok(())
    })
}

/// # Safety
/// `img` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn nst_image_free(img: *mut NstImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Runs one method. A negative `alpha` selects the method's default; a zero `width` or
/// `height` selects 600x450.
///
/// # Safety
/// `net`, `content` and `style` must be live handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nst_stylize(
    net: *const NstNetwork,
    content: *const NstImage,
    style: *const NstImage,
    method: NstMethod,
    alpha: f64,
    width: u32,
    height: u32,
    out: *mut *mut NstImage,
) -> NstStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let net = ref_arg(net, "net")?;
        let content = ref_arg(content, "content")?;
        let style = ref_arg(style, "style")?;
        let mut cfg = MethodConfig::new(method.into());
        if alpha >= 0.0 || alpha.is_nan() {
            cfg = cfg.with_alpha(alpha);
        }
        if width != 0 && height != 0 {
            cfg = cfg.with_output_size(width as usize, height as usize);
        }
        let img = Stylizer::new(&net.0).stylize(&content.0, &style.0, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(NstImage(img)));
        Ok(())
    })
}

/// Mean SSIM of the lumas with an 11x11 Gaussian window.
///
/// # Safety
/// `a` and `b` must be live handles and `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn nst_ssim(a: *const NstImage, b: *const NstImage, out: *mut f64) -> NstStatus {
    guard(|| {
        let a = ref_arg(a, "a")?;
        let b = ref_arg(b, "b")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ssim_default(&a.0, &b.0).map_err(fail)?;
        Ok(())
    })
}
