#ifndef NST_H
#define NST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NstMethod {
  NST_METHOD_ADAIN = 0,
  NST_METHOD_UST_ADAIN = 1,
  NST_METHOD_UST_WCT = 2,
  NST_METHOD_UST_WCT4 = 3,
  NST_METHOD_PHOTO_R = 4,
} NstMethod;

typedef enum NstStatus {
  NST_STATUS_OK = 0,
  NST_STATUS_NULL_ARGUMENT = 1,
  NST_STATUS_INVALID_ARGUMENT = 2,
  NST_STATUS_IMAGE_ERROR = 3,
  NST_STATUS_WEIGHT_ERROR = 4,
  NST_STATUS_SHAPE_ERROR = 5,
  NST_STATUS_PANIC = 6,
} NstStatus;

/**
 * RGB image with values in [0, 1].
 */
typedef struct NstImage NstImage;

/**
 * Loaded encoder and decoders.
 */
typedef struct NstNetwork NstNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *nst_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nst_version(void);

/**
 * Loads an NSTW weight file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer to writable storage.
 */
enum NstStatus nst_network_load(const char *path, struct NstNetwork **out);

/**
 * Builds the hand-authored demo network.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum NstStatus nst_network_demo(struct NstNetwork **out);

/**
 * # Safety
 * `net` must be null or a handle from this library that has not been freed.
 */
void nst_network_free(struct NstNetwork *net);

/**
 * Copies `width * height * 3` interleaved RGB floats into a new image. Values are
 * clamped to [0, 1]; non-finite values are rejected.
 *
 * # Safety
 * `rgb` must point to `width * height * 3` readable floats and `out` must be valid.
 */
enum NstStatus nst_image_new(uint32_t width,
                             uint32_t height,
                             const float *rgb,
                             struct NstImage **out);

/**
 * Reads a PNG or JPEG file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be valid.
 */
enum NstStatus nst_image_load(const char *path, struct NstImage **out);

/**
 * Writes an 8-bit PNG.
 *
 * # Safety
 * `img` must be a live handle and `path` a NUL-terminated string.
 */
enum NstStatus nst_image_save_png(const struct NstImage *img, const char *path);

/**
 * Width in pixels, or 0 for a null handle.
 *
 * # Safety
 * `img` must be null or a live handle.
 */
uint32_t nst_image_width(const struct NstImage *img);

/**
 * Height in pixels, or 0 for a null handle.
 *
 * # Safety
 * `img` must be null or a live handle.
 */
uint32_t nst_image_height(const struct NstImage *img);

/**
 * Copies the interleaved RGB pixels into `dst`, which must hold exactly
 * `width * height * 3` floats.
 *
 * # Safety
 * `img` must be a live handle and `dst` must point to `len` writable floats.
 */
enum NstStatus nst_image_copy_pixels(const struct NstImage *img, float *dst, size_t len);

/**
 * # Safety
 * `img` must be null or a handle from this library that has not been freed.
 */
void nst_image_free(struct NstImage *img);

/**
 * Runs one method. A negative `alpha` selects the method's default; a zero `width` or
 * `height` selects 600x450.
 *
 * # Safety
 * `net`, `content` and `style` must be live handles and `out` must be valid.
 */
enum NstStatus nst_stylize(const struct NstNetwork *net,
                           const struct NstImage *content,
                           const struct NstImage *style,
                           enum NstMethod method,
                           double alpha,
                           uint32_t width,
                           uint32_t height,
                           struct NstImage **out);

/**
 * Mean SSIM of the lumas with an 11x11 Gaussian window.
 *
 * # Safety
 * `a` and `b` must be live handles and `out` must point to a writable double.
 */
enum NstStatus nst_ssim(const struct NstImage *a, const struct NstImage *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NST_H */
