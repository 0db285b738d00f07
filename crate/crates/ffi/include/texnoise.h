#ifndef TEXNOISE_H
#define TEXNOISE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum TnStatus {
  TN_STATUS_OK = 0,
  TN_STATUS_NULL_POINTER = 1,
  TN_STATUS_INVALID_ARGUMENT = 2,
  TN_STATUS_ROI_OUT_OF_BOUNDS = 3,
  TN_STATUS_DIMENSION_MISMATCH = 4,
  TN_STATUS_DEGENERATE_NOISE = 5,
  TN_STATUS_IO = 6,
  TN_STATUS_FORMAT = 7,
  TN_STATUS_INCOMPLETE_INPUT = 8,
  TN_STATUS_BUFFER_TOO_SMALL = 9,
  TN_STATUS_PANIC = 10,
} TnStatus;

typedef enum TnReconFilter {
  TN_RECON_FILTER_RAMP = 0,
  TN_RECON_FILTER_SHEPP_LOGAN = 1,
  TN_RECON_FILTER_HAMMING = 2,
} TnReconFilter;

typedef enum TnMethod {
  TN_METHOD_GMRF = 0,
  TN_METHOD_FD = 1,
  TN_METHOD_CM = 2,
  TN_METHOD_RLM = 3,
  TN_METHOD_ACF = 4,
  TN_METHOD_GF = 5,
  TN_METHOD_WP = 6,
} TnMethod;

typedef enum TnNoiseFamily {
  TN_NOISE_FAMILY_GAUSSIAN = 0,
  TN_NOISE_FAMILY_RAYLEIGH = 1,
  TN_NOISE_FAMILY_ERLANG = 2,
} TnNoiseFamily;

// Opaque image handle.
typedef struct TnRaster TnRaster;

// Outcome of noise identification.
//
// `param_a`/`param_b` are the fitted parameters of the winning family:
// (mean, variance) for Gaussian, (offset, scale) for Rayleigh and
// (rate, shape) for Erlang. `distances` holds the Matusita distance of each
// family in Gaussian, Rayleigh, Erlang order.
typedef struct TnNoiseEstimate {
  // One of the `TnNoiseFamily` values.
  int32_t family;
  double mu;
  double sigma2;
  double param_a;
  double param_b;
  double distances[3];
} TnNoiseEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *tn_version(void);

// Message of the most recent failure on the calling thread, or NULL if no
// call has failed yet. The pointer stays valid until the next failing call
// on the same thread.
const char *tn_last_error_message(void);

// Creates a raster by copying `width * height` row-major samples.
//
// # Safety
// `data` must point to `width * height` readable doubles and `out` must be
// a valid pointer to writable storage for a handle.
enum TnStatus tn_raster_new(size_t width,
                            size_t height,
                            uint8_t bit_depth,
                            const double *data,
                            struct TnRaster **out);

// Reads a PGM (P2/P5) or float-grid file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid handle slot.
enum TnStatus tn_raster_read(const char *path, struct TnRaster **out);

// Writes a float grid for `.p2f`/`.txt` paths, binary PGM otherwise.
//
// # Safety
// `raster` must be a live handle and `path` a NUL-terminated string.
enum TnStatus tn_raster_write(const struct TnRaster *raster, const char *path);

// Releases a handle. NULL is ignored.
//
// # Safety
// `raster` must be NULL or a handle not yet freed.
void tn_raster_free(struct TnRaster *raster);

// Width in pixels; 0 for NULL.
//
// # Safety
// `raster` must be NULL or a live handle.
size_t tn_raster_width(const struct TnRaster *raster);

// Height in pixels; 0 for NULL.
//
// # Safety
// `raster` must be NULL or a live handle.
size_t tn_raster_height(const struct TnRaster *raster);

// Row-major samples, borrowed for the lifetime of the handle; NULL for NULL.
//
// # Safety
// `raster` must be NULL or a live handle.
const double *tn_raster_data(const struct TnRaster *raster);

// Identifies the noise family inside the square background ROI at
// `(x, y)` with side `side`, using a histogram of `bins` bins.
//
// # Safety
// `raster` must be a live handle and `out` writable.
enum TnStatus tn_noise_identify(const struct TnRaster *raster,
                                size_t x,
                                size_t y,
                                size_t side,
                                size_t bins,
                                struct TnNoiseEstimate *out);

// Adaptive local noise reduction with a `window x window` neighbourhood.
// When `clamp_ratio` is nonzero the variance ratio is capped at 1.
//
// # Safety
// `raster` must be a live handle and `out` a valid handle slot.
enum TnStatus tn_filter(const struct TnRaster *raster,
                        double noise_variance,
                        size_t window,
                        int32_t clamp_ratio,
                        struct TnRaster **out);

// `original - clean`.
//
// # Safety
// Both inputs must be live handles and `out` a valid handle slot.
enum TnStatus tn_residual(const struct TnRaster *original,
                          const struct TnRaster *clean,
                          struct TnRaster **out);

// `original + residual`.
//
// # Safety
// Both inputs must be live handles and `out` a valid handle slot.
enum TnStatus tn_distort(const struct TnRaster *original,
                         const struct TnRaster *residual,
                         struct TnRaster **out);

// Parallel-beam projection over `n_angles` angles in [0, 180) followed by
// filtered backprojection onto the input grid. The image must be square.
//
// # Safety
// `raster` must be a live handle and `out` a valid handle slot.
enum TnStatus tn_recon_roundtrip(const struct TnRaster *raster,
                                 size_t n_angles,
                                 enum TnReconFilter filter,
                                 struct TnRaster **out);

// Number of values produced by `method`.
size_t tn_feature_count(enum TnMethod method);

// Extracts the features of `method` from the square tumour ROI at
// `(x, y)` with side `side`, using default texture settings.
//
// `*out_len` always receives the feature count. If `capacity` is smaller,
// nothing is written to `values` and `BufferTooSmall` is returned.
//
// # Safety
// `values` must hold `capacity` writable doubles; `out_len` must be writable.
enum TnStatus tn_features(const struct TnRaster *raster,
                          size_t x,
                          size_t y,
                          size_t side,
                          enum TnMethod method,
                          double *values,
                          size_t capacity,
                          size_t *out_len);

// Copies the name of feature `index` of `method` into `buf` (NUL
// terminated, truncated to `len - 1` bytes). Returns the full name length
// excluding the terminator, or 0 for an out-of-range index.
//
// # Safety
// `buf` must be NULL or hold `len` writable bytes.
size_t tn_feature_name(enum TnMethod method, size_t index, char *buf, size_t len);

// Fisher separability of two classes of `dim`-dimensional row-major
// samples, with `ridge` added to the within-class scatter diagonal.
// `*capped` is set to 1 when the value hit the numerical cap.
//
// # Safety
// `class_a` must hold `n_a * dim` doubles, `class_b` `n_b * dim`; `j` and
// `capped` must be writable.
enum TnStatus tn_fisher_j(const double *class_a,
                          size_t n_a,
                          const double *class_b,
                          size_t n_b,
                          size_t dim,
                          double ridge,
                          double *j,
                          int32_t *capped);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEXNOISE_H */
