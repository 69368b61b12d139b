#ifndef PWFIBER_H
#define PWFIBER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Detector family of a [`PwfOutcome`].
 */
typedef enum {
  PWF_DETECTOR_KIND_PW = 0,
  PWF_DETECTOR_KIND_MED = 1,
} PwfDetectorKind;

/*
 Result codes. Zero is success.
 */
typedef enum {
  PWF_STATUS_OK = 0,
  PWF_STATUS_NULL_POINTER = 1,
  PWF_STATUS_INVALID_ARGUMENT = 2,
  PWF_STATUS_CONFIG = 3,
  PWF_STATUS_INPUT = 4,
  PWF_STATUS_ESTIMATION = 5,
  PWF_STATUS_NUMERICAL = 6,
  PWF_STATUS_IO = 7,
  PWF_STATUS_INTERNAL = 8,
  PWF_STATUS_PANIC = 9,
  PWF_STATUS_BUFFER_TOO_SMALL = 10,
} PwfStatus;

/*
 Run configuration.
 */
typedef struct PwfConfig PwfConfig;

/*
 Trained Parzen-window detector.
 */
typedef struct PwfDetector PwfDetector;

/*
 Error counts and Q-factor of one detector at one simulation point.
 */
typedef struct {
  PwfDetectorKind detector;
  uint64_t n_symbols;
  uint64_t n_symbol_errors;
  uint64_t n_bits;
  uint64_t n_bit_errors;
  double ser;
  double ber;
  double q_db;
  /*
   Window radius relative to the rms radius of the received cloud;
   NaN for minimum-distance detection.
   */
  double relative_radius;
} PwfOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the calling thread's last error message into `buf` (NUL
 terminated, truncated to `len`). Returns the full message length
 including the terminator, or 0 if there is no message.

 # Safety
 `buf` must be writable for `len` bytes, or null when `len == 0`.
 */
uintptr_t pwf_last_error(char *buf, uintptr_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *pwf_version(void);

/*
 Q-factor in dB from a bit error rate in `[0, 0.5]`.

 # Safety
 `out` must be a valid pointer to one `double`.
 */
PwfStatus pwf_q_from_ber(double ber, double *out);

/*
 Trains a Parzen-window detector on `n` labeled received samples of a
 square QAM alphabet, choosing the window radius on a held-out split.

 # Safety
 `re`, `im` and `labels` must each point to `n` readable values; `out`
 must be a valid pointer to one handle slot.
 */
PwfStatus pwf_detector_train(uint32_t qam_order,
                             const double *re,
                             const double *im,
                             const uint32_t *labels,
                             uintptr_t n,
                             PwfDetector **out);

/*
 Builds a Parzen-window detector with a caller-chosen window radius.

 # Safety
 Same as [`pwf_detector_train`].
 */
PwfStatus pwf_detector_new(uint32_t n_classes,
                           const double *re,
                           const double *im,
                           const uint32_t *labels,
                           uintptr_t n,
                           double radius,
                           PwfDetector **out);

/*
 Window radius of a detector.

 # Safety
 `det` must be a live handle and `out` a valid pointer to one `double`.
 */
PwfStatus pwf_detector_radius(const PwfDetector *det, double *out);

/*
 Classifies `n` samples, writing one label per sample into `out_labels`.

 # Safety
 `det` must be a live handle; `re` and `im` must each point to `n`
 readable values and `out_labels` to `n` writable ones.
 */
PwfStatus pwf_detector_classify(const PwfDetector *det,
                                const double *re,
                                const double *im,
                                uintptr_t n,
                                uint32_t *out_labels);

/*
 Releases a detector. Null is ignored.

 # Safety
 `det` must be null or a handle from this library not yet freed.
 */
void pwf_detector_free(PwfDetector *det);

/*
 Default run configuration.

 # Safety
 `out` must be a valid pointer to one handle slot.
 */
PwfStatus pwf_config_default(PwfConfig **out);

/*
 Parses a flat TOML run configuration; missing keys take defaults.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer to one
 handle slot.
 */
PwfStatus pwf_config_from_toml(const char *text, PwfConfig **out);

/*
 Releases a configuration. Null is ignored.

 # Safety
 `cfg` must be null or a handle from this library not yet freed.
 */
void pwf_config_free(PwfConfig *cfg);

/*
 Simulates one point (launch power, span count) end to end and writes
 one outcome per configured detector, in configuration order.
 `n_written` receives the number of outcomes; if it exceeds `capacity`
 nothing is written to `out` and `BufferTooSmall` is returned.

 # Safety
 `cfg` must be a live handle, `out` writable for `capacity` outcomes and
 `n_written` a valid pointer.
 */
PwfStatus pwf_run_point(const PwfConfig *cfg,
                        double power_dbm,
                        uint32_t n_spans,
                        uint64_t seed,
                        PwfOutcome *out,
                        uintptr_t capacity,
                        uintptr_t *n_written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PWFIBER_H */
