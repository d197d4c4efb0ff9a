#ifndef NEUROTTS_H
#define NEUROTTS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum NttsStatus {
  NTTS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NTTS_STATUS_NULL_ARGUMENT = 1,
  /**
   * Bad argument or input data (including non-UTF-8 strings).
   */
  NTTS_STATUS_INVALID_INPUT = 2,
  /**
   * Model files missing, mismatched or corrupt.
   */
  NTTS_STATUS_MODEL = 3,
  /**
   * File could not be read or written.
   */
  NTTS_STATUS_IO = 4,
  /**
   * Internal panic caught at the boundary.
   */
  NTTS_STATUS_PANIC = 5,
} NttsStatus;

/**
 * Opaque synthesized audio.
 */
typedef struct NttsAudio NttsAudio;

/**
 * Opaque loaded pipeline.
 */
typedef struct NttsPipeline NttsPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ntts_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call on this thread.
 */
const char *ntts_last_error(void);

/**
 * Converts 10 LPC coefficients `a[0..10]` (A(z) = 1 + Σ a_k z^-k) to 10
 * line spectral frequencies in radians, written to `lsf_out[0..10]`.
 *
 * # Safety
 * `a` and `lsf_out` must point to 10 readable/writable doubles.
 */
enum NttsStatus ntts_lpc_to_lsf(const double *a, double *lsf_out);

/**
 * Inverse of [`ntts_lpc_to_lsf`].
 *
 * # Safety
 * `lsf` and `a_out` must point to 10 readable/writable doubles.
 */
enum NttsStatus ntts_lsf_to_lpc(const double *lsf, double *a_out);

/**
 * Loads a pipeline from a config file.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out` must be writable.
 */
enum NttsStatus ntts_pipeline_load(const char *config_path, struct NttsPipeline **out);

/**
 * Releases a pipeline. Null is ignored.
 *
 * # Safety
 * `p` must come from [`ntts_pipeline_load`] and not be used afterwards.
 */
void ntts_pipeline_free(struct NttsPipeline *p);

/**
 * Synthesizes UTF-8 text.
 *
 * # Safety
 * `p` must be a live pipeline, `text` NUL-terminated, `out` writable.
 */
enum NttsStatus ntts_say(const struct NttsPipeline *p, const char *text, struct NttsAudio **out);

/**
 * Borrows the samples (range −1..1) of an audio handle. The pointer is
 * valid while the handle lives.
 *
 * # Safety
 * `audio` must be live; `samples` and `len` writable.
 */
enum NttsStatus ntts_audio_samples(const struct NttsAudio *audio,
                                   const double **samples,
                                   uintptr_t *len);

/**
 * Sample rate in Hz, or 0 for a null handle.
 *
 * # Safety
 * `audio` must be live or null.
 */
uint32_t ntts_audio_sample_rate(const struct NttsAudio *audio);

/**
 * Writes 16-bit PCM mono WAV.
 *
 * # Safety
 * `audio` must be live and `path` NUL-terminated.
 */
enum NttsStatus ntts_audio_write_wav(const struct NttsAudio *audio, const char *path);

/**
 * Releases audio. Null is ignored.
 *
 * # Safety
 * `audio` must come from [`ntts_say`] and not be used afterwards.
 */
void ntts_audio_free(struct NttsAudio *audio);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEUROTTS_H */
