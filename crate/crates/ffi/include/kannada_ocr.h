#ifndef KANNADA_OCR_H
#define KANNADA_OCR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum KocrStatus {
  KOCR_STATUS_OK = 0,
  KOCR_STATUS_NULL_ARGUMENT = 1,
  // Bad configuration or missing/corrupt model files.
  KOCR_STATUS_CONFIG = 2,
  // Unreadable image, zone file or text.
  KOCR_STATUS_INPUT = 3,
  // Recognition failed part-way.
  KOCR_STATUS_PROCESSING = 4,
  KOCR_STATUS_INVALID_UTF8 = 5,
  // Evaluation against an empty ground truth.
  KOCR_STATUS_ZERO_GROUND_TRUTH = 6,
  KOCR_STATUS_PANIC = 7,
} KocrStatus;

// A loaded recognition engine. Safe to share between threads for
// concurrent recognition calls.
typedef struct KocrEngine KocrEngine;

// Unicode-level and word-level edit counts for one page.
typedef struct KocrEvalCounts {
  uint64_t n;
  uint64_t m;
  uint64_t s;
  uint64_t i;
  uint64_t d;
  uint64_t n_w;
  uint64_t m_w;
  uint64_t s_w;
  uint64_t i_w;
  uint64_t d_w;
} KocrEvalCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next library call on this thread.
const char *kocr_last_error(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void kocr_string_free(char *s);

// Load an engine from a TOML configuration file.
//
// # Safety
// `config_path` must be a nul-terminated string; `out` must be writable.
enum KocrStatus kocr_engine_new(const char *config_path, struct KocrEngine **out);

// Destroy an engine. Null is ignored.
//
// # Safety
// `engine` must come from [`kocr_engine_new`] and not have been freed.
void kocr_engine_free(struct KocrEngine *engine);

// Recognise a binary PGM file. `zones_path` may be null for the whole
// page. On success `*out_text` receives UTF-8 text to be released with
// [`kocr_string_free`].
//
// # Safety
// Pointers must be valid; strings nul-terminated.
enum KocrStatus kocr_recognize_pgm(const struct KocrEngine *engine,
                                   const char *image_path,
                                   const char *zones_path,
                                   char **out_text);

// Recognise an 8-bit grayscale image, row-major, `width * height` bytes,
// 0 black.
//
// # Safety
// `pixels` must point to `width * height` readable bytes.
enum KocrStatus kocr_recognize_gray(const struct KocrEngine *engine,
                                    const uint8_t *pixels,
                                    size_t width,
                                    size_t height,
                                    char **out_text);

// `(n - s - i - d) / n`.
//
// # Safety
// `out` must be writable.
enum KocrStatus kocr_accuracy(uint64_t n, uint64_t s, uint64_t i, uint64_t d, double *out);

// Align recognised text with ground truth at Unicode and word level.
//
// # Safety
// Strings must be nul-terminated; `out` must be writable.
enum KocrStatus kocr_eval_page(const char *ocr_text,
                               const char *truth_text,
                               struct KocrEvalCounts *out);

// Library version, a static string.
const char *kocr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KANNADA_OCR_H */
