/* C interface to the triptych quantum secret-sharing toolkit. */

#ifndef TRIPTYCH_H
#define TRIPTYCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every entry point.
 */
typedef enum TriptychStatus {
  TRIPTYCH_STATUS_OK = 0,
  TRIPTYCH_STATUS_NULL_POINTER = 1,
  TRIPTYCH_STATUS_INVALID_ARGUMENT = 2,
  TRIPTYCH_STATUS_NOT_ORTHONORMAL = 3,
  TRIPTYCH_STATUS_RECOVERY_IMPOSSIBLE = 4,
  TRIPTYCH_STATUS_PARSE_ERROR = 5,
  TRIPTYCH_STATUS_INTERNAL = 6,
} TriptychStatus;

/**
 * Verdict of a certification run.
 */
typedef enum TriptychVerdict {
  TRIPTYCH_VERDICT_PERFECT = 0,
  TRIPTYCH_VERDICT_IMPERFECT = 1,
  TRIPTYCH_VERDICT_INVALID = 2,
} TriptychVerdict;

/**
 * Opaque handle to a constructed code space.
 */
typedef struct TriptychScheme TriptychScheme;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *triptych_last_error_message(void);

/**
 * Builds the cyclic-shift scheme with parameters (d, k1, k2).
 */
enum TriptychStatus triptych_scheme_shift(uintptr_t d,
                                          uintptr_t k1,
                                          uintptr_t k2,
                                          struct TriptychScheme **out);

/**
 * Builds the shift/phase scheme in which party 3 holds the phase leg.
 */
enum TriptychStatus triptych_scheme_vip(uintptr_t d, struct TriptychScheme **out);

/**
 * Parses a scheme description (same JSON format the CLI uses) and builds
 * its code space.
 */
enum TriptychStatus triptych_scheme_from_json(const char *json, struct TriptychScheme **out);

/**
 * Releases a scheme handle. Passing NULL is a no-op.
 */
void triptych_scheme_free(struct TriptychScheme *scheme);

/**
 * Number of encodable secrets (the rank of the code space).
 */
enum TriptychStatus triptych_scheme_rank(const struct TriptychScheme *scheme, uintptr_t *out);

/**
 * Runs the full threshold certification. `out_report_json`, when
 * non-NULL, receives the serialized report; free it with
 * `triptych_string_free`.
 */
enum TriptychStatus triptych_certify(const struct TriptychScheme *scheme,
                                     uintptr_t n_secrets,
                                     uint64_t seed,
                                     double tol,
                                     enum TriptychVerdict *out_verdict,
                                     char **out_report_json);

/**
 * Erases party `erased` (1, 2 or 3), runs the recovery channel on the
 * maximally mixed secret, and reports the Uhlmann fidelity.
 */
enum TriptychStatus triptych_recover_fidelity(const struct TriptychScheme *scheme,
                                              uint32_t erased,
                                              double *out_fidelity);

/**
 * Tripartite information of the uniform purification, in bits. Equals
 * -2 log2 d exactly when the scheme is a perfect threshold scheme.
 */
enum TriptychStatus triptych_uniform_i3_bits(const struct TriptychScheme *scheme, double *out_i3);

/**
 * Frees a string allocated by this library. Passing NULL is a no-op.
 */
void triptych_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIPTYCH_H */
