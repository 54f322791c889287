/* C interface to the twisted-polygon pentagram map pipeline.
 *
 * Every function returns GP_OK (0) on success. On failure the return code
 * classifies the error and gp_last_error() carries the full message for
 * the calling thread. Complex buffers interleave real and imaginary
 * parts: entry j occupies doubles 2*j (re) and 2*j + 1 (im).
 */

#ifndef GRASSPENTA_H
#define GRASSPENTA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  GP_OK = 0,
  GP_ERR_NULL_ARG = 1, /* a required pointer was NULL */
  GP_ERR_INVALID = 2,  /* bad dimensions, indices, or parameters */
  GP_ERR_JSON = 3,     /* malformed or mistyped JSON input */
  GP_ERR_NUMERIC = 4,  /* degenerate polygon or ill-conditioned step */
  GP_ERR_PANIC = 5     /* internal fault; state is still consistent */
};

/* Opaque moduli chain of a twisted N-gon in Gr(n, mn). */
typedef struct gp_chain gp_chain;

/* Message of the most recent failure on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread. */
const char *gp_last_error(void);

/* Draws a random twisted N-gon, normalizes it, and returns its canonical
 * moduli chain. Requires n >= 1, m >= 3, N >= m, gcd(N, m) = 1. The same
 * seed always yields the same chain. */
int gp_chain_random(size_t n, size_t m, size_t big_n, uint64_t seed,
                    gp_chain **out);

/* Parses a chain from its JSON form. Rational-field files are rejected;
 * the C surface is floating-point only. */
int gp_chain_from_json(const char *json, gp_chain **out);

/* Serializes a chain to JSON; release the string with gp_string_free. */
int gp_chain_to_json(const gp_chain *chain, char **out);

/* Writes the dimensions (n, m, N) of a chain. */
int gp_chain_dims(const gp_chain *chain, size_t *n, size_t *m, size_t *big_n);

/* Copies invariant block a_k^i (k < N, i < m) into re_im, row-major with
 * interleaved parts; re_im must hold 2*n*n doubles. */
int gp_chain_block(const gp_chain *chain, size_t k, size_t i, double *re_im);

/* Applies one step of the map and returns the canonically gauged image.
 * Pass tol <= 0 for the library default tolerance. */
int gp_chain_map(const gp_chain *chain, double tol, gp_chain **out);

/* Applies the scaling symmetry with parameter mu = mu_re + i*mu_im. */
int gp_chain_scale(const gp_chain *chain, double mu_re, double mu_im,
                   gp_chain **out);

/* Characteristic polynomial of the parameter-twisted monodromy at
 * mu = mu_re + i*mu_im: mn + 1 complex coefficients, lowest degree first;
 * coeffs must hold 2*(m*n + 1) doubles. Conserved by the map when
 * |mu| = 1. */
int gp_chain_spectral_poly(const gp_chain *chain, double mu_re, double mu_im,
                           double *coeffs);

/* Largest deviation of the gauge-invariant observables of two chains of
 * the same shape. */
int gp_observable_deviation(const gp_chain *a, const gp_chain *b, double *out);

/* Releases a chain handle. NULL is a no-op. */
void gp_chain_free(gp_chain *chain);

/* Releases a string returned by this library. NULL is a no-op. */
void gp_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* GRASSPENTA_H */
