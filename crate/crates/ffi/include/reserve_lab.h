#ifndef RESERVE_LAB_H
#define RESERVE_LAB_H

/* Generated from the Rust sources by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome; anything nonzero leaves a message for
 * `rl_last_error_message`.
 */
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  /**
   * Null pointer, malformed spec, or a parameter outside its domain.
   */
  RL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A numerical guarantee failed while computing.
   */
  RL_STATUS_NUMERICAL_ASSERTION = 3,
} RlStatus;

/**
 * Opaque valuation distribution handle.
 */
typedef struct RlDist RlDist;

/**
 * Opaque pricing strategy handle.
 */
typedef struct RlStrategy RlStrategy;

/**
 * Evaluation report: benchmark-relative ratio plus the Monte-Carlo
 * confidence half-width (zero on the exact quadrature path).
 */
typedef struct RlEvalReport {
  double ratio;
  double revenue;
  double benchmark;
  double ci95;
  uint64_t trials;
  uint64_t seed;
  bool used_quadrature;
  bool benchmark_attained;
} RlEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message from the most recent failing call on this thread; borrowed, valid
 * until the next failure, never null.
 */
const char *rl_last_error_message(void);

/**
 * Release a string returned through an `out` parameter. Null is a no-op.
 *
 * # Safety
 * `s` must be a string this library handed out through an `out` parameter
 * and not yet freed; the call takes ownership, so the pointer is dead after.
 */
void rl_string_free(char *s);

/**
 * Parse a distribution spec (shorthand like `exp:1`, or a JSON object) into
 * a handle.
 */
enum RlStatus rl_dist_parse(const char *spec, struct RlDist **out);

/**
 * Release a distribution handle. Null is a no-op.
 *
 * # Safety
 * `d` must come from `rl_dist_parse` and not yet be freed; the call takes
 * ownership, so the handle is dead after.
 */
void rl_dist_free(struct RlDist *d);

/**
 * Compact spec of the handle, parseable by `rl_dist_parse`.
 */
enum RlStatus rl_dist_shorthand(const struct RlDist *d, char **out);

/**
 * `P(V <= v)`.
 */
enum RlStatus rl_dist_cdf(const struct RlDist *d, double v, double *out);

/**
 * Sale probability `P(V >= p)` of posting price `p`.
 */
enum RlStatus rl_dist_survival(const struct RlDist *d, double p, double *out);

/**
 * Density at `v`; fails for families with an atom there.
 */
enum RlStatus rl_dist_pdf(const struct RlDist *d, double v, double *out);

/**
 * Value `v(q)` whose sale probability is `q`; fails at `q = 0` for
 * unbounded families.
 */
enum RlStatus rl_dist_value_at_quantile(const struct RlDist *d, double q, double *out);

/**
 * Sale probability of the value `v` (left limit at atoms).
 */
enum RlStatus rl_dist_quantile_of_value(const struct RlDist *d, double v, double *out);

/**
 * Expected revenue `p * P(V >= p)` of posting `p`.
 */
enum RlStatus rl_dist_revenue_at_price(const struct RlDist *d, double p, double *out);

/**
 * Draw `m` samples in descending order into `out` (capacity `m`),
 * reproducible from the seed alone.
 *
 * # Safety
 * `out` must point to writable storage for at least `m` doubles.
 */
enum RlStatus rl_dist_sample(const struct RlDist *d, uint64_t seed, size_t m, double *out);

/**
 * Optimal posted price summary: quantile, value, revenue, and whether the
 * optimum is attained (false means the revenue is a supremum).
 */
enum RlStatus rl_monopoly(const struct RlDist *d,
                          double *q_star,
                          double *v_star,
                          double *r_star,
                          bool *attained);

/**
 * Best revenue over prices selling with probability at least `delta`.
 */
enum RlStatus rl_restricted_optimal(const struct RlDist *d, double delta, double *out);

/**
 * Parse a strategy spec (shorthand like `guarded:0.37`, or a JSON object)
 * into a handle.
 */
enum RlStatus rl_strategy_parse(const char *spec, struct RlStrategy **out);

/**
 * Release a strategy handle. Null is a no-op.
 *
 * # Safety
 * `s` must come from `rl_strategy_parse` and not yet be freed; the call
 * takes ownership, so the handle is dead after.
 */
void rl_strategy_free(struct RlStrategy *s);

/**
 * Price the strategy posts for a batch of `m` sample values (any order).
 *
 * # Safety
 * `values` must point to at least `m` readable doubles.
 */
enum RlStatus rl_post_price(const struct RlStrategy *s,
                            const double *values,
                            size_t m,
                            double *out);

/**
 * Expected revenue of the strategy on `m`-sample batches, relative to the
 * monopoly benchmark (`restricted_delta <= 0`) or to the best price selling
 * with probability at least `restricted_delta`. Exact quadrature when
 * available, seeded Monte-Carlo otherwise; `threads = 0` picks the machine
 * default and never changes the numbers.
 */
enum RlStatus rl_eval_strategy(const struct RlDist *d,
                               const struct RlStrategy *s,
                               uint64_t m,
                               uint64_t trials,
                               uint64_t seed,
                               size_t threads,
                               double restricted_delta,
                               struct RlEvalReport *out);

/**
 * Exact ratio of the scaled single-sample rule at factor `c`.
 */
enum RlStatus rl_scaled_ratio(const struct RlDist *d, double c, double *out);

/**
 * Build a hard distribution pair and return its report as a JSON string:
 * members, divergences, reduction sample counts, price components and their
 * disjointness. `kind` is `general` (uses `delta` and `epsilon`), `regular`
 * (uses `epsilon`), or `mhr` (uses `epsilon0` and `epsilon`); unused
 * parameters are ignored.
 */
enum RlStatus rl_lb_pair_json(const char *kind,
                              double delta,
                              double epsilon0,
                              double epsilon,
                              char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RESERVE_LAB_H */
