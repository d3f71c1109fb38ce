#ifndef CLOCKLAM_H
#define CLOCKLAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClkMode {
  CLK_MODE_COUNT = 0,
  CLK_MODE_ATOMIC = 1,
} ClkMode;

// Result of every call.
typedef enum ClkStatus {
  CLK_STATUS_OK = 0,
  CLK_STATUS_NULL_POINTER = 1,
  CLK_STATUS_INVALID_UTF8 = 2,
  CLK_STATUS_PARSE_ERROR = 3,
  CLK_STATUS_INVALID_ARGUMENT = 4,
  CLK_STATUS_PANIC = 5,
} ClkStatus;

typedef enum ClkStrategy {
  CLK_STRATEGY_HEAD = 0,
  CLK_STRATEGY_WHNF = 1,
  CLK_STRATEGY_ROOT_STABLE = 2,
  CLK_STRATEGY_NORMALIZE = 3,
} ClkStrategy;

typedef enum ClkOutcome {
  CLK_OUTCOME_REACHED = 0,
  CLK_OUTCOME_CYCLE = 1,
  CLK_OUTCOME_FUEL_EXHAUSTED = 2,
} ClkOutcome;

typedef enum ClkFlavor {
  CLK_FLAVOR_BT = 0,
  CLK_FLAVOR_LLT = 1,
  CLK_FLAVOR_BET = 2,
} ClkFlavor;

typedef enum ClkVerdict {
  CLK_VERDICT_INCONVERTIBLE = 0,
  CLK_VERDICT_CONVERTIBLE = 1,
  CLK_VERDICT_INCONCLUSIVE = 2,
} ClkVerdict;

// A lambda term.
typedef struct ClkTerm ClkTerm;

typedef struct ClkBudgets {
  size_t depth;
  size_t fuel;
  size_t search;
  size_t max_nodes;
  enum ClkMode mode;
} ClkBudgets;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default budgets: depth 16, fuel 10000, search 2000, 512 graph nodes, count mode.
struct ClkBudgets clk_budgets_default(void);

// Message for the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *clk_last_error(void);

// Parses `text`, which may use the names Y0, Y1, U2, δ, S, K, I and so on.
//
// # Safety
// `text` must be a nul-terminated string and `out` writable.
enum ClkStatus clk_term_parse(const char *text, struct ClkTerm **out);

// # Safety
// `t` must come from this library and not be freed twice. Null is ignored.
void clk_term_free(struct ClkTerm *t);

// # Safety
// `t` must be a live handle and `out` writable.
enum ClkStatus clk_term_clone(const struct ClkTerm *t, struct ClkTerm **out);

// Writes the term as text, ASCII (`\x.`) unless `unicode` is nonzero.
//
// # Safety
// `t` must be a live handle and `out` writable. Free the string with
// `clk_string_free`.
enum ClkStatus clk_term_print(const struct ClkTerm *t, int32_t unicode, char **out);

// Nonzero when the two terms are alpha-equal.
//
// # Safety
// Both handles must be live and `out` writable.
enum ClkStatus clk_term_equal(const struct ClkTerm *a, const struct ClkTerm *b, int32_t *out);

// # Safety
// `s` must come from this library and not be freed twice. Null is ignored.
void clk_string_free(char *s);

// Reduces `t` with the given strategy. `result` receives the final term and
// `steps` the number of steps taken. Either may be null.
//
// # Safety
// `t` must be a live handle and `outcome` writable.
enum ClkStatus clk_reduce(const struct ClkTerm *t,
                          enum ClkStrategy strategy,
                          size_t fuel,
                          enum ClkOutcome *outcome,
                          size_t *steps,
                          struct ClkTerm **result);

// The clocked tree of `t` as JSON, truncated at `budgets.depth`. Null
// budgets mean the defaults.
//
// # Safety
// `t` must be a live handle, `budgets` null or readable, `out` writable.
enum ClkStatus clk_tree_json(const struct ClkTerm *t,
                             enum ClkFlavor flavor,
                             const struct ClkBudgets *budgets_in,
                             char **out);

// Decides whether `m` and `n` are inconvertible. `json` receives the verdict
// with its certificate and may be null.
//
// # Safety
// Both handles must be live, `budgets` null or readable, `verdict` writable.
enum ClkStatus clk_discriminate(const struct ClkTerm *m,
                                const struct ClkTerm *n,
                                const struct ClkBudgets *budgets_in,
                                enum ClkVerdict *verdict,
                                char **json);

// Builds a family (`bohm`, `scott`, `schemes`, `vectors` or `delta`) and
// returns the report as JSON. `selection` may be null.
//
// # Safety
// `family` must be a nul-terminated string, `selection` null or one,
// `budgets` null or readable, `out` writable.
enum ClkStatus clk_catalog_json(const char *family,
                                const char *selection,
                                const struct ClkBudgets *budgets_in,
                                char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLOCKLAM_H */
