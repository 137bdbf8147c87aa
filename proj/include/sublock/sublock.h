#ifndef SUBLOCK_SUBLOCK_H
#define SUBLOCK_SUBLOCK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define SL_API __attribute__((visibility("default")))
#else
#define SL_API
#endif

/* Every call returns a status; on failure sl_last_error() holds a message
 * for the calling thread until its next call. Strings returned through
 * `char **` are owned by the caller and released with sl_string_free(). */
typedef enum sl_status {
  SL_OK = 0,
  SL_ERR_IO = 1,
  SL_ERR_PARSE = 2,
  SL_ERR_INVALID_ARGUMENT = 3,
  SL_ERR_INSUFFICIENT_CANDIDATES = 4,
  SL_ERR_EQUIVALENCE = 5,
  SL_ERR_UNIVERSAL_KEY = 6,
  SL_ERR_BUDGET_EXCEEDED = 7,
  SL_ERR_SCALE_BOUND = 8,
  SL_ERR_ARITY = 9,
  SL_ERR_INTERNAL = 10
} sl_status;

typedef struct sl_netlist sl_netlist;
typedef struct sl_lock_result sl_lock_result;

SL_API const char *sl_version(void);
SL_API const char *sl_status_name(sl_status status);
SL_API const char *sl_last_error(void);
SL_API void sl_string_free(char *s);

/* Netlists (.bench). Flip-flops become pseudo inputs and outputs; inputs
 * named keyinput* are key inputs. */
SL_API sl_status sl_netlist_read_file(const char *path, sl_netlist **out);
SL_API sl_status sl_netlist_parse(const char *text, sl_netlist **out);
SL_API void sl_netlist_free(sl_netlist *nl);
SL_API sl_status sl_netlist_to_bench(const sl_netlist *nl, char **out);
SL_API size_t sl_netlist_num_inputs(const sl_netlist *nl);
SL_API size_t sl_netlist_num_keys(const sl_netlist *nl);
SL_API size_t sl_netlist_num_outputs(const sl_netlist *nl);
SL_API size_t sl_netlist_num_gates(const sl_netlist *nl);

typedef enum sl_strategy { SL_STRATEGY_RANDOM = 0, SL_STRATEGY_FAULT_IMPACT = 1 } sl_strategy;
typedef enum sl_dontcare_policy { SL_POLICY_DONTCARE = 0, SL_POLICY_COMPLEMENT = 1 } sl_dontcare_policy;
typedef enum sl_plan_strategy { SL_PLAN_MSB_SPLIT = 0, SL_PLAN_BALANCED_RANDOM = 1 } sl_plan_strategy;

typedef struct sl_lock_config {
  uint32_t budget_key_bits;
  /* Bit s set: cuts with s leaves are candidates (2 <= s <= 6). */
  uint32_t support_sizes_mask;
  int strategy;
  int dontcare_policy;
  int plan_strategy;
  uint32_t key_bits_per_lock;
  uint32_t sets_per_lock;
  uint64_t seed;
  uint64_t corruption_trials;
  /* Optional: lock only cuts rooted at these nets. */
  const char *const *roots;
  size_t num_roots;
} sl_lock_config;

/* Defaults: sizes {3,4}, random selection, don't-care policy, MSB split,
 * 2 key bits and 2 sets per lock, 10000 corruption trials. */
SL_API void sl_lock_config_default(sl_lock_config *cfg);

/* Fails with SL_ERR_INSUFFICIENT_CANDIDATES when the design has too few
 * disjoint cuts, SL_ERR_EQUIVALENCE or SL_ERR_UNIVERSAL_KEY when a built lock
 * does not pass the emission gates. */
SL_API sl_status sl_lock(const sl_netlist *design, const sl_lock_config *cfg, sl_lock_result **out);
SL_API void sl_lock_result_free(sl_lock_result *r);
/* Borrowed; valid while the result lives. */
SL_API const sl_netlist *sl_lock_result_netlist(const sl_lock_result *r);
SL_API sl_status sl_lock_result_keymem_json(const sl_lock_result *r, char **out);
SL_API sl_status sl_lock_result_report_json(const sl_lock_result *r, const char *input_name, char **out);

typedef enum sl_attack_status {
  SL_ATTACK_KEY_FOUND = 0,
  SL_ATTACK_WRONG_KEY = 1,
  SL_ATTACK_UNSAT_NO_KEY = 2
} sl_attack_status;

typedef struct sl_attack_options {
  uint64_t max_iters;    /* 0: 10 * 2^min(k, 20) */
  int64_t time_limit_ms; /* negative: none */
  const char *locked_name;
  const char *oracle_name;
} sl_attack_options;

SL_API void sl_attack_options_default(sl_attack_options *opt);

/* Oracle-guided SAT attack; `oracle` is the unlocked design, used only for
 * input/output queries and final key validation. On SL_ERR_BUDGET_EXCEEDED
 * the report and trace describe the partial run. `trace_jsonl` may be NULL. */
SL_API sl_status sl_attack(const sl_netlist *locked, const sl_netlist *oracle, const sl_attack_options *opt,
                           int *attack_status, char **report_json, char **trace_jsonl);
/* DIMACS CNF of the first distinguishing-input query. */
SL_API sl_status sl_attack_dimacs(const sl_netlist *locked, char **out);

/* Activation equivalence, then absence of a universal key. Returns SL_OK,
 * SL_ERR_EQUIVALENCE or SL_ERR_UNIVERSAL_KEY, with the verdict filled in
 * for all three. */
SL_API sl_status sl_verify(const sl_netlist *locked, const char *keymem_json, const sl_netlist *original,
                           char **verdict_json);

typedef enum sl_scheme { SL_SCHEME_IDKLL = 0, SL_SCHEME_CONVENTIONAL = 1, SL_SCHEME_ANTISAT = 2 } sl_scheme;

/* Brute-force attempt counts as exact decimal strings; SL_ERR_SCALE_BOUND
 * past the exact range unless `approx` is set. */
SL_API sl_status sl_analyze(uint32_t k, int scheme, int approx, char **out);

/* Per-design structure, cut counts, and SubLock vs Anti-SAT overhead at the
 * configured key budget. */
SL_API sl_status sl_design_report(const sl_netlist *const *designs, const char *const *names, size_t count,
                                  const sl_lock_config *cfg, unsigned jobs, char **out);

#ifdef __cplusplus
}
#endif

#endif
