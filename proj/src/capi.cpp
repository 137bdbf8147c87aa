#include "serialize.hpp"

#include <sublock/sublock.h>

#include <cstring>
#include <new>

struct sl_netlist {
  sublock::Netlist nl;
};

struct sl_lock_result {
  sublock::LockResult result;
  sublock::LockConfig config;
  sublock::Netlist original;
  sl_netlist locked;
};

namespace {

using namespace sublock;

thread_local std::string last_error;

sl_status status_of(ErrorCode code) {
  switch (code) {
  case ErrorCode::Parse:
  case ErrorCode::UndefinedNet:
  case ErrorCode::DuplicateDefinition:
  case ErrorCode::CombinationalCycle:
  case ErrorCode::UnknownGate: return SL_ERR_PARSE;
  case ErrorCode::Io: return SL_ERR_IO;
  case ErrorCode::InsufficientCandidates: return SL_ERR_INSUFFICIENT_CANDIDATES;
  case ErrorCode::EquivalenceFailure: return SL_ERR_EQUIVALENCE;
  case ErrorCode::UniversalKeyGate: return SL_ERR_UNIVERSAL_KEY;
  case ErrorCode::IterationBudgetExceeded: return SL_ERR_BUDGET_EXCEEDED;
  case ErrorCode::ScaleBound: return SL_ERR_SCALE_BOUND;
  case ErrorCode::ArityMismatch:
  case ErrorCode::LengthMismatch: return SL_ERR_ARITY;
  case ErrorCode::Internal: return SL_ERR_INTERNAL;
  default: return SL_ERR_INVALID_ARGUMENT;
  }
}

sl_status fail(sl_status s, const std::string &msg) {
  last_error = msg;
  return s;
}

// Runs `body`, turning exceptions into status codes.
template <typename F> sl_status guarded(F &&body) {
  last_error.clear();
  try {
    return body();
  } catch (const Error &e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return fail(SL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(SL_ERR_INTERNAL, e.what());
  }
}

char *dup(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p)
    throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

#define SL_REQUIRE(cond, what)                                                                                         \
  do {                                                                                                                 \
    if (!(cond))                                                                                                       \
      return fail(SL_ERR_INVALID_ARGUMENT, what);                                                                      \
  } while (0)

LockConfig to_config(const sl_lock_config &c) {
  LockConfig cfg;
  cfg.budget_key_bits = c.budget_key_bits;
  cfg.support_sizes.clear();
  for (std::size_t s = 0; s < 32; ++s)
    if (c.support_sizes_mask >> s & 1U)
      cfg.support_sizes.insert(s);
  if (c.strategy != SL_STRATEGY_RANDOM && c.strategy != SL_STRATEGY_FAULT_IMPACT)
    throw Error(ErrorCode::InvalidArgument, "unknown selection strategy");
  cfg.strategy = c.strategy == SL_STRATEGY_RANDOM ? SelectStrategy::Random : SelectStrategy::FaultImpact;
  if (c.dontcare_policy != SL_POLICY_DONTCARE && c.dontcare_policy != SL_POLICY_COMPLEMENT)
    throw Error(ErrorCode::InvalidArgument, "unknown don't-care policy");
  cfg.dontcare_policy = c.dontcare_policy == SL_POLICY_DONTCARE ? DontCarePolicy::DontCare : DontCarePolicy::Complement;
  if (c.plan_strategy != SL_PLAN_MSB_SPLIT && c.plan_strategy != SL_PLAN_BALANCED_RANDOM)
    throw Error(ErrorCode::InvalidArgument, "unknown plan strategy");
  cfg.plan_strategy = c.plan_strategy == SL_PLAN_MSB_SPLIT ? PlanStrategy::MsbSplit : PlanStrategy::BalancedRandom;
  cfg.key_bits_per_lock = c.key_bits_per_lock;
  cfg.sets_per_lock = c.sets_per_lock;
  cfg.seed = c.seed;
  cfg.corruption_trials = c.corruption_trials;
  for (std::size_t i = 0; i < c.num_roots; ++i)
    cfg.roots.emplace_back(c.roots[i]);
  return cfg;
}

} // namespace

extern "C" {

const char *sl_version(void) { return sublock::tool_version; }

const char *sl_status_name(sl_status status) {
  switch (status) {
  case SL_OK: return "ok";
  case SL_ERR_IO: return "i/o error";
  case SL_ERR_PARSE: return "parse error";
  case SL_ERR_INVALID_ARGUMENT: return "invalid argument";
  case SL_ERR_INSUFFICIENT_CANDIDATES: return "insufficient candidates";
  case SL_ERR_EQUIVALENCE: return "equivalence failure";
  case SL_ERR_UNIVERSAL_KEY: return "universal key";
  case SL_ERR_BUDGET_EXCEEDED: return "budget exceeded";
  case SL_ERR_SCALE_BOUND: return "scale bound exceeded";
  case SL_ERR_ARITY: return "arity mismatch";
  case SL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *sl_last_error(void) { return last_error.c_str(); }

void sl_string_free(char *s) { std::free(s); }

sl_status sl_netlist_read_file(const char *path, sl_netlist **out) {
  SL_REQUIRE(path && out, "null argument");
  return guarded([&] {
    *out = new sl_netlist{read_bench_file(path)};
    return SL_OK;
  });
}

sl_status sl_netlist_parse(const char *text, sl_netlist **out) {
  SL_REQUIRE(text && out, "null argument");
  return guarded([&] {
    *out = new sl_netlist{parse_bench(text)};
    return SL_OK;
  });
}

void sl_netlist_free(sl_netlist *nl) { delete nl; }

sl_status sl_netlist_to_bench(const sl_netlist *nl, char **out) {
  SL_REQUIRE(nl && out, "null argument");
  return guarded([&] {
    *out = dup(emit_bench(nl->nl));
    return SL_OK;
  });
}

size_t sl_netlist_num_inputs(const sl_netlist *nl) { return nl ? nl->nl.primary_inputs().size() : 0; }
size_t sl_netlist_num_keys(const sl_netlist *nl) { return nl ? nl->nl.key_inputs().size() : 0; }
size_t sl_netlist_num_outputs(const sl_netlist *nl) { return nl ? nl->nl.primary_outputs().size() : 0; }
size_t sl_netlist_num_gates(const sl_netlist *nl) { return nl ? nl->nl.gates().size() : 0; }

void sl_lock_config_default(sl_lock_config *cfg) {
  if (!cfg)
    return;
  LockConfig d;
  *cfg = sl_lock_config{};
  cfg->budget_key_bits = static_cast<uint32_t>(d.budget_key_bits);
  for (auto s : d.support_sizes)
    cfg->support_sizes_mask |= 1U << s;
  cfg->strategy = SL_STRATEGY_RANDOM;
  cfg->dontcare_policy = SL_POLICY_DONTCARE;
  cfg->plan_strategy = SL_PLAN_MSB_SPLIT;
  cfg->key_bits_per_lock = static_cast<uint32_t>(d.key_bits_per_lock);
  cfg->sets_per_lock = static_cast<uint32_t>(d.sets_per_lock);
  cfg->seed = d.seed;
  cfg->corruption_trials = d.corruption_trials;
}

sl_status sl_lock(const sl_netlist *design, const sl_lock_config *cfg, sl_lock_result **out) {
  SL_REQUIRE(design && cfg && out, "null argument");
  return guarded([&] {
    auto r = std::make_unique<sl_lock_result>();
    r->config = to_config(*cfg);
    r->original = design->nl;
    r->result = lock_design(design->nl, r->config);
    r->locked.nl = r->result.locked;
    *out = r.release();
    return SL_OK;
  });
}

void sl_lock_result_free(sl_lock_result *r) { delete r; }

const sl_netlist *sl_lock_result_netlist(const sl_lock_result *r) { return r ? &r->locked : nullptr; }

sl_status sl_lock_result_keymem_json(const sl_lock_result *r, char **out) {
  SL_REQUIRE(r && out, "null argument");
  return guarded([&] {
    *out = dup(keymem_json(r->result.memory, r->config.seed).dump(2) + "\n");
    return SL_OK;
  });
}

sl_status sl_lock_result_report_json(const sl_lock_result *r, const char *input_name, char **out) {
  SL_REQUIRE(r && out, "null argument");
  return guarded([&] {
    *out = dup(lock_report_json(r->result.report, r->config, r->original, input_name ? input_name : "").dump(2) +
               "\n");
    return SL_OK;
  });
}

void sl_attack_options_default(sl_attack_options *opt) {
  if (!opt)
    return;
  *opt = sl_attack_options{};
  opt->max_iters = 0;
  opt->time_limit_ms = -1;
}

sl_status sl_attack(const sl_netlist *locked, const sl_netlist *oracle, const sl_attack_options *opt,
                    int *attack_status, char **report_json, char **trace_jsonl) {
  SL_REQUIRE(locked && oracle && opt && attack_status && report_json, "null argument");
  return guarded([&] {
    AttackRun run;
    run.locked_name = opt->locked_name ? opt->locked_name : "";
    run.oracle_name = opt->oracle_name ? opt->oracle_name : "";
    run.options.max_iters = opt->max_iters;
    run.options.time_limit_ms = opt->time_limit_ms;
    Oracle o(oracle->nl);
    AttackReport report;
    sl_status st = SL_OK;
    try {
      report = sat_attack(locked->nl, o, run.options);
    } catch (const AttackBudgetExceeded &e) {
      report = e.partial();
      run.budget_exceeded = true;
      st = fail(SL_ERR_BUDGET_EXCEEDED, e.what());
    }
    *attack_status = report.status == AttackStatus::KeyFound   ? SL_ATTACK_KEY_FOUND
                     : report.status == AttackStatus::WrongKey ? SL_ATTACK_WRONG_KEY
                                                               : SL_ATTACK_UNSAT_NO_KEY;
    *report_json = dup(attack_report_json(report, locked->nl, run).dump(2) + "\n");
    if (trace_jsonl)
      *trace_jsonl = dup(attack_trace_jsonl(report));
    return st;
  });
}

sl_status sl_attack_dimacs(const sl_netlist *locked, char **out) {
  SL_REQUIRE(locked && out, "null argument");
  return guarded([&] {
    *out = dup(dip_miter_cnf(locked->nl).to_dimacs());
    return SL_OK;
  });
}

sl_status sl_verify(const sl_netlist *locked, const char *keymem_json, const sl_netlist *original,
                    char **verdict_json) {
  SL_REQUIRE(locked && keymem_json && original && verdict_json, "null argument");
  return guarded([&] {
    std::vector<KeyMemory> memory = keymem_from_json(keymem_json);
    Json doc = Json::parse(keymem_json);
    Json seed = doc.contains("seed") ? doc["seed"] : Json(nullptr);

    const std::size_t n = original->nl.primary_inputs().size();
    Json verdict{{"tool_version", tool_version},
                 {"seed", seed},
                 {"config", Json{{"blocks", memory.size()},
                                 {"key_inputs", locked->nl.key_inputs().size()},
                                 {"equivalence_method", n <= 16 ? "exhaustive" : "sat"}}}};
    Netlist active = activate(locked->nl, memory);
    EquivalenceResult eq = check_equivalence(active, {}, original->nl, {});
    verdict["equivalent"] = eq.equivalent;
    verdict["counterexample"] = eq.counterexample ? Json(bits_to_string(*eq.counterexample)) : Json(nullptr);
    sl_status st = SL_OK;
    std::optional<Bits> universal;
    if (eq.equivalent) {
      universal = find_universal_key(locked->nl, original->nl);
      if (universal)
        st = fail(SL_ERR_UNIVERSAL_KEY, "key " + bits_to_string(*universal) + " unlocks every input");
    } else {
      st = fail(SL_ERR_EQUIVALENCE, "activated design differs on input " + bits_to_string(*eq.counterexample));
    }
    verdict["universal_key_checked"] = eq.equivalent;
    verdict["universal_key"] = universal ? Json(bits_to_string(*universal)) : Json(nullptr);
    verdict["ok"] = st == SL_OK;
    *verdict_json = dup(verdict.dump(2) + "\n");
    return st;
  });
}

sl_status sl_analyze(uint32_t k, int scheme, int approx, char **out) {
  SL_REQUIRE(out, "null argument");
  SL_REQUIRE(scheme >= SL_SCHEME_IDKLL && scheme <= SL_SCHEME_ANTISAT, "unknown scheme");
  return guarded([&] {
    Scheme s = scheme == SL_SCHEME_IDKLL ? Scheme::Idkll
               : scheme == SL_SCHEME_CONVENTIONAL ? Scheme::Conventional
                                                  : Scheme::AntiSat;
    *out = dup(analyze_json(k, s, approx != 0).dump(2) + "\n");
    return SL_OK;
  });
}

sl_status sl_design_report(const sl_netlist *const *designs, const char *const *names, size_t count,
                           const sl_lock_config *cfg, unsigned jobs, char **out) {
  SL_REQUIRE((designs && names) || count == 0, "null argument");
  SL_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    std::vector<const Netlist *> nls;
    std::vector<std::string> ns;
    for (size_t i = 0; i < count; ++i) {
      if (!designs[i] || !names[i])
        throw Error(ErrorCode::InvalidArgument, "null design");
      nls.push_back(&designs[i]->nl);
      ns.emplace_back(names[i]);
    }
    *out = dup(design_report_json(nls, ns, to_config(*cfg), jobs).dump(2) + "\n");
    return SL_OK;
  });
}

} // extern "C"
