#include <sublock/sublock.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

// Public exit codes.
enum Exit {
  ExitOk = 0,
  ExitFailure = 1,
  ExitInsufficient = 2,
  ExitLockGate = 3,
  ExitBudget = 4,
  ExitNotEquivalent = 5,
  ExitUniversalKey = 6,
  ExitKeyFound = 10,
};

struct NetlistFree {
  void operator()(sl_netlist *p) const { sl_netlist_free(p); }
};
using NetlistPtr = std::unique_ptr<sl_netlist, NetlistFree>;

struct LockFree {
  void operator()(sl_lock_result *p) const { sl_lock_result_free(p); }
};

// Owns a string returned by the library.
struct Text {
  char *p = nullptr;
  ~Text() { sl_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

void complain(sl_status s) { std::cerr << "sublock: " << sl_status_name(s) << ": " << sl_last_error() << "\n"; }

bool read_netlist(const std::string &path, NetlistPtr &out) {
  sl_netlist *nl = nullptr;
  sl_status s = sl_netlist_read_file(path.c_str(), &nl);
  if (s != SL_OK) {
    complain(s);
    return false;
  }
  out.reset(nl);
  return true;
}

bool write_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    std::cerr << "sublock: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

bool read_file(const std::string &path, std::string &text) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "sublock: cannot open '" << path << "'\n";
    return false;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  text = ss.str();
  return true;
}

struct LockFlags {
  std::uint32_t keys = 0;
  std::vector<unsigned> sizes{3, 4};
  std::string strategy = "random";
  std::string policy = "dontcare";
  std::string plan = "msb";
  std::uint32_t bits_per_lock = 2;
  std::uint32_t sets_per_lock = 2;
  std::uint64_t seed = 0;
  std::uint64_t trials = 10000;
  std::vector<std::string> roots;
};

void add_lock_flags(CLI::App *cmd, LockFlags &f) {
  cmd->add_option("-k,--keys", f.keys, "Total key bits")->required();
  cmd->add_option("--seed", f.seed, "Seed for every random choice")->required();
  cmd->add_option("--sizes", f.sizes, "Allowed cut support sizes")->delimiter(',')->check(CLI::Range(2, 6));
  cmd->add_option("--strategy", f.strategy, "Cut selection")->check(CLI::IsMember({"random", "fault-impact"}));
  cmd->add_option("--policy", f.policy, "Entries under unused keys")->check(CLI::IsMember({"dontcare", "complement"}));
  cmd->add_option("--plan", f.plan, "Input partition")->check(CLI::IsMember({"msb", "balanced"}));
  cmd->add_option("--bits-per-lock", f.bits_per_lock, "Key bits per replaced cut")->check(CLI::Range(1, 16));
  cmd->add_option("--sets-per-lock", f.sets_per_lock, "Input sets per replaced cut")->check(CLI::Range(2, 65536));
  cmd->add_option("--corruption-trials", f.trials, "Samples for the corruption estimate")->check(CLI::PositiveNumber);
}

sl_lock_config to_config(const LockFlags &f, std::vector<const char *> &roots) {
  sl_lock_config c;
  sl_lock_config_default(&c);
  c.budget_key_bits = f.keys;
  c.support_sizes_mask = 0;
  for (unsigned s : f.sizes)
    c.support_sizes_mask |= 1U << s;
  c.strategy = f.strategy == "random" ? SL_STRATEGY_RANDOM : SL_STRATEGY_FAULT_IMPACT;
  c.dontcare_policy = f.policy == "dontcare" ? SL_POLICY_DONTCARE : SL_POLICY_COMPLEMENT;
  c.plan_strategy = f.plan == "msb" ? SL_PLAN_MSB_SPLIT : SL_PLAN_BALANCED_RANDOM;
  c.key_bits_per_lock = f.bits_per_lock;
  c.sets_per_lock = f.sets_per_lock;
  c.seed = f.seed;
  c.corruption_trials = f.trials;
  roots.clear();
  for (const auto &r : f.roots)
    roots.push_back(r.c_str());
  c.roots = roots.data();
  c.num_roots = roots.size();
  return c;
}

std::string default_prefix(const std::string &input) {
  std::string p = input;
  if (p.size() > 6 && p.compare(p.size() - 6, 6, ".bench") == 0)
    p.resize(p.size() - 6);
  return p + "_locked";
}

int cmd_lock(const std::string &input, const std::string &out, const LockFlags &flags) {
  NetlistPtr design;
  if (!read_netlist(input, design))
    return ExitFailure;
  std::vector<const char *> roots;
  sl_lock_config cfg = to_config(flags, roots);
  sl_lock_result *raw = nullptr;
  sl_status s = sl_lock(design.get(), &cfg, &raw);
  if (s != SL_OK) {
    complain(s);
    if (s == SL_ERR_INSUFFICIENT_CANDIDATES)
      return ExitInsufficient;
    if (s == SL_ERR_EQUIVALENCE || s == SL_ERR_UNIVERSAL_KEY)
      return ExitLockGate;
    return ExitFailure;
  }
  std::unique_ptr<sl_lock_result, LockFree> result(raw);
  const std::string prefix = out.empty() ? default_prefix(input) : out;
  Text bench, keymem, report;
  if ((s = sl_netlist_to_bench(sl_lock_result_netlist(result.get()), &bench.p)) != SL_OK ||
      (s = sl_lock_result_keymem_json(result.get(), &keymem.p)) != SL_OK ||
      (s = sl_lock_result_report_json(result.get(), input.c_str(), &report.p)) != SL_OK) {
    complain(s);
    return ExitFailure;
  }
  if (!write_file(prefix + ".bench", bench.str()) || !write_file(prefix + ".keymem.json", keymem.str()) ||
      !write_file(prefix + ".report.json", report.str()))
    return ExitFailure;
  std::cout << prefix << ".bench " << prefix << ".keymem.json " << prefix << ".report.json\n";
  return ExitOk;
}

struct AttackFlags {
  std::string oracle;
  std::string report;
  std::string trace;
  std::string cnf;
  std::uint64_t max_iters = 0;
  std::int64_t time_limit_ms = -1;
};

int cmd_attack(const std::string &locked_path, const AttackFlags &f) {
  NetlistPtr locked, oracle;
  if (!read_netlist(locked_path, locked) || !read_netlist(f.oracle, oracle))
    return ExitFailure;
  if (!f.cnf.empty()) {
    Text cnf;
    if (sl_status s = sl_attack_dimacs(locked.get(), &cnf.p); s != SL_OK) {
      complain(s);
      return ExitFailure;
    }
    if (!write_file(f.cnf, cnf.str()))
      return ExitFailure;
  }
  sl_attack_options opt;
  sl_attack_options_default(&opt);
  opt.max_iters = f.max_iters;
  opt.time_limit_ms = f.time_limit_ms;
  opt.locked_name = locked_path.c_str();
  opt.oracle_name = f.oracle.c_str();
  int status = 0;
  Text report, trace;
  sl_status s = sl_attack(locked.get(), oracle.get(), &opt, &status, &report.p, &trace.p);
  if (s != SL_OK && s != SL_ERR_BUDGET_EXCEEDED) {
    complain(s);
    return ExitFailure;
  }
  if (f.report.empty())
    std::cout << report.str();
  else if (!write_file(f.report, report.str()))
    return ExitFailure;
  if (!f.trace.empty() && !write_file(f.trace, trace.str()))
    return ExitFailure;
  if (s == SL_ERR_BUDGET_EXCEEDED) {
    complain(s);
    return ExitBudget;
  }
  return status == SL_ATTACK_KEY_FOUND ? ExitKeyFound : ExitOk;
}

int cmd_verify(const std::string &locked_path, const std::string &keymem_path, const std::string &original_path) {
  NetlistPtr locked, original;
  std::string keymem;
  if (!read_netlist(locked_path, locked) || !read_netlist(original_path, original) || !read_file(keymem_path, keymem))
    return ExitFailure;
  Text verdict;
  sl_status s = sl_verify(locked.get(), keymem.c_str(), original.get(), &verdict.p);
  if (s == SL_OK || s == SL_ERR_EQUIVALENCE || s == SL_ERR_UNIVERSAL_KEY)
    std::cout << verdict.str();
  switch (s) {
  case SL_OK: return ExitOk;
  case SL_ERR_EQUIVALENCE: complain(s); return ExitNotEquivalent;
  case SL_ERR_UNIVERSAL_KEY: complain(s); return ExitUniversalKey;
  default: complain(s); return ExitFailure;
  }
}

int cmd_analyze(std::uint32_t k, const std::string &scheme, bool approx) {
  int sc = scheme == "idkll" ? SL_SCHEME_IDKLL : scheme == "conventional" ? SL_SCHEME_CONVENTIONAL : SL_SCHEME_ANTISAT;
  Text out;
  if (sl_status s = sl_analyze(k, sc, approx, &out.p); s != SL_OK) {
    complain(s);
    return ExitFailure;
  }
  std::cout << out.str();
  return ExitOk;
}

int cmd_report(const std::vector<std::string> &inputs, const LockFlags &flags, unsigned jobs, const std::string &out) {
  std::vector<NetlistPtr> owned;
  std::vector<const sl_netlist *> designs;
  std::vector<const char *> names;
  for (const auto &path : inputs) {
    NetlistPtr nl;
    if (!read_netlist(path, nl))
      return ExitFailure;
    designs.push_back(nl.get());
    names.push_back(path.c_str());
    owned.push_back(std::move(nl));
  }
  std::vector<const char *> roots;
  sl_lock_config cfg = to_config(flags, roots);
  Text text;
  if (sl_status s = sl_design_report(designs.data(), names.data(), designs.size(), &cfg, jobs, &text.p); s != SL_OK) {
    complain(s);
    return ExitFailure;
  }
  if (out.empty())
    std::cout << text.str();
  else if (!write_file(out, text.str()))
    return ExitFailure;
  return ExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Logic locking by sub-circuit replacement with input-dependent keys"};
  app.set_version_flag("--version", std::string(sl_version()));
  app.require_subcommand(1);

  std::string input, out;
  LockFlags lock_flags;
  auto *lock = app.add_subcommand("lock", "Lock a design; writes <out>.bench, <out>.keymem.json, <out>.report.json");
  lock->add_option("input", input, "Design in .bench format")->required();
  lock->add_option("-o,--out", out, "Output prefix (default: <input>_locked)");
  add_lock_flags(lock, lock_flags);
  lock->add_option("--root", lock_flags.roots, "Only lock cuts rooted at these nets");

  std::string locked_path;
  AttackFlags attack_flags;
  auto *attack = app.add_subcommand("attack", "Run the SAT attack; exit 10 if a working key is found");
  attack->add_option("locked", locked_path, "Locked design")->required();
  attack->add_option("--oracle", attack_flags.oracle, "Unlocked design used as the oracle")->required();
  attack->add_option("--report", attack_flags.report, "Write the report here instead of stdout");
  attack->add_option("--trace", attack_flags.trace, "Write one JSON line per DIP");
  attack->add_option("--dump-cnf", attack_flags.cnf, "Write the first DIP query as DIMACS CNF");
  attack->add_option("--max-iters", attack_flags.max_iters, "DIP budget (0: 10 * 2^min(k,20))");
  attack->add_option("--time-limit-ms", attack_flags.time_limit_ms, "Wall-clock budget (negative: none)");

  std::string keymem_path, original_path;
  auto *verify = app.add_subcommand("verify", "Check activation equivalence and the absence of a universal key");
  verify->add_option("locked", locked_path, "Locked design")->required();
  verify->add_option("--keymem", keymem_path, "Key memory JSON")->required();
  verify->add_option("--original", original_path, "Original design")->required();

  std::uint32_t k = 0;
  std::string scheme = "idkll";
  bool approx = false;
  auto *analyze = app.add_subcommand("analyze", "Brute-force attempt counts for a k-bit key");
  analyze->add_option("--k", k, "Key bits")->required();
  analyze->add_option("--scheme", scheme, "Counting model")->check(CLI::IsMember({"idkll", "conventional", "antisat"}));
  analyze->add_flag("--approx", approx, "Estimate log10 of the total beyond the exact range");

  std::vector<std::string> designs;
  LockFlags report_flags;
  unsigned jobs = 1;
  std::string report_out;
  auto *report = app.add_subcommand("report", "Cut counts and SubLock vs Anti-SAT overhead per design");
  report->add_option("designs", designs, "Designs in .bench format")->required();
  add_lock_flags(report, report_flags);
  report->add_option("-j,--jobs", jobs, "Designs processed in parallel")->check(CLI::Range(1, 256));
  report->add_option("-o,--out", report_out, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? ExitOk : ExitFailure;
  }

  if (*lock)
    return cmd_lock(input, out, lock_flags);
  if (*attack)
    return cmd_attack(locked_path, attack_flags);
  if (*verify)
    return cmd_verify(locked_path, keymem_path, original_path);
  if (*analyze)
    return cmd_analyze(k, scheme, approx);
  return cmd_report(designs, report_flags, jobs, report_out);
}
