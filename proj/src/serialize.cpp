#include "serialize.hpp"

#include <cmath>
#include <mutex>
#include <thread>

namespace sublock {

namespace {

Error parse_error(const std::string &msg) { return Error(ErrorCode::Parse, "key memory: " + msg); }

bool is_bit_string(const std::string &s) { return s.find_first_not_of("01") == std::string::npos; }

std::vector<std::string> string_list(const Json &j, const char *field) {
  if (!j.contains(field) || !j[field].is_array())
    throw parse_error(std::string("'") + field + "' must be an array");
  std::vector<std::string> out;
  for (const auto &e : j[field]) {
    if (!e.is_string())
      throw parse_error(std::string("'") + field + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Json bits_or_null(const std::optional<Bits> &b) { return b ? Json(bits_to_string(*b)) : Json(nullptr); }

Json deltas(long gates, long literals, long depth) {
  return Json{{"gate_delta", gates}, {"literal_delta", literals}, {"depth_delta", depth}};
}

} // namespace

Json config_json(const LockConfig &cfg) {
  Json sizes = Json::array();
  for (auto s : cfg.support_sizes)
    sizes.push_back(s);
  return Json{{"budget_key_bits", cfg.budget_key_bits},
              {"support_sizes", sizes},
              {"strategy", to_string(cfg.strategy)},
              {"dontcare_policy", to_string(cfg.dontcare_policy)},
              {"plan_strategy", to_string(cfg.plan_strategy)},
              {"key_bits_per_lock", cfg.key_bits_per_lock},
              {"sets_per_lock", cfg.sets_per_lock},
              {"seed", cfg.seed},
              {"corruption_trials", cfg.corruption_trials},
              {"roots", cfg.roots}};
}

Json keymem_json(const std::vector<KeyMemory> &memory, std::uint64_t seed) {
  Json blocks = Json::array();
  for (const auto &m : memory) {
    Json entries = Json::object();
    for (const auto &[pattern, key] : m.entries)
      entries[pattern] = key;
    blocks.push_back(Json{{"key_inputs", m.key_inputs}, {"support", m.support}, {"entries", entries}});
  }
  return Json{{"tool_version", tool_version}, {"seed", seed}, {"blocks", blocks}};
}

std::vector<KeyMemory> keymem_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw parse_error(e.what());
  }
  if (!doc.is_object() || !doc.contains("blocks") || !doc["blocks"].is_array())
    throw parse_error("expected an object with a 'blocks' array");
  std::vector<KeyMemory> out;
  for (const auto &b : doc["blocks"]) {
    if (!b.is_object())
      throw parse_error("every block must be an object");
    KeyMemory m;
    m.key_inputs = string_list(b, "key_inputs");
    m.support = string_list(b, "support");
    if (!b.contains("entries") || !b["entries"].is_object())
      throw parse_error("'entries' must be an object");
    for (const auto &[pattern, key] : b["entries"].items()) {
      if (!key.is_string())
        throw parse_error("entry '" + pattern + "' must map to a bit string");
      std::string k = key.get<std::string>();
      if (pattern.size() != m.support.size() || !is_bit_string(pattern))
        throw parse_error("entry '" + pattern + "' does not match the support of " +
                          std::to_string(m.support.size()) + " nets");
      if (k.size() != m.key_inputs.size() || !is_bit_string(k))
        throw parse_error("entry '" + pattern + "' must give " + std::to_string(m.key_inputs.size()) + " key bits");
      m.entries[pattern] = k;
    }
    out.push_back(std::move(m));
  }
  return out;
}

Json lock_report_json(const LockReport &r, const LockConfig &cfg, const Netlist &original,
                      const std::string &input_name) {
  Json report{{"num_locks", r.num_locks},
              {"key_bits_total", r.key_bits_total},
              {"gate_delta", r.gate_delta},
              {"literal_delta", r.literal_delta},
              {"depth_delta", r.depth_delta},
              {"corruption", r.corruption},
              {"seed", r.seed},
              {"roots", r.roots}};
  Json design{{"inputs", original.primary_inputs().size()},
              {"outputs", original.primary_outputs().size()},
              {"gates", original.gates().size()},
              {"depth", logic_depth(original)}};
  return Json{{"tool_version", tool_version}, {"seed", cfg.seed}, {"config", config_json(cfg)},
              {"input", input_name},          {"design", design},    {"report", report}};
}

Json attack_report_json(const AttackReport &r, const Netlist &locked, const AttackRun &run) {
  const std::size_t k = locked.key_inputs().size();
  Json config{{"locked", run.locked_name},
              {"oracle", run.oracle_name},
              {"max_iters", run.options.max_iters ? run.options.max_iters : default_max_iters(k)},
              {"time_limit_ms", run.options.time_limit_ms}};
  Json keys = Json::array();
  for (NetId id : locked.key_inputs())
    keys.push_back(locked.name(id));
  Json dips = Json::array();
  for (const Dip &d : r.dips)
    dips.push_back(Json{{"dip_bits", bits_to_string(d.input)}, {"oracle_bits", bits_to_string(d.response)}});
  return Json{{"tool_version", tool_version},
              {"seed", nullptr},
              {"config", config},
              {"status", run.budget_exceeded ? "BudgetExceeded" : to_string(r.status)},
              {"iterations", r.iterations},
              {"key_inputs", keys},
              {"candidate_key", bits_or_null(r.candidate_key)},
              {"counterexample", bits_or_null(r.counterexample)},
              {"dips", dips},
              {"wall_time_ms", r.wall_time_ms}};
}

std::string attack_trace_jsonl(const AttackReport &r) {
  std::string out;
  for (std::size_t i = 0; i < r.dips.size(); ++i) {
    Json rec{{"iter", i + 1}, {"dip_bits", bits_to_string(r.dips[i].input)},
             {"oracle_bits", bits_to_string(r.dips[i].response)}};
    out += rec.dump() + "\n";
  }
  return out;
}

const char *to_string(Scheme s) {
  switch (s) {
  case Scheme::Idkll: return "idkll";
  case Scheme::Conventional: return "conventional";
  case Scheme::AntiSat: return "antisat";
  }
  return "?";
}

Json analyze_json(std::uint32_t k, Scheme scheme, bool approx) {
  Json out{{"tool_version", tool_version},
           {"seed", nullptr},
           {"config", Json{{"k", k}, {"scheme", to_string(scheme)}, {"approx", approx}}},
           {"scheme", to_string(scheme)},
           {"k", k}};
  if (scheme == Scheme::Conventional) {
    out["attempts"] = attempts_conventional(k).get_str();
    return out;
  }
  if (scheme == Scheme::AntiSat) {
    out["attempts"] = attempts_antisat(k).get_str();
    return out;
  }
  const bool exact = k <= 20;
  if (!exact && !approx)
    throw Error(ErrorCode::ScaleBound, "exact permuted combinations need k <= 20; pass --approx for an estimate");
  if (!exact && k > 1000)
    throw Error(ErrorCode::ScaleBound, "the estimate is limited to k <= 1000");
  Attempts a = attempts_total(k);
  auto str = [](const std::optional<mpz_class> &v) { return v ? Json(v->get_str()) : Json(nullptr); };
  out["attempts"] = str(a.total);
  out["l"] = a.l.get_str();
  out["lambda"] = a.lambda.get_str();
  out["pc"] = str(a.pc);
  out["total"] = str(a.total);
  out["increased"] = str(a.increased);
  if (!exact) {
    // l! * sum 1/j! over j < l is e * l! to double precision here, and l
    // itself is negligible next to it.
    const double l = std::ldexp(1.0, static_cast<int>(k));
    out["total_log10"] = (std::lgamma(l + 1.0) + 1.0) / std::log(10.0);
  }
  return out;
}

Json design_report_json(const std::vector<const Netlist *> &designs, const std::vector<std::string> &names,
                        const LockConfig &cfg, unsigned jobs) {
  if (designs.size() != names.size())
    throw Error(ErrorCode::InvalidArgument, "one name per design is required");
  std::vector<Json> rows(designs.size());
  auto one = [&](std::size_t i) {
    const Netlist &nl = *designs[i];
    Json row{{"name", names[i]},
             {"inputs", nl.primary_inputs().size()},
             {"outputs", nl.primary_outputs().size()},
             {"gates", nl.gates().size()},
             {"depth", logic_depth(nl)}};
    Json cuts = Json::object();
    auto cands = enumerate_cuts(nl, cfg.support_sizes);
    for (auto s : cfg.support_sizes)
      cuts[std::to_string(s)] = std::count_if(cands.begin(), cands.end(),
                                              [&](const CutCandidate &c) { return c.support.size() == s; });
    row["cuts"] = cuts;
    std::optional<long> sub_delta, anti_delta;
    try {
      LockResult r = lock_design(nl, cfg);
      Json s = deltas(r.report.gate_delta, r.report.literal_delta, r.report.depth_delta);
      s["num_locks"] = r.report.num_locks;
      s["corruption"] = r.report.corruption;
      row["sublock"] = s;
      sub_delta = r.report.gate_delta;
    } catch (const Error &e) {
      row["sublock"] = Json{{"error", e.what()}};
    }
    try {
      BaselineLock b = lock_antisat_baseline(nl, cfg.budget_key_bits, cfg.seed);
      auto d = [](std::size_t a, std::size_t b) { return static_cast<long>(a) - static_cast<long>(b); };
      row["antisat"] = deltas(d(b.locked.gates().size(), nl.gates().size()), d(pin_count(b.locked), pin_count(nl)),
                              d(logic_depth(b.locked), logic_depth(nl)));
      anti_delta = row["antisat"]["gate_delta"].get<long>();
    } catch (const Error &e) {
      row["antisat"] = Json{{"error", e.what()}};
    }
    row["sublock_le_antisat"] = sub_delta && anti_delta ? Json(*sub_delta <= *anti_delta) : Json(nullptr);
    rows[i] = std::move(row);
  };

  std::size_t next = 0;
  std::mutex m;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard g(m);
        if (next >= designs.size() || failure)
          return;
        i = next++;
      }
      try {
        one(i);
      } catch (...) {
        std::lock_guard g(m);
        failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::max(1U, jobs); ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);

  Json out{{"tool_version", tool_version}, {"seed", cfg.seed}, {"config", config_json(cfg)}};
  out["designs"] = rows;
  return out;
}

} // namespace sublock
