#pragma once

#include "attack.hpp"
#include "complexity.hpp"
#include "sublock.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace sublock {

inline constexpr const char *tool_version = "0.1.0";

using Json = nlohmann::ordered_json;

Json config_json(const LockConfig &cfg);

/// {"tool_version", "seed", "blocks": [{"key_inputs", "support", "entries"}]}
Json keymem_json(const std::vector<KeyMemory> &memory, std::uint64_t seed);
/// Accepts the keymem document or a bare {"blocks": [...]}. Throws Error(Parse)
/// on malformed input.
std::vector<KeyMemory> keymem_from_json(std::string_view text);

Json lock_report_json(const LockReport &report, const LockConfig &cfg, const Netlist &original,
                      const std::string &input_name);

struct AttackRun {
  std::string locked_name;
  std::string oracle_name;
  AttackOptions options;
  bool budget_exceeded = false;
};
Json attack_report_json(const AttackReport &report, const Netlist &locked, const AttackRun &run);
/// One {"iter", "dip_bits", "oracle_bits"} record per line.
std::string attack_trace_jsonl(const AttackReport &report);

enum class Scheme { Idkll, Conventional, AntiSat };
const char *to_string(Scheme s);
/// Exact counts as decimal strings. For IDKLL past the exact guard, `approx`
/// replaces pc/total/increased by null and adds total_log10; without it the
/// call throws ScaleBound.
Json analyze_json(std::uint32_t k, Scheme scheme, bool approx);

/// Structure, lockable cuts and the SubLock vs Anti-SAT overhead at the
/// configured key budget, one entry per design, computed on `jobs` threads.
Json design_report_json(const std::vector<const Netlist *> &designs, const std::vector<std::string> &names,
                        const LockConfig &cfg, unsigned jobs);

} // namespace sublock
