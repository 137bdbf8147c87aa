#pragma once

#include "idkll.hpp"

#include <optional>
#include <set>
#include <vector>

namespace sublock {

/// Single-root cone whose internal gates feed nothing outside the cone.
struct CutCandidate {
  NetId root = 0;
  std::vector<NetId> support;          // sorted by id
  std::vector<std::size_t> gates;      // indices into gates(), topological

  bool operator==(const CutCandidate &) const = default;
};

/// One cone per gate output, grown greedily from the root while the leaf set
/// stays within the largest allowed size; kept when its final leaf count is
/// in `support_sizes` and the root depends on every leaf. Ordered by root id.
std::vector<CutCandidate> enumerate_cuts(const Netlist &nl, const std::set<std::size_t> &support_sizes);

/// Fraction of patterns on which flipping `net` changes some primary output.
/// Exhaustive when 2^inputs <= samples, seeded random patterns otherwise.
double fault_impact(const Netlist &nl, NetId net, std::size_t samples, std::uint64_t seed);

/// Samples used for selection: exhaustive up to 16 inputs, 10000 beyond.
std::size_t default_fault_samples(const Netlist &nl);

enum class SelectStrategy { Random, FaultImpact };
const char *to_string(SelectStrategy s);

/// Greedy choice of budget/kb pairwise gate-disjoint cuts. Random shuffles
/// with the seed; FaultImpact orders by descending root impact, then root id.
/// Throws InsufficientCandidates naming the number reachable.
std::vector<CutCandidate> select_cuts(const Netlist &nl, const std::vector<CutCandidate> &cands,
                                      std::size_t budget_key_bits, std::size_t kb, SelectStrategy strategy,
                                      std::uint64_t seed);

struct LockConfig {
  std::size_t budget_key_bits = 0;
  std::set<std::size_t> support_sizes{3, 4};
  SelectStrategy strategy = SelectStrategy::Random;
  DontCarePolicy dontcare_policy = DontCarePolicy::DontCare;
  PlanStrategy plan_strategy = PlanStrategy::MsbSplit;
  std::size_t key_bits_per_lock = 2;
  std::size_t sets_per_lock = 2;
  std::uint64_t seed = 0;
  std::size_t corruption_trials = 10000;
  /// When non-empty, only cuts rooted at these nets are considered.
  std::vector<std::string> roots;
};

struct LockReport {
  std::size_t num_locks = 0;
  std::size_t key_bits_total = 0;
  long gate_delta = 0;
  long literal_delta = 0;
  long depth_delta = 0;
  double corruption = 0;
  std::uint64_t seed = 0;
  /// Roots of the replaced cones, in key order.
  std::vector<std::string> roots;
};

struct LockResult {
  Netlist locked;
  std::vector<KeyMemory> memory;
  LockReport report;
};

/// Replaces selected cones by IDKLL locks with key inputs keyinput0...
/// The result is checked before return: activation must be equivalent to
/// `nl` and no single key may unlock the whole design.
LockResult lock_design(const Netlist &nl, const LockConfig &config);

struct BaselineLock {
  Netlist locked;
  Bits correct_key;
};

/// XOR (key bit 0) or XNOR (key bit 1) on num_keys randomly chosen gate outputs.
BaselineLock lock_xor_baseline(const Netlist &nl, std::size_t num_keys, std::uint64_t seed);

/// Anti-SAT block over num_keys/2 primary inputs, XORed into one random gate
/// output. Keys keyinput0.. form K_a, the second half K_b.
BaselineLock lock_antisat_baseline(const Netlist &nl, std::size_t num_keys, std::uint64_t seed);

/// Fraction of (input, wrong key) trials whose outputs differ from the
/// activated design. Exhaustive when 2^(inputs + keys) <= trials.
double corruption_report(const Netlist &locked, const std::vector<KeyMemory> &memory, std::size_t trials,
                         std::uint64_t seed);

} // namespace sublock
