#pragma once

#include "synth.hpp"
#include "tables.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sublock {

enum class PlanStrategy { MsbSplit, BalancedRandom };
enum class DontCarePolicy { DontCare, Complement };

const char *to_string(PlanStrategy s);
const char *to_string(DontCarePolicy p);

/// Partition of the 2^v input patterns into m sets, each unlocked by its own
/// key sequence.
struct KeyPlan {
  std::size_t num_inputs = 0;
  std::size_t num_key_bits = 0;
  /// Set index of every input pattern (size 2^v).
  std::vector<std::uint32_t> partition;
  /// One distinct key sequence per set.
  std::vector<Bits> valid_keys;
  /// Treatment of entries under key sequences that unlock no set.
  DontCarePolicy policy = DontCarePolicy::DontCare;

  std::size_t num_sets() const { return valid_keys.size(); }
  const Bits &key_for(std::uint32_t pattern) const { return valid_keys[partition.at(pattern)]; }
  /// Throws InfeasiblePlan when the invariants do not hold.
  void validate() const;
};

KeyPlan make_key_plan(std::size_t v, std::size_t kb, std::size_t m, PlanStrategy strategy, std::uint64_t seed,
                      DontCarePolicy policy = DontCarePolicy::DontCare);

/// Locked table over (key bits ++ input bits) plus its synthesized network.
/// The network's inputs are named k0.. then x0.., outputs y0.. unless names
/// are supplied.
struct LockedFunction {
  TruthTable original;
  KeyPlan plan;
  TruthTable table;
  SynthResult synth;
  /// Minterms of `table` fixed by the dependency repair.
  std::vector<std::uint32_t> pinned;
  std::vector<std::string> key_names;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;

  /// Network evaluation at (key, x).
  Bits evaluate(const Bits &key, std::uint32_t x) const;
};

struct LockNames {
  std::vector<std::string> keys;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

/// Table construction per the plan, dependency repair and synthesis.
LockedFunction lock_function(const TruthTable &original, const KeyPlan &plan, const LockNames &names = {});

/// Builds the locked table for a plan without repairing or synthesizing.
TruthTable locked_table(const TruthTable &original, const KeyPlan &plan);

/// Pins don't-care entries (lowest minterm first) until each output of the
/// network depends on every input its original depends on; re-synthesizes.
/// Inputs no original output depends on raise CannotForceDependency.
LockedFunction ensure_input_dependency(LockedFunction lf);

/// Input variables (0-based) no output of the network depends on.
std::vector<std::size_t> missing_input_dependencies(const LockedFunction &lf);

struct UniversalKeyCheck {
  bool ok = true;
  /// Per key sequence (index = key value): a failing input, or nullopt when
  /// the key is correct on every input.
  std::vector<std::optional<std::uint32_t>> witnesses;
  /// Per key sequence: number of inputs on which it is correct.
  std::vector<std::size_t> correct_inputs;
  /// Per input: number of key sequences correct on it.
  std::vector<std::size_t> keys_correct_per_input;
};

/// Exhaustive over all 2^kb keys and 2^v inputs (kb + v <= 16).
UniversalKeyCheck verify_no_universal_key(const LockedFunction &lf);

/// lock_function plus the no-universal-key gate: a lock that fails it under
/// the DontCare policy is rebuilt with the Complement policy; if that also
/// fails, UniversalKeyGate is thrown.
LockedFunction lock_function_checked(const TruthTable &original, KeyPlan plan, const LockNames &names = {});

/// Lookup from applied inputs to key sequence; support and keys are net names.
struct KeyMemory {
  std::vector<std::string> key_inputs;
  std::vector<std::string> support;
  /// support valuation (MSB first) -> key bits
  std::map<std::string, std::string> entries;

  bool operator==(const KeyMemory &) const = default;
};

/// Full map from input pattern to key, then greedy removal (in input order)
/// of every variable the map is invariant under.
KeyMemory build_key_memory(const KeyPlan &plan, const std::vector<std::string> &input_nets,
                           const std::vector<std::string> &key_inputs);

/// Key bits the memory produces for full input pattern values given by name.
Bits lookup_key(const KeyMemory &mem, const std::map<std::string, bool> &values);

/// Replaces each key input by a multiplexer tree over its block's support.
/// With `partial`, key inputs no block drives stay key inputs.
Netlist activate(const Netlist &locked, const std::vector<KeyMemory> &memory, bool partial = false);

} // namespace sublock
