#pragma once

#include "common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sublock {

enum class GateKind : std::uint8_t { And, Nand, Or, Nor, Xor, Xnor, Not, Buf };

const char *to_string(GateKind kind);
std::optional<GateKind> gate_kind_from_string(std::string_view s);

using NetId = std::uint32_t;

struct Gate {
  GateKind kind;
  std::vector<NetId> inputs;
  NetId output;

  bool operator==(const Gate &) const = default;
};

/// Combinational gate-level netlist. Immutable once built; gates are stored in
/// topological order so a single forward pass evaluates it.
class Netlist {
public:
  class Builder;

  Netlist() = default;

  std::size_t num_nets() const { return names_.size(); }
  const std::string &name(NetId id) const { return names_.at(id); }
  std::optional<NetId> find(std::string_view name) const;
  /// Throws UnknownNet.
  NetId id(std::string_view name) const;

  std::span<const NetId> primary_inputs() const { return primary_inputs_; }
  std::span<const NetId> key_inputs() const { return key_inputs_; }
  std::span<const NetId> primary_outputs() const { return primary_outputs_; }
  std::span<const Gate> gates() const { return gates_; }

  /// Index into gates() of the gate driving `net`, if any.
  std::optional<std::size_t> driver(NetId net) const;
  /// Indices of gates reading `net`.
  std::span<const std::uint32_t> fanout(NetId net) const { return fanout_.at(net); }
  bool is_primary_output(NetId net) const { return is_po_.at(net); }

  /// Structural identity: same names, interface lists and gate sequence.
  bool operator==(const Netlist &other) const;

private:
  void index();

  std::vector<std::string> names_;
  std::unordered_map<std::string, NetId> by_name_;
  std::vector<NetId> primary_inputs_;
  std::vector<NetId> key_inputs_;
  std::vector<NetId> primary_outputs_;
  std::vector<Gate> gates_;
  std::vector<std::int32_t> driver_;
  std::vector<std::vector<std::uint32_t>> fanout_;
  std::vector<bool> is_po_;
};

/// Name-based construction. Nets may be referenced before they are defined;
/// build() resolves references, checks definitions and sorts gates.
class Netlist::Builder {
public:
  /// Declares an input; names starting with "keyinput" become key inputs.
  void input(std::string name, int line = 0);
  void output(std::string name, int line = 0);
  void gate(GateKind kind, std::string output, std::vector<std::string> inputs, int line = 0);

  bool defines(std::string_view name) const;
  /// Returns `base` or `base_<n>` such that the name is not yet used.
  std::string fresh_name(const std::string &base);

  Netlist build() const;

private:
  struct PendingGate {
    GateKind kind;
    std::string output;
    std::vector<std::string> inputs;
    int line;
  };
  void define(const std::string &name, int line);

  std::vector<std::string> inputs_;
  std::vector<std::string> keys_;
  std::vector<std::pair<std::string, int>> outputs_;
  std::vector<PendingGate> gates_;
  std::unordered_map<std::string, int> defined_;
  std::unordered_map<std::string, int> fresh_counter_;
  std::unordered_map<std::string, bool> used_;
};

bool is_key_input_name(std::string_view name);

Netlist parse_bench(std::string_view text);
Netlist read_bench_file(const std::string &path);
std::string emit_bench(const Netlist &nl);

/// Single-pattern evaluation; returns primary output values.
Bits simulate(const Netlist &nl, const Bits &pi_values, const Bits &key_values);

/// Forces one net to a fixed word during word-parallel simulation.
struct NetOverride {
  NetId net;
  std::uint64_t value;
};

/// 64 patterns at once. Returns one word per net (indexed by NetId).
std::vector<std::uint64_t> simulate_words(const Netlist &nl, std::span<const std::uint64_t> pi_words,
                                          std::span<const std::uint64_t> key_words,
                                          std::optional<NetOverride> force = std::nullopt);

std::uint64_t eval_gate_word(GateKind kind, std::span<const std::uint64_t> inputs);

/// Transitive fanin of `net` including itself, sorted by id.
std::vector<NetId> fanin_cone(const Netlist &nl, NetId net);

/// Longest input-to-output path measured in gates.
std::size_t logic_depth(const Netlist &nl);
/// Total gate input pins.
std::size_t pin_count(const Netlist &nl);

/// Word-parallel patterns enumerating all assignments of `width` variables;
/// variable 0 is the most significant bit of the pattern index.
/// Returns one word per variable for block `block` (64 patterns per block).
std::vector<std::uint64_t> exhaustive_words(std::size_t width, std::uint64_t block);

} // namespace sublock
