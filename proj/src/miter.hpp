#pragma once

#include "netlist.hpp"
#include "sat.hpp"

#include <memory>
#include <optional>
#include <unordered_map>

namespace sublock {

/// Plain per-gate Tseitin encoding; net id i becomes variable i+1.
CnfFormula tseitin(const Netlist &nl);

/// Lowers gates into a clause sink with structural hashing (n-ary AND and
/// binary XOR nodes, negation on literals) and constant propagation through a
/// dedicated always-true variable.
///
/// When constructed over a Solver with sweeping enabled, every new node is
/// simulated on random patterns and, if its signature matches an existing
/// node, the equivalence is proven with a small conflict budget and the old
/// literal reused. Downstream structure then merges through hashing.
class CircuitEncoder {
public:
  explicit CircuitEncoder(ClauseSink &sink);
  CircuitEncoder(Solver &solver, bool sweep, std::uint64_t seed = 1);

  int true_lit() const { return true_; }
  int constant(bool v) const { return v ? true_ : -true_; }
  bool is_constant(int lit) const { return lit == true_ || lit == -true_; }
  /// Fresh unconstrained variable.
  int input();

  int land(std::vector<int> ins);
  int lor(std::vector<int> ins);
  int lxor(int a, int b);
  int gate(GateKind kind, std::vector<int> ins);

  /// Literal for every net of `nl` (indexed by NetId).
  std::vector<int> encode(const Netlist &nl, std::span<const int> pi_lits, std::span<const int> key_lits);

  ClauseSink &sink() { return sink_; }
  std::size_t merges() const { return merges_; }

private:
  struct VecHash {
    template <typename T> std::size_t operator()(const std::vector<T> &v) const {
      std::uint64_t h = 0x9e3779b97f4a7c15ULL;
      for (T x : v)
        h = splitmix64(h ^ static_cast<std::uint64_t>(x));
      return static_cast<std::size_t>(h);
    }
  };
  int sweep(int lit);
  std::vector<std::uint64_t> signature(int lit) const;
  void set_signature(int var, std::vector<std::uint64_t> sig);

  ClauseSink &sink_;
  Solver *solver_ = nullptr;
  bool sweep_ = false;
  int true_ = 0;
  std::unordered_map<std::vector<int>, int, VecHash> and_table_;
  std::unordered_map<std::vector<int>, int, VecHash> xor_table_;

  static constexpr std::size_t sig_words = 4;
  Rng rng_{1};
  std::vector<std::vector<std::uint64_t>> sigs_;
  std::unordered_map<std::vector<std::uint64_t>, std::vector<int>, VecHash> classes_;
  std::size_t merges_ = 0;
};

struct EquivalenceResult {
  bool equivalent = true;
  /// Primary input values (in the first netlist's order) on which they differ.
  std::optional<Bits> counterexample;
};

/// How the two sides of a miter line up: by name when both netlists use the
/// same PI and PO names, positionally otherwise.
struct Binding {
  std::vector<std::size_t> pi_b_of_a; // PI position in b for each PI of a
  std::vector<std::size_t> po_b_of_a;
};
Binding bind_interfaces(const Netlist &a, const Netlist &b);

/// SAT-based equivalence of `a` under key `key_a` and `b` under `key_b`.
/// Counterexamples are confirmed by simulation.
EquivalenceResult miter_equivalence(const Netlist &a, const Bits &key_a, const Netlist &b, const Bits &key_b);
EquivalenceResult miter_equivalence(const Netlist &a, const Netlist &b);

/// Word-parallel exhaustive comparison; requires at most 24 primary inputs.
EquivalenceResult exhaustive_equivalence(const Netlist &a, const Bits &key_a, const Netlist &b, const Bits &key_b);

/// Exhaustive when the input count allows it, SAT otherwise.
EquivalenceResult check_equivalence(const Netlist &a, const Bits &key_a, const Netlist &b, const Bits &key_b,
                                    std::size_t exhaustive_limit = 16);

} // namespace sublock
