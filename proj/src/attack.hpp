#pragma once

#include "idkll.hpp"
#include "miter.hpp"

#include <optional>
#include <vector>

namespace sublock {

/// Input/output access to an activated chip. The attack loop only calls
/// query(); the circuit is exposed for key validation after the loop.
class Oracle {
public:
  explicit Oracle(const Netlist &original);

  std::size_t num_inputs() const { return nl_.primary_inputs().size(); }
  std::size_t num_outputs() const { return nl_.primary_outputs().size(); }
  /// Inputs and outputs in the original circuit's declared order.
  Bits query(const Bits &x);
  std::size_t queries() const { return queries_; }
  const Netlist &circuit() const { return nl_; }

private:
  const Netlist &nl_;
  std::size_t queries_ = 0;
};

enum class AttackStatus { KeyFound, WrongKey, UnsatNoKey };
const char *to_string(AttackStatus s);

struct Dip {
  Bits input;
  Bits response;
};

struct AttackReport {
  std::size_t iterations = 0;
  std::vector<Dip> dips;
  AttackStatus status = AttackStatus::UnsatNoKey;
  std::optional<Bits> candidate_key;
  /// Input on which the candidate key disagrees with the oracle (WrongKey).
  std::optional<Bits> counterexample;
  std::int64_t wall_time_ms = 0;
};

struct AttackOptions {
  /// 0 selects 10 * 2^min(k, 20).
  std::size_t max_iters = 0;
  /// Negative: no wall-clock limit.
  std::int64_t time_limit_ms = -1;
};

/// Raised when the DIP loop runs out of iterations or time; carries the
/// partial trace.
class AttackBudgetExceeded : public Error {
public:
  explicit AttackBudgetExceeded(AttackReport partial);
  const AttackReport &partial() const { return partial_; }

private:
  AttackReport partial_;
};

std::size_t default_max_iters(std::size_t key_bits);

/// Oracle-guided SAT attack with distinguishing input patterns.
AttackReport sat_attack(const Netlist &locked, Oracle &oracle, const AttackOptions &options = {});

/// The first DIP query as plain CNF: two copies of `locked` sharing inputs,
/// keys in separate variables, at least one output differing. Variable 1 is
/// constant true; the inputs follow, then the two key vectors.
CnfFormula dip_miter_cnf(const Netlist &locked);

/// Counterexample-guided search for one key under which `locked` equals
/// `original` on every input. Throws IterationBudgetExceeded past `max_iters`.
std::optional<Bits> find_universal_key(const Netlist &locked, const Netlist &original, std::size_t max_iters = 0);

struct BlockShape {
  std::vector<std::string> key_inputs;
  std::vector<std::string> support;
};

struct KeyMapResult {
  /// Per-block memories reproducing the oracle, if any assignment exists.
  std::optional<std::vector<KeyMemory>> memory;
  /// Per input pattern: how many full key assignments are correct on it.
  std::vector<std::size_t> keys_per_input;
};

/// Exhaustive attacker for tiny designs (inputs + keys <= 20). Without
/// shapes, a single block over every input and key is assumed.
KeyMapResult brute_force_key_map(const Netlist &locked, Oracle &oracle, const std::vector<BlockShape> &blocks = {});

} // namespace sublock
