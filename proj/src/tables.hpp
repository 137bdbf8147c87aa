#pragma once

#include "netlist.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sublock {

enum class Tri : std::uint8_t { Zero, One, DontCare };

/// Multi-output table over at most 16 variables. Variable 0 is the most
/// significant bit of the minterm index.
class TruthTable {
public:
  static constexpr std::size_t max_vars = 16;

  TruthTable() = default;
  TruthTable(std::size_t num_vars, std::size_t num_outputs, Tri fill = Tri::Zero);

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_outputs() const { return num_outputs_; }
  std::size_t size() const { return std::size_t{1} << num_vars_; }

  Tri at(std::size_t output, std::uint32_t minterm) const { return entries_[output * size() + minterm]; }
  void set(std::size_t output, std::uint32_t minterm, Tri v) { entries_[output * size() + minterm] = v; }

  /// Single-output table from a string of '0', '1', '-'/'x' characters.
  static TruthTable from_string(std::size_t num_vars, const std::string &column);
  std::string column_string(std::size_t output) const;

  bool operator==(const TruthTable &) const = default;

private:
  std::size_t num_vars_ = 0;
  std::size_t num_outputs_ = 0;
  std::vector<Tri> entries_;
};

/// Product term. Bit (v-1-i) of `care`/`value` refers to variable i so a cube
/// covers minterm m iff (m & care) == value.
struct Cube {
  std::uint32_t care = 0;
  std::uint32_t value = 0;

  bool covers(std::uint32_t minterm) const { return (minterm & care) == value; }
  int literals() const { return __builtin_popcount(care); }
  /// '0', '1' or '-' for variable i of a v-variable cube.
  char literal(std::size_t i, std::size_t v) const;
  std::string to_string(std::size_t v) const;

  bool operator==(const Cube &) const = default;
};

/// Ternary order per variable (0 < 1 < -), variable 0 first.
bool cube_less(const Cube &a, const Cube &b, std::size_t num_vars);

struct SopCover {
  std::size_t num_vars = 0;
  std::vector<Cube> cubes;

  bool evaluate(std::uint32_t minterm) const;
};

struct CoverCost {
  std::size_t cubes = 0;
  std::size_t literals = 0;

  bool operator==(const CoverCost &) const = default;
  auto operator<=>(const CoverCost &) const = default;
};

CoverCost cost(const SopCover &cover);

/// Exhaustive evaluation of `outputs` over `support`; each output's cone must
/// stop at support nets.
TruthTable table_of_netlist(const Netlist &nl, const std::vector<NetId> &outputs, const std::vector<NetId> &support);

/// Two-level minimization with don't-cares. Exact (minimum cubes, then
/// literals, then smallest sorted cube list) up to 8 variables; greedy prime
/// expansion with set cover above that. The exact search stops after
/// `node_limit` branch nodes and keeps the best cover found so far.
inline constexpr std::size_t exact_node_limit = std::size_t{1} << 21;
SopCover minimize(const TruthTable &tt, std::size_t output, std::size_t node_limit = exact_node_limit);

/// All prime implicants of On ∪ DC, sorted by cube_less.
std::vector<Cube> prime_implicants(const TruthTable &tt, std::size_t output);

/// AND/OR/NOT network for the given covers. Inputs are named `var_names`,
/// outputs `out_names` (default f0, f1, ...). Negations are shared per
/// variable; constants use AND(x, NOT x) / OR(x, NOT x) on variable 0.
Netlist netlist_of_sop(const std::vector<SopCover> &covers, const std::vector<std::string> &var_names,
                       const std::vector<std::string> &out_names = {});

/// PLA-style text for inspection (.i/.o/.p header, one cube per line).
std::string pla_dump(const std::vector<SopCover> &covers);

} // namespace sublock
