#pragma once

#include "tables.hpp"

#include <string>
#include <vector>

namespace sublock {

/// Gate-level realization of one or more single-output tables. For every
/// output several candidates are built (plain SOP, factored SOP of the
/// function and of its complement, each mapped onto AND/NAND/OR/NOR/NOT by
/// polarity, also after peeling off one or two variables through XOR/XNOR)
/// and the one with the fewest gates is kept. Identical gates are shared
/// across outputs.
struct SynthResult {
  Netlist network;
  std::vector<SopCover> covers; // on-set covers actually used for costing
  std::size_t gates = 0;
  std::size_t literals = 0;
};

SynthResult synthesize(const TruthTable &tt, const std::vector<std::string> &var_names,
                       const std::vector<std::string> &out_names);

} // namespace sublock
