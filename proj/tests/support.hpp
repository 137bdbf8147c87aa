#pragma once

#include "netlist.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace testing_support {

// A circuit kept as plain name-level records, evaluated by recursion.  Serves
// as an oracle independent of the Netlist evaluator.
struct RawGate {
  std::string kind;
  std::string out;
  std::vector<std::string> in;
};

struct RawCircuit {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<RawGate> gates;

  std::string to_bench() const {
    std::string s;
    for (auto &i : inputs)
      s += "INPUT(" + i + ")\n";
    for (auto &o : outputs)
      s += "OUTPUT(" + o + ")\n";
    for (auto &g : gates) {
      s += g.out + " = " + g.kind + "(";
      for (std::size_t i = 0; i < g.in.size(); ++i)
        s += (i ? ", " : "") + g.in[i];
      s += ")\n";
    }
    return s;
  }

  std::vector<bool> eval(const std::vector<bool> &x) const {
    std::map<std::string, bool> val;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      val[inputs[i]] = x[i];
    std::map<std::string, const RawGate *> drv;
    for (auto &g : gates)
      drv[g.out] = &g;
    std::vector<bool> out;
    for (auto &o : outputs)
      out.push_back(value(o, val, drv));
    return out;
  }

private:
  static bool value(const std::string &n, std::map<std::string, bool> &val,
                    const std::map<std::string, const RawGate *> &drv) {
    if (auto it = val.find(n); it != val.end())
      return it->second;
    const RawGate &g = *drv.at(n);
    std::vector<bool> a;
    for (auto &i : g.in)
      a.push_back(value(i, val, drv));
    bool and_all = true, or_any = false, parity = false;
    for (bool b : a) {
      and_all = and_all && b;
      or_any = or_any || b;
      parity = parity != b;
    }
    bool r = false;
    if (g.kind == "AND") r = and_all;
    else if (g.kind == "NAND") r = !and_all;
    else if (g.kind == "OR") r = or_any;
    else if (g.kind == "NOR") r = !or_any;
    else if (g.kind == "XOR") r = parity;
    else if (g.kind == "XNOR") r = !parity;
    else if (g.kind == "NOT") r = !a[0];
    else r = a[0];
    val[n] = r;
    return r;
  }
};

// Random combinational circuit: each gate reads earlier nets, outputs are the
// last few gates plus any otherwise dangling gate outputs up to `outputs`.
inline RawCircuit random_circuit(std::uint64_t seed, int inputs, int gates, int outputs, bool wide = true) {
  sublock::Rng rng(seed);
  static const char *kinds[] = {"AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUFF"};
  RawCircuit c;
  std::vector<std::string> nets;
  for (int i = 0; i < inputs; ++i) {
    c.inputs.push_back("i" + std::to_string(i));
    nets.push_back(c.inputs.back());
  }
  for (int g = 0; g < gates; ++g) {
    RawGate rg;
    rg.kind = kinds[rng.below(8)];
    rg.out = "g" + std::to_string(g);
    std::size_t arity = 1;
    if (rg.kind != "NOT" && rg.kind != "BUFF") {
      arity = 2;
      if (wide && rg.kind != "XOR" && rg.kind != "XNOR" && rng.below(4) == 0)
        arity = 3;
    }
    arity = std::min<std::size_t>(arity, nets.size());
    if (arity < 2 && rg.kind != "NOT" && rg.kind != "BUFF")
      rg.kind = "NOT";
    // prefer recent nets so depth grows
    std::vector<std::string> pool = nets;
    rng.shuffle(pool);
    for (std::size_t a = 0; a < arity; ++a) {
      std::size_t recent = nets.size() > 4 && rng.coin() ? nets.size() - 1 - rng.below(4) : rng.below(nets.size());
      std::string pick = nets[recent];
      bool dup = false;
      for (auto &x : rg.in)
        dup = dup || x == pick;
      rg.in.push_back(dup ? pool[a] : pick);
    }
    // remove accidental duplicates entirely
    std::sort(rg.in.begin(), rg.in.end());
    rg.in.erase(std::unique(rg.in.begin(), rg.in.end()), rg.in.end());
    if (rg.in.size() < 2 && rg.kind != "NOT" && rg.kind != "BUFF")
      rg.kind = "NOT", rg.in.resize(1);
    nets.push_back(rg.out);
    c.gates.push_back(rg);
  }
  for (int o = 0; o < outputs && o < static_cast<int>(nets.size()); ++o)
    c.outputs.push_back(nets[nets.size() - 1 - o]);
  return c;
}

// Name-level copy of a netlist; key inputs follow the primary inputs.
inline RawCircuit raw_of(const sublock::Netlist &nl) {
  RawCircuit c;
  for (auto i : nl.primary_inputs())
    c.inputs.push_back(nl.name(i));
  for (auto i : nl.key_inputs())
    c.inputs.push_back(nl.name(i));
  for (auto o : nl.primary_outputs())
    c.outputs.push_back(nl.name(o));
  for (const auto &g : nl.gates()) {
    RawGate rg{sublock::to_string(g.kind), nl.name(g.output), {}};
    for (auto i : g.inputs)
      rg.in.push_back(nl.name(i));
    c.gates.push_back(rg);
  }
  return c;
}

inline std::vector<bool> bits_of_index(std::uint64_t idx, std::size_t width) {
  return sublock::bits_of(idx, width);
}

} // namespace testing_support
