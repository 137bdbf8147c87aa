#include "synth.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <optional>

namespace sublock {

namespace {

// Factored form of a cover.
struct Expr {
  enum Kind { Zero, One, Lit, And, Or } kind = Zero;
  std::size_t var = 0;
  bool positive = true;
  std::vector<std::size_t> kids;
};

class Factorer {
public:
  explicit Factorer(std::size_t v) : v_(v) {}

  std::vector<Expr> nodes;

  std::size_t add(Expr e) {
    nodes.push_back(std::move(e));
    return nodes.size() - 1;
  }

  std::size_t literal(std::size_t var, bool pos) { return add(Expr{Expr::Lit, var, pos, {}}); }

  std::size_t join(Expr::Kind kind, std::vector<std::size_t> parts) {
    std::vector<std::size_t> flat;
    for (std::size_t p : parts) {
      if (nodes[p].kind == kind)
        flat.insert(flat.end(), nodes[p].kids.begin(), nodes[p].kids.end());
      else
        flat.push_back(p);
    }
    if (flat.size() == 1)
      return flat[0];
    return add(Expr{kind, 0, true, std::move(flat)});
  }

  std::size_t cube(const Cube &c) {
    std::vector<std::size_t> lits;
    for (std::size_t i = 0; i < v_; ++i) {
      char l = c.literal(i, v_);
      if (l != '-')
        lits.push_back(literal(i, l == '1'));
    }
    if (lits.empty())
      return add(Expr{Expr::One, 0, true, {}});
    return join(Expr::And, lits);
  }

  std::size_t flat(const std::vector<Cube> &cubes) {
    if (cubes.empty())
      return add(Expr{Expr::Zero, 0, true, {}});
    std::vector<std::size_t> terms;
    for (const Cube &c : cubes) {
      if (c.care == 0)
        return add(Expr{Expr::One, 0, true, {}});
      terms.push_back(cube(c));
    }
    return join(Expr::Or, terms);
  }

  // Repeatedly pull out the literal shared by the most cubes.
  std::size_t factor(const std::vector<Cube> &cubes) {
    if (cubes.size() <= 1)
      return flat(cubes);
    for (const Cube &c : cubes)
      if (c.care == 0)
        return add(Expr{Expr::One, 0, true, {}});
    std::size_t best_count = 0, best_var = 0;
    bool best_pos = true;
    for (std::size_t i = 0; i < v_; ++i) {
      std::uint32_t bit = 1U << (v_ - 1 - i);
      for (bool pos : {true, false}) {
        std::size_t count = 0;
        for (const Cube &c : cubes)
          if ((c.care & bit) && (((c.value & bit) != 0) == pos))
            ++count;
        if (count > best_count) {
          best_count = count;
          best_var = i;
          best_pos = pos;
        }
      }
    }
    if (best_count < 2)
      return flat(cubes);
    std::uint32_t bit = 1U << (v_ - 1 - best_var);
    std::vector<Cube> quotient, rest;
    for (const Cube &c : cubes) {
      if ((c.care & bit) && (((c.value & bit) != 0) == best_pos))
        quotient.push_back(Cube{c.care & ~bit, c.value & ~bit});
      else
        rest.push_back(c);
    }
    std::size_t q = factor(quotient);
    std::size_t term = nodes[q].kind == Expr::One ? literal(best_var, best_pos)
                                                  : join(Expr::And, {literal(best_var, best_pos), q});
    if (rest.empty())
      return term;
    return join(Expr::Or, {term, factor(rest)});
  }

private:
  std::size_t v_;
};

// Small gate network over numbered nodes (0..v-1 are the variables) with
// structural hashing.
struct MiniNet {
  struct G {
    GateKind kind;
    std::vector<std::size_t> ins;
  };
  std::size_t num_vars = 0;
  std::vector<G> gates;
  std::map<std::pair<GateKind, std::vector<std::size_t>>, std::size_t> table;

  std::size_t gate(GateKind kind, std::vector<std::size_t> ins) {
    if (kind != GateKind::Not && kind != GateKind::Buf)
      std::sort(ins.begin(), ins.end());
    auto key = std::make_pair(kind, ins);
    if (auto it = table.find(key); it != table.end())
      return it->second;
    gates.push_back({kind, std::move(ins)});
    std::size_t id = num_vars + gates.size() - 1;
    table.emplace(std::move(key), id);
    return id;
  }
  std::size_t negate(std::size_t node) {
    if (node >= num_vars) {
      const G &g = gates[node - num_vars];
      if (g.kind == GateKind::Not)
        return g.ins[0];
    }
    return gate(GateKind::Not, {node});
  }
};

// Polarity-aware mapping of a factored expression. cost[n][p] is the gate
// count estimate for producing node n with polarity p (1 = true function).
class Mapper {
public:
  Mapper(const std::vector<Expr> &nodes, MiniNet &net) : nodes_(nodes), net_(net) {
    cost_.assign(nodes.size(), {0, 0});
    done_.assign(nodes.size(), false);
  }

  std::size_t emit(std::size_t n, bool pol) {
    compute(n);
    return build(n, pol);
  }

private:
  void compute(std::size_t n) {
    if (done_[n])
      return;
    const Expr &e = nodes_[n];
    std::array<double, 2> c{};
    switch (e.kind) {
    case Expr::Zero:
    case Expr::One:
      c = {2, 2};
      break;
    case Expr::Lit:
      c[e.positive ? 1 : 0] = 0;
      c[e.positive ? 0 : 1] = 1;
      break;
    case Expr::And:
    case Expr::Or: {
      double pos_in = 0, neg_in = 0;
      for (std::size_t k : e.kids) {
        compute(k);
        pos_in += cost_[k][1];
        neg_in += cost_[k][0];
      }
      // AND: true via AND(k+) or NOR(k-), false via NAND(k+) or OR(k-);
      // OR is the dual. Either way each polarity picks the cheaper input form.
      double best = 1 + std::min(pos_in, neg_in);
      c = {best, best};
      break;
    }
    }
    c[0] = std::min(c[0], c[1] + 1);
    c[1] = std::min(c[1], c[0] + 1);
    cost_[n] = c;
    done_[n] = true;
  }

  std::size_t constant(bool value) {
    std::size_t n = net_.negate(0);
    return net_.gate(value ? GateKind::Or : GateKind::And, {0, n});
  }

  std::size_t build(std::size_t n, bool pol) {
    const Expr &e = nodes_[n];
    switch (e.kind) {
    case Expr::Zero: return constant(!pol);
    case Expr::One: return constant(pol);
    case Expr::Lit: return e.positive == pol ? e.var : net_.negate(e.var);
    case Expr::And:
    case Expr::Or: break;
    }
    double pos_in = 0, neg_in = 0;
    for (std::size_t k : e.kids) {
      pos_in += cost_[k][1];
      neg_in += cost_[k][0];
    }
    const bool use_pos = pos_in <= neg_in;
    std::vector<std::size_t> ins;
    for (std::size_t k : e.kids)
      ins.push_back(build(k, use_pos));
    GateKind kind;
    if (e.kind == Expr::And) {
      // f = AND(k)  = NOR(~k);  ~f = NAND(k) = OR(~k)
      if (use_pos)
        kind = pol ? GateKind::And : GateKind::Nand;
      else
        kind = pol ? GateKind::Nor : GateKind::Or;
    } else {
      if (use_pos)
        kind = pol ? GateKind::Or : GateKind::Nor;
      else
        kind = pol ? GateKind::Nand : GateKind::And;
    }
    return net_.gate(kind, std::move(ins));
  }

  const std::vector<Expr> &nodes_;
  MiniNet &net_;
  std::vector<std::array<double, 2>> cost_;
  std::vector<bool> done_;
};

Tri complement(Tri t) { return t == Tri::DontCare ? t : (t == Tri::One ? Tri::Zero : Tri::One); }

TruthTable single_output(const TruthTable &tt, std::size_t o, bool negate) {
  TruthTable r(tt.num_vars(), 1);
  for (std::uint32_t m = 0; m < tt.size(); ++m)
    r.set(0, m, negate ? complement(tt.at(o, m)) : tt.at(o, m));
  return r;
}

std::size_t reachable_gates(const MiniNet &net, const std::vector<std::size_t> &roots) {
  std::vector<bool> seen(net.num_vars + net.gates.size(), false);
  std::vector<std::size_t> stack = roots;
  std::size_t count = 0;
  while (!stack.empty()) {
    std::size_t n = stack.back();
    stack.pop_back();
    if (seen[n])
      continue;
    seen[n] = true;
    if (n < net.num_vars)
      continue;
    ++count;
    for (std::size_t in : net.gates[n - net.num_vars].ins)
      stack.push_back(in);
  }
  return count;
}

} // namespace

SynthResult synthesize(const TruthTable &tt, const std::vector<std::string> &var_names,
                       const std::vector<std::string> &out_names) {
  const std::size_t v = tt.num_vars();
  if (var_names.size() != v || out_names.size() != tt.num_outputs())
    throw Error(ErrorCode::LengthMismatch, "synthesis names do not match the table shape");
  if (v == 0)
    throw Error(ErrorCode::InvalidArgument, "synthesis needs at least one variable");

  SynthResult result;
  MiniNet net;
  net.num_vars = v;
  std::vector<std::size_t> roots;
  // XOR variants peel one or two variables off the function: f = g ^ v (^ w).
  std::vector<std::vector<std::size_t>> peel{{}};
  if (v <= 8)
    for (std::size_t i = 0; i < v; ++i) {
      peel.push_back({i});
      for (std::size_t j = i + 1; j < v; ++j)
        peel.push_back({i, j});
    }
  for (std::size_t o = 0; o < tt.num_outputs(); ++o) {
    std::optional<MiniNet> best_net;
    std::size_t best_root = 0, best_count = 0;
    for (const auto &vars : peel) {
      TruthTable target = single_output(tt, o, false);
      if (!vars.empty()) {
        std::uint32_t mask = 0;
        for (std::size_t i : vars)
          mask |= 1U << (v - 1 - i);
        for (std::uint32_t m = 0; m < target.size(); ++m)
          if (std::popcount(m & mask) % 2 == 1)
            target.set(0, m, complement(target.at(0, m)));
      }
      // Only small tables get the full exact search; elsewhere the best cover
      // within a bounded search is good enough for a synthesis candidate.
      const std::size_t limit = vars.empty() && v <= 6 ? exact_node_limit : (v <= 6 ? 4096 : 512);
      SopCover on = minimize(target, 0, limit);
      SopCover off = minimize(single_output(target, 0, true), 0, limit);
      if (vars.empty())
        result.covers.push_back(on);
      for (int variant = 0; variant < 4; ++variant) {
        const SopCover &cover = variant % 2 == 0 ? on : off;
        const bool on_cover = variant % 2 == 0;
        Factorer f(v);
        std::size_t top = variant < 2 ? f.factor(cover.cubes) : f.flat(cover.cubes);
        MiniNet trial = net;
        Mapper mapper(f.nodes, trial);
        std::size_t root;
        if (vars.empty()) {
          root = mapper.emit(top, on_cover);
        } else {
          // The off cover yields the complement; the last stage absorbs it.
          root = mapper.emit(top, true);
          for (std::size_t i = 0; i < vars.size(); ++i) {
            bool last = i + 1 == vars.size();
            root = trial.gate(last && !on_cover ? GateKind::Xnor : GateKind::Xor, {root, vars[i]});
          }
        }
        std::vector<std::size_t> all = roots;
        all.push_back(root);
        std::size_t count = reachable_gates(trial, all);
        if (!best_net || count < best_count) {
          best_net = std::move(trial);
          best_root = root;
          best_count = count;
        }
      }
    }
    net = std::move(*best_net);
    roots.push_back(best_root);
  }

  // Keep only reachable gates and give them names.
  Netlist::Builder b;
  for (const auto &n : var_names)
    b.input(n);
  for (const auto &n : out_names)
    b.output(n);
  std::vector<bool> live(net.num_vars + net.gates.size(), false);
  {
    std::vector<std::size_t> stack = roots;
    while (!stack.empty()) {
      std::size_t n = stack.back();
      stack.pop_back();
      if (live[n])
        continue;
      live[n] = true;
      if (n >= v)
        for (std::size_t in : net.gates[n - v].ins)
          stack.push_back(in);
    }
  }
  std::vector<std::string> name(net.num_vars + net.gates.size());
  for (std::size_t i = 0; i < v; ++i)
    name[i] = var_names[i];
  for (std::size_t o = 0; o < roots.size(); ++o)
    if (roots[o] >= v && name[roots[o]].empty())
      name[roots[o]] = out_names[o];
  for (std::size_t g = 0; g < net.gates.size(); ++g) {
    std::size_t id = v + g;
    if (!live[id])
      continue;
    if (name[id].empty())
      name[id] = b.fresh_name(out_names.empty() ? "n" : out_names[0] + "_s");
  }
  for (std::size_t g = 0; g < net.gates.size(); ++g) {
    std::size_t id = v + g;
    if (!live[id])
      continue;
    std::vector<std::string> ins;
    for (std::size_t in : net.gates[g].ins)
      ins.push_back(name[in]);
    b.gate(net.gates[g].kind, name[id], ins);
  }
  for (std::size_t o = 0; o < roots.size(); ++o)
    if (name[roots[o]] != out_names[o])
      b.gate(GateKind::Buf, out_names[o], {name[roots[o]]});
  result.network = b.build();
  result.gates = result.network.gates().size();
  result.literals = pin_count(result.network);
  return result;
}

} // namespace sublock
