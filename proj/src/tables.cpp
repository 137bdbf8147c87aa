#include "tables.hpp"

#include <algorithm>
#include <unordered_set>

namespace sublock {

TruthTable::TruthTable(std::size_t num_vars, std::size_t num_outputs, Tri fill)
    : num_vars_(num_vars), num_outputs_(num_outputs) {
  if (num_vars > max_vars)
    throw Error(ErrorCode::SupportTooLarge, "truth tables are limited to " + std::to_string(max_vars) + " variables");
  entries_.assign(num_outputs * size(), fill);
}

TruthTable TruthTable::from_string(std::size_t num_vars, const std::string &column) {
  TruthTable tt(num_vars, 1);
  if (column.size() != tt.size())
    throw Error(ErrorCode::LengthMismatch, "table column has " + std::to_string(column.size()) + " entries, expected " +
                                               std::to_string(tt.size()));
  for (std::uint32_t m = 0; m < column.size(); ++m) {
    char c = column[m];
    if (c == '0')
      tt.set(0, m, Tri::Zero);
    else if (c == '1')
      tt.set(0, m, Tri::One);
    else if (c == '-' || c == 'x' || c == 'X')
      tt.set(0, m, Tri::DontCare);
    else
      throw Error(ErrorCode::InvalidArgument, std::string("bad table entry '") + c + "'");
  }
  return tt;
}

std::string TruthTable::column_string(std::size_t output) const {
  std::string s(size(), '0');
  for (std::uint32_t m = 0; m < size(); ++m) {
    Tri t = at(output, m);
    s[m] = t == Tri::One ? '1' : t == Tri::Zero ? '0' : '-';
  }
  return s;
}

char Cube::literal(std::size_t i, std::size_t v) const {
  std::uint32_t bit = 1U << (v - 1 - i);
  if (!(care & bit))
    return '-';
  return (value & bit) ? '1' : '0';
}

std::string Cube::to_string(std::size_t v) const {
  std::string s(v, '-');
  for (std::size_t i = 0; i < v; ++i)
    s[i] = literal(i, v);
  return s;
}

bool cube_less(const Cube &a, const Cube &b, std::size_t num_vars) {
  auto rank = [](char c) { return c == '0' ? 0 : c == '1' ? 1 : 2; };
  for (std::size_t i = 0; i < num_vars; ++i) {
    int ra = rank(a.literal(i, num_vars)), rb = rank(b.literal(i, num_vars));
    if (ra != rb)
      return ra < rb;
  }
  return false;
}

bool SopCover::evaluate(std::uint32_t minterm) const {
  for (const Cube &c : cubes)
    if (c.covers(minterm))
      return true;
  return false;
}

CoverCost cost(const SopCover &cover) {
  CoverCost c;
  c.cubes = cover.cubes.size();
  for (const Cube &cube : cover.cubes)
    c.literals += cube.literals();
  return c;
}

// ---------------------------------------------------------------------------

TruthTable table_of_netlist(const Netlist &nl, const std::vector<NetId> &outputs, const std::vector<NetId> &support) {
  if (support.size() > TruthTable::max_vars)
    throw Error(ErrorCode::SupportTooLarge, "support of " + std::to_string(support.size()) + " nets exceeds " +
                                                std::to_string(TruthTable::max_vars));
  std::vector<int> support_pos(nl.num_nets(), -1);
  for (std::size_t i = 0; i < support.size(); ++i)
    support_pos.at(support[i]) = static_cast<int>(i);

  std::vector<bool> seen(nl.num_nets(), false);
  std::vector<std::size_t> gates;
  std::vector<NetId> stack;
  for (NetId o : outputs) {
    if (o >= nl.num_nets())
      throw Error(ErrorCode::UnknownNet, "unknown net id " + std::to_string(o));
    stack.push_back(o);
  }
  while (!stack.empty()) {
    NetId n = stack.back();
    stack.pop_back();
    if (seen[n] || support_pos[n] >= 0)
      continue;
    seen[n] = true;
    auto d = nl.driver(n);
    if (!d)
      throw Error(ErrorCode::DependsOutsideSupport,
                  "net '" + nl.name(n) + "' is reached from the outputs but is not in the support");
    gates.push_back(*d);
    for (NetId in : nl.gates()[*d].inputs)
      stack.push_back(in);
  }
  std::sort(gates.begin(), gates.end());

  TruthTable tt(support.size(), outputs.size());
  const std::size_t total = tt.size();
  std::vector<std::uint64_t> val(nl.num_nets(), 0);
  std::vector<std::uint64_t> args;
  for (std::uint64_t block = 0; block * 64 < total; ++block) {
    auto words = exhaustive_words(support.size(), block);
    for (std::size_t i = 0; i < support.size(); ++i)
      val[support[i]] = words[i];
    for (std::size_t g : gates) {
      const Gate &gate = nl.gates()[g];
      args.resize(gate.inputs.size());
      for (std::size_t i = 0; i < args.size(); ++i)
        args[i] = val[gate.inputs[i]];
      val[gate.output] = eval_gate_word(gate.kind, args);
    }
    std::size_t lanes = std::min<std::size_t>(64, total - block * 64);
    for (std::size_t o = 0; o < outputs.size(); ++o)
      for (std::size_t lane = 0; lane < lanes; ++lane)
        tt.set(o, static_cast<std::uint32_t>(block * 64 + lane),
               ((val[outputs[o]] >> lane) & 1U) ? Tri::One : Tri::Zero);
  }
  return tt;
}

// ---------------------------------------------------------------------------
// Minimization

namespace {

struct CubeHash {
  std::size_t operator()(const Cube &c) const { return (std::size_t{c.care} << 17) ^ c.value; }
};

bool covers_off(const Cube &c, const std::vector<std::uint32_t> &off) {
  for (std::uint32_t m : off)
    if (c.covers(m))
      return true;
  return false;
}

void sort_cubes(std::vector<Cube> &cubes, std::size_t v) {
  std::sort(cubes.begin(), cubes.end(), [v](const Cube &a, const Cube &b) { return cube_less(a, b, v); });
}

bool list_less(const std::vector<Cube> &a, const std::vector<Cube> &b, std::size_t v) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [v](const Cube &x, const Cube &y) { return cube_less(x, y, v); });
}

class ExactCover {
public:
  ExactCover(std::size_t v, std::vector<Cube> primes, std::vector<std::uint32_t> on, std::size_t node_limit)
      : v_(v), primes_(std::move(primes)), on_(std::move(on)), node_limit_(node_limit) {
    covering_.resize(on_.size());
    for (std::size_t m = 0; m < on_.size(); ++m) {
      for (std::size_t p = 0; p < primes_.size(); ++p)
        if (primes_[p].covers(on_[m]))
          covering_[m].push_back(p);
      std::sort(covering_[m].begin(), covering_[m].end(), [&](std::size_t a, std::size_t b) {
        if (primes_[a].literals() != primes_[b].literals())
          return primes_[a].literals() < primes_[b].literals();
        return cube_less(primes_[a], primes_[b], v_);
      });
    }
    covered_.assign(on_.size(), 0);
  }

  std::vector<Cube> run() {
    search();
    return best_;
  }

private:
  // Prime count plus a literal floor from minterms no shared prime can cover
  // together.
  CoverCost lower_bound(std::vector<std::size_t> &order) const {
    order.clear();
    for (std::size_t m = 0; m < on_.size(); ++m)
      if (!covered_[m])
        order.push_back(m);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (covering_[a].size() != covering_[b].size())
        return covering_[a].size() < covering_[b].size();
      return a < b;
    });
    CoverCost lb;
    std::vector<bool> blocked(primes_.size(), false);
    for (std::size_t m : order) {
      bool free = true;
      for (std::size_t p : covering_[m])
        free = free && !blocked[p];
      if (!free)
        continue;
      ++lb.cubes;
      int min_lits = 64;
      for (std::size_t p : covering_[m]) {
        blocked[p] = true;
        min_lits = std::min(min_lits, primes_[p].literals());
      }
      lb.literals += static_cast<std::size_t>(min_lits);
    }
    return lb;
  }

  void search() {
    if (++nodes_ > node_limit_ && !best_.empty())
      return;
    std::vector<std::size_t> order;
    CoverCost lb = lower_bound(order);
    if (order.empty()) {
      std::vector<Cube> sol;
      for (std::size_t p : chosen_)
        sol.push_back(primes_[p]);
      sort_cubes(sol, v_);
      CoverCost c{sol.size(), cur_lits_};
      if (best_.empty() || c < best_cost_ || (c == best_cost_ && list_less(sol, best_, v_))) {
        best_ = std::move(sol);
        best_cost_ = c;
      }
      return;
    }
    if (!best_.empty()) {
      CoverCost bound{chosen_.size() + lb.cubes, cur_lits_ + lb.literals};
      if (best_cost_ < bound)
        return;
    }
    std::size_t m = order.front();
    for (std::size_t p : covering_[m]) {
      chosen_.push_back(p);
      cur_lits_ += primes_[p].literals();
      for (std::size_t k = 0; k < on_.size(); ++k)
        if (primes_[p].covers(on_[k]))
          ++covered_[k];
      search();
      for (std::size_t k = 0; k < on_.size(); ++k)
        if (primes_[p].covers(on_[k]))
          --covered_[k];
      cur_lits_ -= primes_[p].literals();
      chosen_.pop_back();
    }
  }

  std::size_t v_;
  std::vector<Cube> primes_;
  std::vector<std::uint32_t> on_;
  std::vector<std::vector<std::size_t>> covering_;
  std::vector<int> covered_;
  std::vector<std::size_t> chosen_;
  std::size_t cur_lits_ = 0;
  std::vector<Cube> best_;
  CoverCost best_cost_;
  std::size_t nodes_ = 0;
  std::size_t node_limit_;
};

std::vector<Cube> greedy_cover(std::size_t v, const std::vector<std::uint32_t> &on,
                               const std::vector<std::uint32_t> &off) {
  const std::uint32_t full = v == 32 ? ~0U : ((1U << v) - 1);
  std::unordered_set<Cube, CubeHash> seen;
  std::vector<Cube> primes;
  for (std::uint32_t m : on) {
    Cube c{full, m};
    bool inside = false;
    for (const Cube &p : primes)
      inside = inside || p.covers(m);
    if (inside)
      continue;
    for (std::size_t i = 0; i < v; ++i) {
      std::uint32_t bit = 1U << (v - 1 - i);
      Cube wider{c.care & ~bit, c.value & ~bit};
      if (!covers_off(wider, off))
        c = wider;
    }
    if (seen.insert(c).second)
      primes.push_back(c);
  }
  sort_cubes(primes, v);

  std::vector<bool> covered(on.size(), false);
  std::size_t left = on.size();
  std::vector<Cube> chosen;
  while (left > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t p = 0; p < primes.size(); ++p) {
      std::size_t gain = 0;
      for (std::size_t k = 0; k < on.size(); ++k)
        if (!covered[k] && primes[p].covers(on[k]))
          ++gain;
      if (gain > best_gain || (gain == best_gain && gain > 0 && primes[p].literals() < primes[best].literals())) {
        best = p;
        best_gain = gain;
      }
    }
    chosen.push_back(primes[best]);
    for (std::size_t k = 0; k < on.size(); ++k)
      if (!covered[k] && primes[best].covers(on[k])) {
        covered[k] = true;
        --left;
      }
  }
  // drop cubes made redundant by later picks
  for (std::size_t i = chosen.size(); i-- > 0;) {
    bool needed = false;
    for (std::uint32_t m : on) {
      if (!chosen[i].covers(m))
        continue;
      bool other = false;
      for (std::size_t j = 0; j < chosen.size() && !other; ++j)
        other = j != i && chosen[j].covers(m);
      if (!other) {
        needed = true;
        break;
      }
    }
    if (!needed)
      chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(i));
  }
  sort_cubes(chosen, v);
  return chosen;
}

} // namespace

std::vector<Cube> prime_implicants(const TruthTable &tt, std::size_t output) {
  const std::size_t v = tt.num_vars();
  const std::uint32_t full = (1U << v) - 1;
  std::unordered_set<Cube, CubeHash> level;
  for (std::uint32_t m = 0; m < tt.size(); ++m)
    if (tt.at(output, m) != Tri::Zero)
      level.insert(Cube{full, m});
  std::vector<Cube> primes;
  while (!level.empty()) {
    std::unordered_set<Cube, CubeHash> next, merged;
    for (const Cube &c : level) {
      for (std::size_t i = 0; i < v; ++i) {
        std::uint32_t bit = 1U << i;
        if (!(c.care & bit))
          continue;
        Cube partner{c.care, c.value ^ bit};
        if (level.contains(partner)) {
          merged.insert(c);
          next.insert(Cube{c.care & ~bit, c.value & ~bit});
        }
      }
    }
    for (const Cube &c : level)
      if (!merged.contains(c))
        primes.push_back(c);
    level = std::move(next);
  }
  sort_cubes(primes, v);
  return primes;
}

SopCover minimize(const TruthTable &tt, std::size_t output, std::size_t node_limit) {
  SopCover cover;
  cover.num_vars = tt.num_vars();
  std::vector<std::uint32_t> on, off;
  for (std::uint32_t m = 0; m < tt.size(); ++m) {
    Tri t = tt.at(output, m);
    if (t == Tri::One)
      on.push_back(m);
    else if (t == Tri::Zero)
      off.push_back(m);
  }
  if (on.empty())
    return cover;
  if (off.empty()) {
    cover.cubes.push_back(Cube{0, 0});
    return cover;
  }
  if (tt.num_vars() <= 8)
    cover.cubes = ExactCover(tt.num_vars(), prime_implicants(tt, output), on, node_limit).run();
  else
    cover.cubes = greedy_cover(tt.num_vars(), on, off);
  return cover;
}

// ---------------------------------------------------------------------------

Netlist netlist_of_sop(const std::vector<SopCover> &covers, const std::vector<std::string> &var_names,
                       const std::vector<std::string> &out_names) {
  Netlist::Builder b;
  for (const auto &n : var_names)
    b.input(n);
  std::vector<std::string> outs = out_names;
  for (std::size_t o = outs.size(); o < covers.size(); ++o)
    outs.push_back(b.fresh_name("f" + std::to_string(o)));
  for (const auto &o : outs)
    b.output(o);

  std::vector<std::string> negated(var_names.size());
  auto neg = [&](std::size_t i) -> const std::string & {
    if (negated[i].empty()) {
      negated[i] = b.fresh_name(var_names[i] + "_n");
      b.gate(GateKind::Not, negated[i], {var_names[i]});
    }
    return negated[i];
  };
  auto require_var = [&]() {
    if (var_names.empty())
      throw Error(ErrorCode::InvalidArgument, "a constant output needs at least one variable");
  };

  for (std::size_t o = 0; o < covers.size(); ++o) {
    const SopCover &cover = covers[o];
    if (cover.num_vars != var_names.size())
      throw Error(ErrorCode::LengthMismatch, "cover width does not match variable names");
    const std::size_t v = cover.num_vars;
    if (cover.cubes.empty()) {
      require_var();
      b.gate(GateKind::And, outs[o], {var_names[0], neg(0)});
      continue;
    }
    std::vector<std::string> terms;
    bool tautology = false;
    for (const Cube &c : cover.cubes) {
      std::vector<std::string> lits;
      for (std::size_t i = 0; i < v; ++i) {
        char l = c.literal(i, v);
        if (l == '1')
          lits.push_back(var_names[i]);
        else if (l == '0')
          lits.push_back(neg(i));
      }
      if (lits.empty()) {
        tautology = true;
      } else if (lits.size() == 1) {
        terms.push_back(lits[0]);
      } else if (cover.cubes.size() == 1) {
        b.gate(GateKind::And, outs[o], lits);
        terms.push_back(outs[o]);
      } else {
        terms.push_back(b.fresh_name(outs[o] + "_p"));
        b.gate(GateKind::And, terms.back(), lits);
      }
    }
    if (tautology) {
      require_var();
      b.gate(GateKind::Or, outs[o], {var_names[0], neg(0)});
    } else if (terms.size() == 1) {
      if (terms[0] != outs[o])
        b.gate(GateKind::Buf, outs[o], {terms[0]});
    } else {
      b.gate(GateKind::Or, outs[o], terms);
    }
  }
  return b.build();
}

std::string pla_dump(const std::vector<SopCover> &covers) {
  std::size_t v = covers.empty() ? 0 : covers[0].num_vars;
  std::size_t p = 0;
  for (const auto &c : covers)
    p += c.cubes.size();
  std::string s = ".i " + std::to_string(v) + "\n.o " + std::to_string(covers.size()) + "\n.p " + std::to_string(p) +
                  "\n";
  for (std::size_t o = 0; o < covers.size(); ++o) {
    std::string outbits(covers.size(), '0');
    outbits[o] = '1';
    for (const Cube &c : covers[o].cubes)
      s += c.to_string(v) + " " + outbits + "\n";
  }
  s += ".e\n";
  return s;
}

} // namespace sublock
