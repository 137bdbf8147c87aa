#include "miter.hpp"

#include <algorithm>
#include <cstdlib>

namespace sublock {

CnfFormula tseitin(const Netlist &nl) {
  CnfFormula f;
  for (std::size_t i = 0; i < nl.num_nets(); ++i)
    f.new_var();
  auto var = [](NetId n) { return static_cast<int>(n) + 1; };
  for (const Gate &g : nl.gates()) {
    int y = var(g.output);
    std::vector<int> in;
    for (NetId n : g.inputs)
      in.push_back(var(n));
    switch (g.kind) {
    case GateKind::And:
    case GateKind::Nand: {
      int out = g.kind == GateKind::And ? y : -y;
      std::vector<int> big;
      for (int a : in)
        big.push_back(-a);
      big.push_back(out);
      f.add_clause(big);
      for (int a : in)
        f.add_clause({a, -out});
      break;
    }
    case GateKind::Or:
    case GateKind::Nor: {
      int out = g.kind == GateKind::Or ? y : -y;
      std::vector<int> big = in;
      big.push_back(-out);
      f.add_clause(big);
      for (int a : in)
        f.add_clause({-a, out});
      break;
    }
    case GateKind::Xor:
    case GateKind::Xnor: {
      int out = g.kind == GateKind::Xor ? y : -y;
      int a = in[0], b = in[1];
      f.add_clause({-a, -b, -out});
      f.add_clause({a, b, -out});
      f.add_clause({a, -b, out});
      f.add_clause({-a, b, out});
      break;
    }
    case GateKind::Not:
      f.add_clause({in[0], y});
      f.add_clause({-in[0], -y});
      break;
    case GateKind::Buf:
      f.add_clause({-in[0], y});
      f.add_clause({in[0], -y});
      break;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------

CircuitEncoder::CircuitEncoder(ClauseSink &sink) : sink_(sink) {
  true_ = sink_.new_var();
  sink_.add_clause({true_});
}

CircuitEncoder::CircuitEncoder(Solver &solver, bool sweep, std::uint64_t seed)
    : sink_(solver), solver_(&solver), sweep_(sweep), rng_(seed) {
  true_ = sink_.new_var();
  sink_.add_clause({true_});
  if (sweep_)
    set_signature(true_, std::vector<std::uint64_t>(sig_words, ~std::uint64_t{0}));
}

int CircuitEncoder::input() {
  int v = sink_.new_var();
  if (sweep_) {
    std::vector<std::uint64_t> sig(sig_words);
    for (auto &w : sig)
      w = rng_.next();
    set_signature(v, std::move(sig));
  }
  return v;
}

void CircuitEncoder::set_signature(int var, std::vector<std::uint64_t> sig) {
  if (sigs_.size() <= static_cast<std::size_t>(var))
    sigs_.resize(static_cast<std::size_t>(var) + 1);
  sigs_[static_cast<std::size_t>(var)] = std::move(sig);
}

std::vector<std::uint64_t> CircuitEncoder::signature(int lit) const {
  auto v = static_cast<std::size_t>(std::abs(lit));
  std::vector<std::uint64_t> s;
  if (v < sigs_.size())
    s = sigs_[v];
  if (s.empty())
    return s;
  if (lit < 0)
    for (auto &w : s)
      w = ~w;
  return s;
}

int CircuitEncoder::sweep(int y) {
  if (!sweep_ || !solver_)
    return y;
  std::vector<std::uint64_t> sig = signature(y);
  if (sig.empty())
    return y;
  const bool flip = (sig[0] & 1U) != 0;
  if (flip)
    for (auto &w : sig)
      w = ~w;
  constexpr std::int64_t budget = 300;
  auto proven = [&](int c) {
    return solver_->solve({y, -c}, budget) == SatStatus::Unsat && solver_->solve({-y, c}, budget) == SatStatus::Unsat;
  };
  auto merge = [&](int c) {
    sink_.add_clause({-y, c});
    sink_.add_clause({y, -c});
    ++merges_;
    return c;
  };
  bool zero = std::all_of(sig.begin(), sig.end(), [](std::uint64_t w) { return w == 0; });
  if (zero) {
    int c = flip ? true_ : -true_;
    if (proven(c))
      return merge(c);
    return y;
  }
  auto &cls = classes_[sig];
  std::size_t tried = 0;
  for (int s : cls) {
    if (tried++ == 2)
      break;
    int c = flip ? -s : s;
    if (proven(c))
      return merge(c);
  }
  cls.push_back(flip ? -y : y);
  return y;
}

int CircuitEncoder::land(std::vector<int> ins) {
  std::vector<int> v;
  v.reserve(ins.size());
  for (int l : ins) {
    if (l == true_)
      continue;
    if (l == -true_)
      return -true_;
    v.push_back(l);
  }
  std::sort(v.begin(), v.end(), [](int a, int b) {
    int x = std::abs(a), y = std::abs(b);
    return x != y ? x < y : a < b;
  });
  v.erase(std::unique(v.begin(), v.end()), v.end());
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i] == -v[i + 1])
      return -true_;
  if (v.empty())
    return true_;
  if (v.size() == 1)
    return v[0];
  if (auto it = and_table_.find(v); it != and_table_.end())
    return it->second;

  int y = sink_.new_var();
  std::vector<int> big;
  big.reserve(v.size() + 1);
  for (int a : v) {
    sink_.add_clause({-y, a});
    big.push_back(-a);
  }
  big.push_back(y);
  sink_.add_clause(big);
  if (sweep_) {
    std::vector<std::uint64_t> sig(sig_words, ~std::uint64_t{0});
    for (int a : v) {
      auto s = signature(a);
      for (std::size_t w = 0; w < sig_words && !s.empty(); ++w)
        sig[w] &= s[w];
    }
    set_signature(y, std::move(sig));
    y = sweep(y);
  }
  and_table_.emplace(std::move(v), y);
  return y;
}

int CircuitEncoder::lor(std::vector<int> ins) {
  for (int &l : ins)
    l = -l;
  return -land(std::move(ins));
}

int CircuitEncoder::lxor(int a, int b) {
  if (is_constant(a))
    return a == true_ ? -b : b;
  if (is_constant(b))
    return b == true_ ? -a : a;
  if (a == b)
    return -true_;
  if (a == -b)
    return true_;
  bool parity = false;
  if (a < 0) {
    a = -a;
    parity = !parity;
  }
  if (b < 0) {
    b = -b;
    parity = !parity;
  }
  if (a > b)
    std::swap(a, b);
  std::vector<int> key{a, b};
  int y;
  if (auto it = xor_table_.find(key); it != xor_table_.end()) {
    y = it->second;
  } else {
    y = sink_.new_var();
    sink_.add_clause({-a, -b, -y});
    sink_.add_clause({a, b, -y});
    sink_.add_clause({a, -b, y});
    sink_.add_clause({-a, b, y});
    if (sweep_) {
      auto sa = signature(a), sb = signature(b);
      std::vector<std::uint64_t> sig(sig_words, 0);
      for (std::size_t w = 0; w < sig_words && !sa.empty() && !sb.empty(); ++w)
        sig[w] = sa[w] ^ sb[w];
      set_signature(y, std::move(sig));
      y = sweep(y);
    }
    xor_table_.emplace(std::move(key), y);
  }
  return parity ? -y : y;
}

int CircuitEncoder::gate(GateKind kind, std::vector<int> ins) {
  switch (kind) {
  case GateKind::And: return land(std::move(ins));
  case GateKind::Nand: return -land(std::move(ins));
  case GateKind::Or: return lor(std::move(ins));
  case GateKind::Nor: return -lor(std::move(ins));
  case GateKind::Xor:
  case GateKind::Xnor: {
    int acc = ins[0];
    for (std::size_t i = 1; i < ins.size(); ++i)
      acc = lxor(acc, ins[i]);
    return kind == GateKind::Xor ? acc : -acc;
  }
  case GateKind::Not: return -ins[0];
  case GateKind::Buf: return ins[0];
  }
  return ins[0];
}

std::vector<int> CircuitEncoder::encode(const Netlist &nl, std::span<const int> pi_lits, std::span<const int> key_lits) {
  if (pi_lits.size() != nl.primary_inputs().size() || key_lits.size() != nl.key_inputs().size())
    throw Error(ErrorCode::ArityMismatch, "encoder interface width does not match the netlist");
  std::vector<int> lit(nl.num_nets(), 0);
  for (std::size_t i = 0; i < pi_lits.size(); ++i)
    lit[nl.primary_inputs()[i]] = pi_lits[i];
  for (std::size_t i = 0; i < key_lits.size(); ++i)
    lit[nl.key_inputs()[i]] = key_lits[i];
  std::vector<int> ins;
  for (const Gate &g : nl.gates()) {
    ins.clear();
    for (NetId n : g.inputs)
      ins.push_back(lit[n]);
    lit[g.output] = gate(g.kind, ins);
  }
  return lit;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> bind_lists(const Netlist &a, std::span<const NetId> la, const Netlist &b,
                                    std::span<const NetId> lb, const char *what) {
  if (la.size() != lb.size())
    throw Error(ErrorCode::ArityMismatch, std::string(what) + " counts differ (" + std::to_string(la.size()) +
                                              " vs " + std::to_string(lb.size()) + ")");
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < lb.size(); ++i)
    pos.emplace(b.name(lb[i]), i);
  std::vector<std::size_t> map(la.size());
  bool by_name = pos.size() == lb.size();
  for (std::size_t i = 0; i < la.size() && by_name; ++i) {
    auto it = pos.find(a.name(la[i]));
    if (it == pos.end())
      by_name = false;
    else
      map[i] = it->second;
  }
  if (!by_name)
    for (std::size_t i = 0; i < la.size(); ++i)
      map[i] = i;
  return map;
}

void check_keys(const Netlist &nl, const Bits &key) {
  if (key.size() != nl.key_inputs().size())
    throw Error(ErrorCode::ArityMismatch, "netlist has " + std::to_string(nl.key_inputs().size()) +
                                              " key inputs but " + std::to_string(key.size()) + " key values given");
}

bool differs_on(const Netlist &a, const Bits &key_a, const Netlist &b, const Bits &key_b, const Binding &bind,
                const Bits &x) {
  Bits xb(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    xb[bind.pi_b_of_a[i]] = x[i];
  Bits ya = simulate(a, x, key_a), yb = simulate(b, xb, key_b);
  for (std::size_t o = 0; o < ya.size(); ++o)
    if (ya[o] != yb[bind.po_b_of_a[o]])
      return true;
  return false;
}

} // namespace

Binding bind_interfaces(const Netlist &a, const Netlist &b) {
  Binding bind;
  bind.pi_b_of_a = bind_lists(a, a.primary_inputs(), b, b.primary_inputs(), "primary input");
  bind.po_b_of_a = bind_lists(a, a.primary_outputs(), b, b.primary_outputs(), "primary output");
  return bind;
}

EquivalenceResult miter_equivalence(const Netlist &a, const Bits &key_a, const Netlist &b, const Bits &key_b) {
  check_keys(a, key_a);
  check_keys(b, key_b);
  Binding bind = bind_interfaces(a, b);

  Solver solver(Solver::Branching::Activity);
  CircuitEncoder enc(solver, true);
  std::vector<int> pa(a.primary_inputs().size()), pb(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    pa[i] = enc.input();
    pb[bind.pi_b_of_a[i]] = pa[i];
  }
  std::vector<int> ka, kb;
  for (bool v : key_a)
    ka.push_back(enc.constant(v));
  for (bool v : key_b)
    kb.push_back(enc.constant(v));
  auto la = enc.encode(a, pa, ka);
  auto lb = enc.encode(b, pb, kb);

  std::vector<int> diff;
  for (std::size_t o = 0; o < a.primary_outputs().size(); ++o) {
    int d = enc.lxor(la[a.primary_outputs()[o]], lb[b.primary_outputs()[bind.po_b_of_a[o]]]);
    if (d != -enc.true_lit())
      diff.push_back(d);
  }
  EquivalenceResult r;
  if (diff.empty())
    return r;
  solver.add_clause(diff);
  SatStatus st = solver.solve();
  if (st == SatStatus::Unsat)
    return r;
  if (st != SatStatus::Sat)
    throw Error(ErrorCode::Internal, "equivalence check did not finish");
  Bits x(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    x[i] = solver.model_value(pa[i]);
  if (!differs_on(a, key_a, b, key_b, bind, x))
    throw Error(ErrorCode::Internal, "miter counterexample not confirmed by simulation");
  r.equivalent = false;
  r.counterexample = std::move(x);
  return r;
}

EquivalenceResult miter_equivalence(const Netlist &a, const Netlist &b) { return miter_equivalence(a, {}, b, {}); }

EquivalenceResult exhaustive_equivalence(const Netlist &a, const Bits &key_a, const Netlist &b, const Bits &key_b) {
  check_keys(a, key_a);
  check_keys(b, key_b);
  Binding bind = bind_interfaces(a, b);
  const std::size_t n = a.primary_inputs().size();
  if (n > 24)
    throw Error(ErrorCode::ScaleBound, "exhaustive equivalence is limited to 24 inputs");
  std::vector<std::uint64_t> kwa(key_a.size()), kwb(key_b.size());
  for (std::size_t i = 0; i < key_a.size(); ++i)
    kwa[i] = key_a[i] ? ~std::uint64_t{0} : 0;
  for (std::size_t i = 0; i < key_b.size(); ++i)
    kwb[i] = key_b[i] ? ~std::uint64_t{0} : 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<std::uint64_t> wb(n);
  EquivalenceResult r;
  for (std::uint64_t block = 0; block * 64 < total; ++block) {
    auto wa = exhaustive_words(n, block);
    for (std::size_t i = 0; i < n; ++i)
      wb[bind.pi_b_of_a[i]] = wa[i];
    auto va = simulate_words(a, wa, kwa);
    auto vb = simulate_words(b, wb, kwb);
    std::uint64_t lanes = std::min<std::uint64_t>(64, total - block * 64);
    std::uint64_t mask = lanes == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << lanes) - 1);
    std::uint64_t bad = 0;
    for (std::size_t o = 0; o < a.primary_outputs().size(); ++o)
      bad |= va[a.primary_outputs()[o]] ^ vb[b.primary_outputs()[bind.po_b_of_a[o]]];
    bad &= mask;
    if (bad) {
      std::uint64_t lane = static_cast<std::uint64_t>(__builtin_ctzll(bad));
      r.equivalent = false;
      r.counterexample = bits_of(block * 64 + lane, n);
      return r;
    }
  }
  return r;
}

EquivalenceResult check_equivalence(const Netlist &a, const Bits &key_a, const Netlist &b, const Bits &key_b,
                                    std::size_t exhaustive_limit) {
  if (a.primary_inputs().size() <= exhaustive_limit)
    return exhaustive_equivalence(a, key_a, b, key_b);
  return miter_equivalence(a, key_a, b, key_b);
}

} // namespace sublock
