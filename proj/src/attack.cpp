#include "attack.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

namespace sublock {

Oracle::Oracle(const Netlist &original) : nl_(original) {
  if (!original.key_inputs().empty())
    throw Error(ErrorCode::InvalidArgument, "an oracle circuit cannot have key inputs");
}

Bits Oracle::query(const Bits &x) {
  ++queries_;
  return simulate(nl_, x, {});
}

const char *to_string(AttackStatus s) {
  switch (s) {
  case AttackStatus::KeyFound: return "KeyFound";
  case AttackStatus::WrongKey: return "WrongKey";
  case AttackStatus::UnsatNoKey: return "UnsatNoKey";
  }
  return "?";
}

AttackBudgetExceeded::AttackBudgetExceeded(AttackReport partial)
    : Error(ErrorCode::IterationBudgetExceeded,
            "attack stopped after " + std::to_string(partial.iterations) + " iterations"),
      partial_(std::move(partial)) {}

std::size_t default_max_iters(std::size_t key_bits) { return 10 * (std::size_t{1} << std::min<std::size_t>(key_bits, 20)); }

namespace {

// Adds the constraint locked(x, keys) == y to the encoder's solver.
void constrain_io(CircuitEncoder &enc, const Netlist &locked, const Binding &bind, const Bits &x, const Bits &y,
                  const std::vector<int> &keys) {
  std::vector<int> pis;
  for (bool b : x)
    pis.push_back(enc.constant(b));
  auto lits = enc.encode(locked, pis, keys);
  for (std::size_t o = 0; o < locked.primary_outputs().size(); ++o) {
    int lit = lits[locked.primary_outputs()[o]];
    bool want = y[bind.po_b_of_a[o]];
    enc.sink().add_clause({want ? lit : -lit});
  }
}

Bits to_oracle_order(const Binding &bind, const Bits &x) {
  Bits r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    r[bind.pi_b_of_a[i]] = x[i];
  return r;
}

} // namespace

AttackReport sat_attack(const Netlist &locked, Oracle &oracle, const AttackOptions &options) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  };
  const std::size_t n = locked.primary_inputs().size(), k = locked.key_inputs().size();
  if (n != oracle.num_inputs() || locked.primary_outputs().size() != oracle.num_outputs())
    throw Error(ErrorCode::ArityMismatch, "locked circuit and oracle have different interfaces");
  if (k == 0)
    throw Error(ErrorCode::InvalidArgument, "the locked circuit has no key inputs");
  const Binding bind = bind_interfaces(locked, oracle.circuit());
  const std::size_t max_iters = options.max_iters ? options.max_iters : default_max_iters(k);

  Solver solver(Solver::Branching::Activity);
  CircuitEncoder enc(solver, false);
  std::vector<int> x(n), k1(k), k2(k);
  for (auto &l : x)
    l = enc.input();
  for (auto &l : k1)
    l = enc.input();
  for (auto &l : k2)
    l = enc.input();
  auto a = enc.encode(locked, x, k1);
  auto b = enc.encode(locked, x, k2);
  const int act = enc.input();
  std::vector<int> diff{-act};
  for (NetId o : locked.primary_outputs()) {
    int d = enc.lxor(a[o], b[o]);
    if (d != -enc.true_lit())
      diff.push_back(d);
  }
  solver.add_clause(diff);

  AttackReport report;
  for (;;) {
    SatStatus st = solver.solve({act});
    if (st == SatStatus::Unsat)
      break;
    if (st != SatStatus::Sat)
      throw Error(ErrorCode::Internal, "DIP query did not finish");
    if (report.iterations >= max_iters || (options.time_limit_ms >= 0 && elapsed() > options.time_limit_ms)) {
      report.wall_time_ms = elapsed();
      throw AttackBudgetExceeded(std::move(report));
    }
    Bits dip(n);
    for (std::size_t i = 0; i < n; ++i)
      dip[i] = solver.model_value(x[i]);
    Bits y = oracle.query(to_oracle_order(bind, dip));
    constrain_io(enc, locked, bind, dip, y, k1);
    constrain_io(enc, locked, bind, dip, y, k2);
    report.dips.push_back({std::move(dip), std::move(y)});
    ++report.iterations;
  }

  if (solver.solve() == SatStatus::Sat) {
    Bits key(k);
    for (std::size_t i = 0; i < k; ++i)
      key[i] = solver.model_value(k1[i]);
    EquivalenceResult eq = check_equivalence(locked, key, oracle.circuit(), {});
    report.status = eq.equivalent ? AttackStatus::KeyFound : AttackStatus::WrongKey;
    report.counterexample = eq.counterexample;
    report.candidate_key = std::move(key);
  } else {
    report.status = AttackStatus::UnsatNoKey;
  }
  report.wall_time_ms = elapsed();
  return report;
}

CnfFormula dip_miter_cnf(const Netlist &locked) {
  CnfFormula f;
  CircuitEncoder enc(f);
  const std::size_t n = locked.primary_inputs().size(), k = locked.key_inputs().size();
  std::vector<int> x(n), k1(k), k2(k);
  for (auto &l : x)
    l = f.new_var();
  for (auto &l : k1)
    l = f.new_var();
  for (auto &l : k2)
    l = f.new_var();
  auto a = enc.encode(locked, x, k1);
  auto b = enc.encode(locked, x, k2);
  std::vector<int> diff;
  for (NetId o : locked.primary_outputs()) {
    int d = enc.lxor(a[o], b[o]);
    if (d != -enc.true_lit())
      diff.push_back(d);
  }
  if (diff.empty())
    diff.push_back(-enc.true_lit());
  f.add_clause(diff);
  return f;
}

std::optional<Bits> find_universal_key(const Netlist &locked, const Netlist &original, std::size_t max_iters) {
  const std::size_t k = locked.key_inputs().size();
  if (locked.primary_inputs().size() != original.primary_inputs().size() ||
      locked.primary_outputs().size() != original.primary_outputs().size())
    throw Error(ErrorCode::ArityMismatch, "locked and original circuits have different interfaces");
  const Binding bind = bind_interfaces(locked, original);
  if (max_iters == 0)
    max_iters = default_max_iters(k);
  Solver solver(Solver::Branching::Activity);
  CircuitEncoder enc(solver, false);
  std::vector<int> keys(k);
  for (auto &l : keys)
    l = enc.input();
  for (std::size_t iter = 0; iter <= max_iters; ++iter) {
    if (solver.solve() != SatStatus::Sat)
      return std::nullopt;
    Bits key(k);
    for (std::size_t i = 0; i < k; ++i)
      key[i] = solver.model_value(keys[i]);
    EquivalenceResult eq = check_equivalence(locked, key, original, {});
    if (eq.equivalent)
      return key;
    const Bits &x = *eq.counterexample;
    Bits y = simulate(original, to_oracle_order(bind, x), {});
    constrain_io(enc, locked, bind, x, y, keys);
  }
  throw Error(ErrorCode::IterationBudgetExceeded, "universal key search exceeded its iteration budget");
}

KeyMapResult brute_force_key_map(const Netlist &locked, Oracle &oracle, const std::vector<BlockShape> &shapes) {
  const std::size_t n = locked.primary_inputs().size(), k = locked.key_inputs().size();
  if (n + k > 20)
    throw Error(ErrorCode::ScaleBound, "exhaustive key map search is limited to 20 inputs plus keys");
  if (n != oracle.num_inputs() || locked.primary_outputs().size() != oracle.num_outputs())
    throw Error(ErrorCode::ArityMismatch, "locked circuit and oracle have different interfaces");
  const Binding bind = bind_interfaces(locked, oracle.circuit());

  std::vector<BlockShape> blocks = shapes;
  if (blocks.empty()) {
    BlockShape all;
    for (NetId id : locked.key_inputs())
      all.key_inputs.push_back(locked.name(id));
    for (NetId id : locked.primary_inputs())
      all.support.push_back(locked.name(id));
    blocks.push_back(std::move(all));
  }
  // Positions of key bits and support inputs per block.
  std::vector<std::vector<std::size_t>> key_pos(blocks.size()), sup_pos(blocks.size());
  std::vector<int> owner(k, -1);
  auto position = [](std::span<const NetId> ids, const Netlist &nl, const std::string &name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (nl.name(ids[i]) == name)
        return i;
    return std::nullopt;
  };
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (const auto &name : blocks[b].key_inputs) {
      auto p = position(locked.key_inputs(), locked, name);
      if (!p)
        throw Error(ErrorCode::UnknownNet, "'" + name + "' is not a key input");
      if (owner[*p] >= 0)
        throw Error(ErrorCode::InvalidArgument, "key input '" + name + "' belongs to two blocks");
      owner[*p] = static_cast<int>(b);
      key_pos[b].push_back(*p);
    }
    for (const auto &name : blocks[b].support) {
      auto p = position(locked.primary_inputs(), locked, name);
      if (!p)
        throw Error(ErrorCode::InvalidArgument, "brute-force supports must be primary inputs; got '" + name + "'");
      sup_pos[b].push_back(*p);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end())
    throw Error(ErrorCode::InvalidArgument, "every key input must belong to a block");

  // correct[x]: every full key (MSB = first key input) matching the oracle.
  KeyMapResult result;
  const std::uint64_t inputs = std::uint64_t{1} << n, keyspace = std::uint64_t{1} << k;
  std::vector<std::vector<std::uint32_t>> correct(inputs);
  result.keys_per_input.assign(inputs, 0);
  for (std::uint64_t xi = 0; xi < inputs; ++xi) {
    Bits x = bits_of(xi, n);
    Bits y = oracle.query(to_oracle_order(bind, x));
    std::vector<std::uint64_t> pw(n);
    for (std::size_t i = 0; i < n; ++i)
      pw[i] = x[i] ? ~std::uint64_t{0} : 0;
    for (std::uint64_t block = 0; block * 64 < keyspace; ++block) {
      auto kw = exhaustive_words(k, block);
      auto v = simulate_words(locked, pw, kw);
      std::uint64_t ok = ~std::uint64_t{0};
      for (std::size_t o = 0; o < locked.primary_outputs().size(); ++o)
        ok &= y[bind.po_b_of_a[o]] ? v[locked.primary_outputs()[o]] : ~v[locked.primary_outputs()[o]];
      std::uint64_t lanes = std::min<std::uint64_t>(64, keyspace - block * 64);
      if (lanes < 64)
        ok &= (std::uint64_t{1} << lanes) - 1;
      for (; ok; ok &= ok - 1)
        correct[xi].push_back(static_cast<std::uint32_t>(block * 64 + static_cast<std::uint64_t>(__builtin_ctzll(ok))));
    }
    result.keys_per_input[xi] = correct[xi].size();
  }

  // Backtracking over (block, support pattern) -> block key value.
  struct Var {
    std::size_t block;
    std::uint32_t pattern;
  };
  std::vector<Var> vars;
  std::vector<std::vector<int>> assignment(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    assignment[b].assign(std::size_t{1} << sup_pos[b].size(), -1);
    for (std::uint32_t p = 0; p < assignment[b].size(); ++p)
      vars.push_back({b, p});
  }
  auto project = [&](std::size_t b, std::uint64_t xi) {
    std::uint32_t p = 0;
    for (std::size_t pos : sup_pos[b])
      p = (p << 1) | static_cast<std::uint32_t>((xi >> (n - 1 - pos)) & 1U);
    return p;
  };
  auto block_value = [&](std::size_t b, std::uint32_t key) {
    std::uint32_t v = 0;
    for (std::size_t pos : key_pos[b])
      v = (v << 1) | ((key >> (k - 1 - pos)) & 1U);
    return v;
  };
  auto consistent = [&](std::uint64_t xi) {
    for (std::uint32_t key : correct[xi]) {
      bool ok = true;
      for (std::size_t b = 0; b < blocks.size() && ok; ++b) {
        int a = assignment[b][project(b, xi)];
        ok = a < 0 || static_cast<std::uint32_t>(a) == block_value(b, key);
      }
      if (ok)
        return true;
    }
    return false;
  };
  // Inputs touched by each variable.
  std::vector<std::vector<std::uint64_t>> touched(vars.size());
  for (std::size_t vi = 0; vi < vars.size(); ++vi)
    for (std::uint64_t xi = 0; xi < inputs; ++xi)
      if (project(vars[vi].block, xi) == vars[vi].pattern)
        touched[vi].push_back(xi);

  std::function<bool(std::size_t)> search = [&](std::size_t vi) {
    if (vi == vars.size())
      return true;
    const Var &var = vars[vi];
    const std::uint32_t domain = 1U << key_pos[var.block].size();
    for (std::uint32_t value = 0; value < domain; ++value) {
      assignment[var.block][var.pattern] = static_cast<int>(value);
      bool ok = std::all_of(touched[vi].begin(), touched[vi].end(), consistent);
      if (ok && search(vi + 1))
        return true;
    }
    assignment[var.block][var.pattern] = -1;
    return false;
  };
  for (const auto &c : correct)
    if (c.empty())
      return result;
  if (!search(0))
    return result;

  std::vector<KeyMemory> memory;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    KeyMemory mem;
    mem.key_inputs = blocks[b].key_inputs;
    mem.support = blocks[b].support;
    for (std::uint32_t p = 0; p < assignment[b].size(); ++p)
      mem.entries[bits_to_string(bits_of(p, mem.support.size()))] =
          bits_to_string(bits_of(static_cast<std::uint64_t>(assignment[b][p]), mem.key_inputs.size()));
    memory.push_back(std::move(mem));
  }
  result.memory = std::move(memory);
  return result;
}

} // namespace sublock
