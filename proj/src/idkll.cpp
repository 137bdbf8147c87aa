#include "idkll.hpp"

#include <algorithm>
#include <unordered_map>

namespace sublock {

const char *to_string(PlanStrategy s) { return s == PlanStrategy::MsbSplit ? "msb" : "balanced"; }
const char *to_string(DontCarePolicy p) { return p == DontCarePolicy::DontCare ? "dontcare" : "complement"; }

void KeyPlan::validate() const {
  auto fail = [](const std::string &msg) { throw Error(ErrorCode::InfeasiblePlan, msg); };
  if (num_key_bits == 0 || num_key_bits > 16)
    fail("key width must be between 1 and 16 bits");
  if (num_inputs > 16)
    fail("at most 16 inputs can be locked by one table");
  if (partition.size() != (std::size_t{1} << num_inputs))
    fail("partition must assign every input pattern");
  const std::size_t m = valid_keys.size();
  if (m < 2)
    fail("at least two key sequences are required");
  if (m > (std::size_t{1} << num_key_bits))
    fail("more sets than key sequences");
  for (auto s : partition)
    if (s >= m)
      fail("partition refers to a missing set");
  for (std::size_t i = 0; i < m; ++i) {
    if (valid_keys[i].size() != num_key_bits)
      fail("key sequence has the wrong width");
    for (std::size_t j = 0; j < i; ++j)
      if (valid_keys[i] == valid_keys[j])
        fail("key sequences must be distinct");
  }
}

KeyPlan make_key_plan(std::size_t v, std::size_t kb, std::size_t m, PlanStrategy strategy, std::uint64_t seed,
                      DontCarePolicy policy) {
  if (m < 2 || kb == 0 || kb > 16 || v > 16 || m > (std::size_t{1} << kb) || m > (std::size_t{1} << v))
    throw Error(ErrorCode::InfeasiblePlan, "cannot split " + std::to_string(std::size_t{1} << std::min<std::size_t>(v, 16)) +
                                               " patterns into " + std::to_string(m) + " sets with " +
                                               std::to_string(kb) + " key bits");
  Rng base(seed);
  KeyPlan plan;
  plan.num_inputs = v;
  plan.num_key_bits = kb;
  plan.policy = policy;
  const std::size_t patterns = std::size_t{1} << v;
  plan.partition.assign(patterns, 0);
  if (strategy == PlanStrategy::MsbSplit) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < m)
      ++bits;
    for (std::uint32_t x = 0; x < patterns; ++x)
      plan.partition[x] = static_cast<std::uint32_t>(std::min<std::size_t>(x >> (v - bits), m - 1));
  } else {
    Rng rng = base.split(2);
    std::vector<std::uint32_t> order(patterns);
    for (std::uint32_t x = 0; x < patterns; ++x)
      order[x] = x;
    rng.shuffle(order);
    for (std::size_t i = 0; i < patterns; ++i)
      plan.partition[order[i]] = static_cast<std::uint32_t>(i % m);
  }

  // All-zero and all-one keys are left out while enough others remain.
  const std::uint64_t space = std::uint64_t{1} << kb;
  std::vector<std::uint64_t> candidates;
  const bool exclude = space - 2 >= m;
  for (std::uint64_t k = 0; k < space; ++k)
    if (!exclude || (k != 0 && k != space - 1))
      candidates.push_back(k);
  Rng rng = base.split(1);
  rng.shuffle(candidates);
  for (std::size_t i = 0; i < m; ++i)
    plan.valid_keys.push_back(bits_of(candidates[i], kb));
  plan.validate();
  return plan;
}

// ---------------------------------------------------------------------------

namespace {

Tri flip(Tri t) { return t == Tri::DontCare ? t : (t == Tri::One ? Tri::Zero : Tri::One); }

std::vector<int> set_of_key(const KeyPlan &plan) {
  std::vector<int> set(std::size_t{1} << plan.num_key_bits, -1);
  for (std::size_t i = 0; i < plan.valid_keys.size(); ++i)
    set[bits_value(plan.valid_keys[i])] = static_cast<int>(i);
  return set;
}

bool depends_on(const TruthTable &tt, std::size_t o, std::size_t var) {
  const std::uint32_t bit = 1U << (tt.num_vars() - 1 - var);
  for (std::uint32_t m = 0; m < tt.size(); ++m) {
    if (m & bit)
      continue;
    Tri a = tt.at(o, m), b = tt.at(o, m | bit);
    if (a != Tri::DontCare && b != Tri::DontCare && a != b)
      return true;
  }
  return false;
}

LockNames complete_names(const LockNames &names, std::size_t kb, std::size_t v, std::size_t outs) {
  LockNames n = names;
  if (n.keys.empty())
    for (std::size_t i = 0; i < kb; ++i)
      n.keys.push_back("k" + std::to_string(i));
  if (n.inputs.empty())
    for (std::size_t i = 0; i < v; ++i)
      n.inputs.push_back("x" + std::to_string(i));
  if (n.outputs.empty())
    for (std::size_t i = 0; i < outs; ++i)
      n.outputs.push_back("y" + std::to_string(i));
  if (n.keys.size() != kb || n.inputs.size() != v || n.outputs.size() != outs)
    throw Error(ErrorCode::LengthMismatch, "lock names do not match the table shape");
  return n;
}

void resynthesize(LockedFunction &lf) {
  std::vector<std::string> vars = lf.key_names;
  vars.insert(vars.end(), lf.input_names.begin(), lf.input_names.end());
  lf.synth = synthesize(lf.table, vars, lf.output_names);
}

// Function actually computed by the network, over (key ++ input).
TruthTable realized(const LockedFunction &lf) {
  const Netlist &nl = lf.synth.network;
  std::vector<NetId> outs;
  for (const auto &n : lf.output_names)
    outs.push_back(*nl.find(n));
  std::vector<NetId> sup;
  for (const auto &n : lf.key_names)
    sup.push_back(*nl.find(n));
  for (const auto &n : lf.input_names)
    sup.push_back(*nl.find(n));
  return table_of_netlist(nl, outs, sup);
}

std::string join_names(const std::vector<std::string> &names) {
  std::string s;
  for (const auto &n : names)
    s += (s.empty() ? "" : ", ") + n;
  return s;
}

} // namespace

TruthTable locked_table(const TruthTable &original, const KeyPlan &plan) {
  plan.validate();
  if (original.num_vars() != plan.num_inputs)
    throw Error(ErrorCode::LengthMismatch, "table has " + std::to_string(original.num_vars()) +
                                               " inputs but the plan expects " + std::to_string(plan.num_inputs));
  const std::size_t kb = plan.num_key_bits, v = plan.num_inputs;
  if (kb + v > TruthTable::max_vars)
    throw Error(ErrorCode::SupportTooLarge, "key bits plus inputs exceed the table limit");
  TruthTable t(kb + v, original.num_outputs());
  auto set = set_of_key(plan);
  for (std::size_t o = 0; o < original.num_outputs(); ++o)
    for (std::uint32_t k = 0; k < (1U << kb); ++k)
      for (std::uint32_t x = 0; x < (1U << v); ++x) {
        Tri orig = original.at(o, x);
        Tri e;
        if (set[k] == static_cast<int>(plan.partition[x]))
          e = orig;
        else if (set[k] >= 0 || plan.policy == DontCarePolicy::Complement)
          e = flip(orig);
        else
          e = Tri::DontCare;
        t.set(o, (k << v) | x, e);
      }
  return t;
}

Bits LockedFunction::evaluate(const Bits &key, std::uint32_t x) const {
  const Netlist &nl = synth.network;
  if (key.size() != key_names.size())
    throw Error(ErrorCode::LengthMismatch, "key has the wrong width");
  std::map<std::string, bool> value;
  for (std::size_t i = 0; i < key.size(); ++i)
    value[key_names[i]] = key[i];
  Bits xb = bits_of(x, plan.num_inputs);
  for (std::size_t i = 0; i < xb.size(); ++i)
    value[input_names[i]] = xb[i];
  Bits pis, keys;
  for (NetId n : nl.primary_inputs())
    pis.push_back(value.at(nl.name(n)));
  for (NetId n : nl.key_inputs())
    keys.push_back(value.at(nl.name(n)));
  Bits all = simulate(nl, pis, keys);
  Bits out;
  for (const auto &n : output_names) {
    auto pos = std::find(nl.primary_outputs().begin(), nl.primary_outputs().end(), *nl.find(n));
    out.push_back(all[static_cast<std::size_t>(pos - nl.primary_outputs().begin())]);
  }
  return out;
}

std::vector<std::size_t> missing_input_dependencies(const LockedFunction &lf) {
  TruthTable r = realized(lf);
  std::vector<std::size_t> missing;
  const std::size_t kb = lf.plan.num_key_bits;
  for (std::size_t j = 0; j < lf.plan.num_inputs; ++j) {
    bool any = false;
    for (std::size_t o = 0; o < r.num_outputs() && !any; ++o)
      any = depends_on(r, o, kb + j);
    if (!any)
      missing.push_back(j);
  }
  return missing;
}

LockedFunction ensure_input_dependency(LockedFunction lf) {
  const std::size_t kb = lf.plan.num_key_bits, v = lf.plan.num_inputs;
  const std::size_t outs = lf.original.num_outputs();
  for (;;) {
    TruthTable r = realized(lf);
    // Variables nothing can be made to depend on are reported, not repaired.
    std::vector<std::string> cannot;
    for (std::size_t j = 0; j < v; ++j) {
      bool original_any = false;
      for (std::size_t o = 0; o < outs; ++o)
        original_any = original_any || depends_on(lf.original, o, j);
      if (!original_any)
        cannot.push_back(lf.input_names[j]);
    }
    if (!cannot.empty())
      throw Error(ErrorCode::CannotForceDependency,
                  "the function does not depend on input(s) " + join_names(cannot));

    // Every output must keep each input its original depends on.
    std::optional<std::pair<std::size_t, std::size_t>> gap;
    for (std::size_t o = 0; o < outs && !gap; ++o)
      for (std::size_t j = 0; j < v && !gap; ++j)
        if (depends_on(lf.original, o, j) && !depends_on(r, o, kb + j))
          gap = std::make_pair(o, j);
    if (!gap)
      return lf;

    auto [o, j] = *gap;
    const std::uint32_t bit = 1U << (v - 1 - j);
    const std::uint32_t xmask = (1U << v) - 1;
    bool done = false;
    // First choice: two don't-cares whose original values differ, pinned to
    // those values. Second: one don't-care pinned opposite its fixed partner.
    for (int pass = 0; pass < 2 && !done; ++pass) {
      for (std::uint32_t t = 0; t < lf.table.size() && !done; ++t) {
        if (t & bit)
          continue;
        std::uint32_t u = t | bit;
        Tri a = lf.table.at(o, t), b = lf.table.at(o, u);
        if (pass == 0) {
          Tri oa = lf.original.at(o, t & xmask), ob = lf.original.at(o, u & xmask);
          if (a == Tri::DontCare && b == Tri::DontCare && oa != Tri::DontCare && ob != Tri::DontCare && oa != ob) {
            lf.table.set(o, t, oa);
            lf.table.set(o, u, ob);
            lf.pinned.push_back(t);
            lf.pinned.push_back(u);
            done = true;
          }
        } else if ((a == Tri::DontCare) != (b == Tri::DontCare)) {
          if (a == Tri::DontCare) {
            lf.table.set(o, t, flip(b));
            lf.pinned.push_back(t);
          } else {
            lf.table.set(o, u, flip(a));
            lf.pinned.push_back(u);
          }
          done = true;
        }
      }
    }
    if (!done)
      throw Error(ErrorCode::CannotForceDependency, "no don't-care entry can make output " + lf.output_names[o] +
                                                        " depend on input " + lf.input_names[j]);
    resynthesize(lf);
  }
}

LockedFunction lock_function(const TruthTable &original, const KeyPlan &plan, const LockNames &names) {
  LockedFunction lf;
  lf.original = original;
  lf.plan = plan;
  lf.table = locked_table(original, plan);
  LockNames n = complete_names(names, plan.num_key_bits, plan.num_inputs, original.num_outputs());
  lf.key_names = n.keys;
  lf.input_names = n.inputs;
  lf.output_names = n.outputs;
  resynthesize(lf);
  return ensure_input_dependency(std::move(lf));
}

UniversalKeyCheck verify_no_universal_key(const LockedFunction &lf) {
  const std::size_t kb = lf.plan.num_key_bits, v = lf.plan.num_inputs;
  if (kb + v > 16)
    throw Error(ErrorCode::ScaleBound, "exhaustive key check is limited to 16 variables");
  TruthTable r = realized(lf);
  UniversalKeyCheck c;
  c.witnesses.assign(std::size_t{1} << kb, std::nullopt);
  c.correct_inputs.assign(std::size_t{1} << kb, 0);
  c.keys_correct_per_input.assign(std::size_t{1} << v, 0);
  for (std::uint32_t k = 0; k < (1U << kb); ++k) {
    for (std::uint32_t x = 0; x < (1U << v); ++x) {
      bool correct = true;
      for (std::size_t o = 0; o < lf.original.num_outputs() && correct; ++o) {
        Tri want = lf.original.at(o, x);
        if (want != Tri::DontCare)
          correct = r.at(o, (k << v) | x) == want;
      }
      if (correct) {
        ++c.correct_inputs[k];
        ++c.keys_correct_per_input[x];
      } else if (!c.witnesses[k]) {
        c.witnesses[k] = x;
      }
    }
    if (!c.witnesses[k])
      c.ok = false;
  }
  return c;
}

LockedFunction lock_function_checked(const TruthTable &original, KeyPlan plan, const LockNames &names) {
  LockedFunction lf = lock_function(original, plan, names);
  if (verify_no_universal_key(lf).ok)
    return lf;
  if (plan.policy == DontCarePolicy::DontCare) {
    plan.policy = DontCarePolicy::Complement;
    lf = lock_function(original, plan, names);
    if (verify_no_universal_key(lf).ok)
      return lf;
  }
  throw Error(ErrorCode::UniversalKeyGate, "every candidate lock admits a universal key");
}

// ---------------------------------------------------------------------------

KeyMemory build_key_memory(const KeyPlan &plan, const std::vector<std::string> &input_nets,
                           const std::vector<std::string> &key_inputs) {
  plan.validate();
  const std::size_t v = plan.num_inputs;
  if (input_nets.size() != v || key_inputs.size() != plan.num_key_bits)
    throw Error(ErrorCode::LengthMismatch, "key memory names do not match the plan");
  const std::uint32_t patterns = 1U << v;
  std::vector<std::uint64_t> key(patterns);
  for (std::uint32_t x = 0; x < patterns; ++x)
    key[x] = bits_value(plan.key_for(x));

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < v; ++j) {
    const std::uint32_t bit = 1U << (v - 1 - j);
    bool invariant = true;
    for (std::uint32_t x = 0; x < patterns && invariant; ++x)
      invariant = key[x] == key[x ^ bit];
    if (!invariant)
      kept.push_back(j);
  }

  KeyMemory mem;
  mem.key_inputs = key_inputs;
  for (std::size_t j : kept)
    mem.support.push_back(input_nets[j]);
  const std::size_t r = kept.size();
  for (std::uint32_t p = 0; p < (1U << r); ++p) {
    std::uint32_t x = 0;
    for (std::size_t i = 0; i < r; ++i)
      if ((p >> (r - 1 - i)) & 1U)
        x |= 1U << (v - 1 - kept[i]);
    mem.entries[bits_to_string(bits_of(p, r))] = bits_to_string(bits_of(key[x], plan.num_key_bits));
  }
  return mem;
}

Bits lookup_key(const KeyMemory &mem, const std::map<std::string, bool> &values) {
  std::string pattern;
  for (const auto &s : mem.support) {
    auto it = values.find(s);
    if (it == values.end())
      throw Error(ErrorCode::UnknownNet, "no value for support net '" + s + "'");
    pattern.push_back(it->second ? '1' : '0');
  }
  auto it = mem.entries.find(pattern);
  if (it == mem.entries.end())
    throw Error(ErrorCode::InvalidArgument, "key memory has no entry for '" + pattern + "'");
  return bits_from_string(it->second);
}

// ---------------------------------------------------------------------------

namespace {

// Builds multiplexer trees inside a Builder, sharing identical gates.
class MuxBuilder {
public:
  MuxBuilder(Netlist::Builder &b, std::string tie_source) : b_(b), tie_(std::move(tie_source)) {}

  struct Signal {
    int constant = -1; // 0 or 1 for constants
    std::string net;
  };

  // Drives `target` with the function `f` (MSB-first over `support`).
  void drive(const std::string &target, const std::vector<std::string> &support, const std::vector<bool> &f) {
    memo_.clear();
    Signal s = build(support, 0, f, target);
    if (s.constant >= 0) {
      b_.gate(GateKind::Buf, target, {constant(s.constant == 1)});
    } else if (s.net != target) {
      b_.gate(GateKind::Buf, target, {s.net});
    }
  }

private:
  std::string gate(GateKind kind, std::vector<std::string> ins, const std::string &target) {
    if (kind != GateKind::Not && kind != GateKind::Buf)
      std::sort(ins.begin(), ins.end());
    std::string key = std::to_string(static_cast<int>(kind));
    for (const auto &i : ins)
      key += "|" + i;
    if (auto it = strash_.find(key); it != strash_.end())
      return it->second;
    std::string name = target.empty() ? b_.fresh_name("mux") : target;
    b_.gate(kind, name, ins);
    strash_.emplace(key, name);
    return name;
  }

  std::string constant(bool v) {
    std::string n = gate(GateKind::Not, {tie_}, "");
    return gate(v ? GateKind::Or : GateKind::And, {tie_, n}, "");
  }

  Signal build(const std::vector<std::string> &support, std::size_t i, const std::vector<bool> &f,
               const std::string &target) {
    bool all0 = std::none_of(f.begin(), f.end(), [](bool x) { return x; });
    bool all1 = std::all_of(f.begin(), f.end(), [](bool x) { return x; });
    if (all0)
      return {0, {}};
    if (all1)
      return {1, {}};
    std::string key = std::to_string(i) + ":";
    for (bool x : f)
      key.push_back(x ? '1' : '0');
    if (target.empty())
      if (auto it = memo_.find(key); it != memo_.end())
        return it->second;
    const std::string &s = support[i];
    std::vector<bool> f0(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(f.size() / 2));
    std::vector<bool> f1(f.begin() + static_cast<std::ptrdiff_t>(f.size() / 2), f.end());
    Signal a = build(support, i + 1, f0, ""), c = build(support, i + 1, f1, "");
    Signal out;
    auto same = [](const Signal &x, const Signal &y) { return x.constant == y.constant && x.net == y.net; };
    if (same(a, c)) {
      out = a;
    } else if (a.constant == 0 && c.constant == 1) {
      out.net = s;
    } else if (a.constant == 1 && c.constant == 0) {
      out.net = gate(GateKind::Not, {s}, target);
    } else if (a.constant == 0) {
      out.net = gate(GateKind::And, {s, c.net}, target);
    } else if (c.constant == 0) {
      out.net = gate(GateKind::And, {gate(GateKind::Not, {s}, ""), a.net}, target);
    } else if (a.constant == 1) {
      out.net = gate(GateKind::Or, {gate(GateKind::Not, {s}, ""), c.net}, target);
    } else if (c.constant == 1) {
      out.net = gate(GateKind::Or, {s, a.net}, target);
    } else {
      std::string lo = gate(GateKind::And, {gate(GateKind::Not, {s}, ""), a.net}, "");
      std::string hi = gate(GateKind::And, {s, c.net}, "");
      out.net = gate(GateKind::Or, {lo, hi}, target);
    }
    memo_[key] = out;
    return out;
  }

  Netlist::Builder &b_;
  std::string tie_;
  std::unordered_map<std::string, std::string> strash_;
  std::unordered_map<std::string, Signal> memo_;
};

} // namespace

Netlist activate(const Netlist &locked, const std::vector<KeyMemory> &memory, bool partial) {
  std::unordered_map<std::string, int> covered;
  for (NetId k : locked.key_inputs())
    covered[locked.name(k)] = 0;
  for (const auto &mem : memory) {
    for (const auto &k : mem.key_inputs) {
      auto it = covered.find(k);
      if (it == covered.end())
        throw Error(ErrorCode::InvalidArgument, "key memory drives '" + k + "', which is not a key input");
      if (++it->second > 1)
        throw Error(ErrorCode::InvalidArgument, "key input '" + k + "' is driven by more than one memory block");
    }
    for (const auto &s : mem.support) {
      auto id = locked.find(s);
      if (!id)
        throw Error(ErrorCode::UnknownNet, "key memory support net '" + s + "' is not in the netlist");
      if (covered.contains(s))
        throw Error(ErrorCode::InvalidArgument, "key memory support cannot include key input '" + s + "'");
    }
    if (mem.entries.size() != (std::size_t{1} << mem.support.size()))
      throw Error(ErrorCode::InvalidArgument, "key memory is not total on its support");
  }
  for (const auto &[name, count] : covered)
    if (count == 0 && !partial)
      throw Error(ErrorCode::InvalidArgument, "key input '" + name + "' is not covered by the key memory");

  Netlist::Builder b;
  for (NetId i : locked.primary_inputs())
    b.input(locked.name(i));
  for (NetId k : locked.key_inputs())
    if (covered[locked.name(k)] == 0)
      b.input(locked.name(k));
  for (NetId o : locked.primary_outputs())
    b.output(locked.name(o));
  for (const Gate &g : locked.gates()) {
    std::vector<std::string> ins;
    for (NetId n : g.inputs)
      ins.push_back(locked.name(n));
    b.gate(g.kind, locked.name(g.output), ins);
  }
  if (!memory.empty() && locked.primary_inputs().empty())
    throw Error(ErrorCode::InvalidArgument, "activation needs at least one primary input");
  MuxBuilder mux(b, memory.empty() ? std::string() : locked.name(locked.primary_inputs()[0]));
  for (const auto &mem : memory) {
    const std::size_t r = mem.support.size();
    for (std::size_t bit = 0; bit < mem.key_inputs.size(); ++bit) {
      std::vector<bool> f(std::size_t{1} << r);
      for (std::uint32_t p = 0; p < f.size(); ++p) {
        const std::string &key = mem.entries.at(bits_to_string(bits_of(p, r)));
        if (key.size() != mem.key_inputs.size())
          throw Error(ErrorCode::LengthMismatch, "key memory entry has the wrong width");
        f[p] = key[bit] == '1';
      }
      mux.drive(mem.key_inputs[bit], mem.support, f);
    }
  }
  return b.build();
}

} // namespace sublock
