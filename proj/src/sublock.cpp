#include "sublock.hpp"

#include "attack.hpp"
#include "miter.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <unordered_set>

namespace sublock {

namespace {

// Cone function over `support` by local word simulation (support <= 6).
std::uint64_t cone_word(const Netlist &nl, const std::vector<std::size_t> &gates, const std::vector<NetId> &support,
                        std::unordered_map<NetId, std::uint64_t> &val) {
  val.clear();
  auto words = exhaustive_words(support.size(), 0);
  for (std::size_t i = 0; i < support.size(); ++i)
    val[support[i]] = words[i];
  std::vector<std::uint64_t> args;
  NetId out = 0;
  for (std::size_t g : gates) {
    const Gate &gate = nl.gates()[g];
    args.clear();
    for (NetId in : gate.inputs)
      args.push_back(val.at(in));
    val[gate.output] = eval_gate_word(gate.kind, args);
    out = gate.output;
  }
  return val.at(out);
}

bool depends_on_all(std::uint64_t f, std::size_t vars) {
  const std::uint64_t lanes = std::uint64_t{1} << vars;
  for (std::size_t i = 0; i < vars; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << (vars - 1 - i);
    bool dep = false;
    for (std::uint64_t m = 0; m < lanes && !dep; ++m)
      dep = ((f >> m) & 1U) != ((f >> (m ^ bit)) & 1U);
    if (!dep)
      return false;
  }
  return true;
}

// Copies every gate of `nl` except those in `skip` into `b`.
void copy_gates(Netlist::Builder &b, const Netlist &nl, const std::unordered_set<std::size_t> &skip) {
  for (std::size_t g = 0; g < nl.gates().size(); ++g) {
    if (skip.contains(g))
      continue;
    const Gate &gate = nl.gates()[g];
    std::vector<std::string> ins;
    for (NetId n : gate.inputs)
      ins.push_back(nl.name(n));
    b.gate(gate.kind, nl.name(gate.output), ins);
  }
}

void declare_interface(Netlist::Builder &b, const Netlist &nl) {
  for (NetId i : nl.primary_inputs())
    b.input(nl.name(i));
  for (NetId k : nl.key_inputs())
    b.input(nl.name(k));
  for (NetId o : nl.primary_outputs())
    b.output(nl.name(o));
}

std::string key_name(std::size_t i) { return "keyinput" + std::to_string(i); }

std::vector<std::uint64_t> random_words(Rng &rng, std::size_t count) {
  std::vector<std::uint64_t> w(count);
  for (auto &x : w)
    x = rng.next();
  return w;
}

} // namespace

std::vector<CutCandidate> enumerate_cuts(const Netlist &nl, const std::set<std::size_t> &support_sizes) {
  std::vector<CutCandidate> cuts;
  if (support_sizes.empty())
    return cuts;
  for (std::size_t s : support_sizes)
    if (s < 2 || s > 6)
      throw Error(ErrorCode::InvalidArgument, "cut sizes must be between 2 and 6");
  const std::size_t max_size = *support_sizes.rbegin();
  std::unordered_map<NetId, std::uint64_t> scratch;

  for (std::size_t root_gate = 0; root_gate < nl.gates().size(); ++root_gate) {
    std::set<std::size_t> cone{root_gate};
    std::set<NetId> leaves(nl.gates()[root_gate].inputs.begin(), nl.gates()[root_gate].inputs.end());
    if (leaves.size() > max_size)
      continue;
    for (;;) {
      std::optional<NetId> best;
      std::size_t best_size = 0;
      for (NetId leaf : leaves) {
        auto d = nl.driver(leaf);
        if (!d || nl.is_primary_output(leaf))
          continue;
        bool inside = true;
        for (auto f : nl.fanout(leaf))
          inside = inside && cone.contains(f);
        if (!inside)
          continue;
        std::set<NetId> grown = leaves;
        grown.erase(leaf);
        grown.insert(nl.gates()[*d].inputs.begin(), nl.gates()[*d].inputs.end());
        if (grown.size() <= max_size && (!best || grown.size() < best_size)) {
          best = leaf;
          best_size = grown.size();
        }
      }
      if (!best)
        break;
      std::size_t d = *nl.driver(*best);
      cone.insert(d);
      leaves.erase(*best);
      leaves.insert(nl.gates()[d].inputs.begin(), nl.gates()[d].inputs.end());
    }
    if (!support_sizes.contains(leaves.size()))
      continue;
    CutCandidate c;
    c.root = nl.gates()[root_gate].output;
    c.support.assign(leaves.begin(), leaves.end());
    c.gates.assign(cone.begin(), cone.end());
    if (!depends_on_all(cone_word(nl, c.gates, c.support, scratch), c.support.size()))
      continue;
    cuts.push_back(std::move(c));
  }
  std::sort(cuts.begin(), cuts.end(), [](const CutCandidate &a, const CutCandidate &b) { return a.root < b.root; });
  return cuts;
}

double fault_impact(const Netlist &nl, NetId net, std::size_t samples, std::uint64_t seed) {
  if (net >= nl.num_nets())
    throw Error(ErrorCode::UnknownNet, "unknown net id " + std::to_string(net));
  if (samples == 0)
    throw Error(ErrorCode::InvalidArgument, "fault impact needs at least one sample");
  const std::size_t n = nl.primary_inputs().size(), k = nl.key_inputs().size();
  const bool exhaustive = n + k < 63 && (std::uint64_t{1} << (n + k)) <= samples;
  const std::uint64_t total = exhaustive ? (std::uint64_t{1} << (n + k)) : samples;
  Rng rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t block = 0; block * 64 < total; ++block) {
    std::vector<std::uint64_t> words = exhaustive ? exhaustive_words(n + k, block) : random_words(rng, n + k);
    std::span<const std::uint64_t> pw(words.data(), n), kw(words.data() + n, k);
    auto good = simulate_words(nl, pw, kw);
    auto bad = simulate_words(nl, pw, kw, NetOverride{net, ~good[net]});
    std::uint64_t diff = 0;
    for (NetId o : nl.primary_outputs())
      diff |= good[o] ^ bad[o];
    std::uint64_t lanes = std::min<std::uint64_t>(64, total - block * 64);
    if (lanes < 64)
      diff &= (std::uint64_t{1} << lanes) - 1;
    hits += static_cast<std::uint64_t>(std::popcount(diff));
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::size_t default_fault_samples(const Netlist &nl) {
  std::size_t n = nl.primary_inputs().size() + nl.key_inputs().size();
  return n <= 16 ? (std::size_t{1} << n) : 10000;
}

const char *to_string(SelectStrategy s) { return s == SelectStrategy::Random ? "random" : "fault-impact"; }

std::vector<CutCandidate> select_cuts(const Netlist &nl, const std::vector<CutCandidate> &cands,
                                      std::size_t budget_key_bits, std::size_t kb, SelectStrategy strategy,
                                      std::uint64_t seed) {
  if (kb == 0 || budget_key_bits % kb != 0)
    throw Error(ErrorCode::InvalidArgument, "key budget " + std::to_string(budget_key_bits) +
                                                " is not a multiple of " + std::to_string(kb) + " bits per lock");
  const std::size_t want = budget_key_bits / kb;
  if (want == 0)
    return {};
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  if (strategy == SelectStrategy::Random) {
    Rng rng(seed);
    rng.shuffle(order);
  } else {
    std::vector<double> impact(cands.size());
    const std::size_t samples = default_fault_samples(nl);
    for (std::size_t i = 0; i < cands.size(); ++i)
      impact[i] = fault_impact(nl, cands[i].root, samples, seed);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (impact[a] != impact[b])
        return impact[a] > impact[b];
      return cands[a].root < cands[b].root;
    });
  }
  std::vector<CutCandidate> picked;
  std::unordered_set<std::size_t> used;
  std::size_t reachable = 0;
  for (std::size_t i : order) {
    const auto &c = cands[i];
    if (std::any_of(c.gates.begin(), c.gates.end(), [&](std::size_t g) { return used.contains(g); }))
      continue;
    used.insert(c.gates.begin(), c.gates.end());
    ++reachable;
    if (picked.size() < want)
      picked.push_back(c);
  }
  if (picked.size() < want)
    throw InsufficientCandidates(want, reachable);
  std::sort(picked.begin(), picked.end(), [](const CutCandidate &a, const CutCandidate &b) { return a.root < b.root; });
  return picked;
}

// ---------------------------------------------------------------------------

namespace {

struct Built {
  Netlist locked;
  std::vector<KeyMemory> memory;
};

Built splice(const Netlist &nl, const std::vector<CutCandidate> &cuts, const LockConfig &cfg,
             const std::map<NetId, DontCarePolicy> &policy) {
  const Rng master(cfg.seed);
  std::unordered_set<std::size_t> removed;
  for (const auto &c : cuts)
    removed.insert(c.gates.begin(), c.gates.end());

  Netlist::Builder b;
  declare_interface(b, nl);
  std::size_t keys = 0;
  for (std::size_t i = 0; i < cuts.size(); ++i)
    for (std::size_t j = 0; j < cfg.key_bits_per_lock; ++j)
      b.input(key_name(keys++));
  copy_gates(b, nl, removed);

  Built out;
  keys = 0;
  for (const auto &c : cuts) {
    TruthTable f = table_of_netlist(nl, {c.root}, c.support);
    std::uint64_t lock_seed = master.split(0x10000 + c.root).next();
    auto plan = make_key_plan(c.support.size(), cfg.key_bits_per_lock, cfg.sets_per_lock, cfg.plan_strategy, lock_seed,
                              policy.at(c.root));
    LockNames names;
    for (std::size_t j = 0; j < cfg.key_bits_per_lock; ++j)
      names.keys.push_back(key_name(keys++));
    for (NetId s : c.support)
      names.inputs.push_back(nl.name(s));
    names.outputs.push_back(nl.name(c.root));
    LockedFunction lf = lock_function_checked(f, plan, names);

    const Netlist &net = lf.synth.network;
    std::map<std::string, std::string> rename;
    for (NetId i : net.primary_inputs())
      rename[net.name(i)] = net.name(i);
    for (NetId i : net.key_inputs())
      rename[net.name(i)] = net.name(i);
    const std::string &root = nl.name(c.root);
    for (const Gate &g : net.gates()) {
      const std::string &gn = net.name(g.output);
      rename[gn] = gn == root ? root : b.fresh_name(root + "_L");
    }
    for (const Gate &g : net.gates()) {
      std::vector<std::string> ins;
      for (NetId in : g.inputs)
        ins.push_back(rename.at(net.name(in)));
      b.gate(g.kind, rename.at(net.name(g.output)), ins);
    }
    out.memory.push_back(build_key_memory(lf.plan, names.inputs, names.keys));
  }
  out.locked = b.build();
  return out;
}

} // namespace

LockResult lock_design(const Netlist &nl, const LockConfig &cfg) {
  if (!nl.key_inputs().empty())
    throw Error(ErrorCode::InvalidArgument, "the design is already locked");
  for (NetId i : nl.primary_inputs())
    if (is_key_input_name(nl.name(i)))
      throw Error(ErrorCode::InvalidArgument, "net name '" + nl.name(i) + "' collides with key input naming");
  LockResult result;
  result.report.seed = cfg.seed;
  if (cfg.budget_key_bits == 0) {
    result.locked = nl;
    return result;
  }
  if (cfg.key_bits_per_lock == 0 || cfg.budget_key_bits % cfg.key_bits_per_lock != 0)
    throw Error(ErrorCode::InvalidArgument, "key budget must be a multiple of the key bits per lock");

  const Rng master(cfg.seed);
  std::vector<CutCandidate> cands = enumerate_cuts(nl, cfg.support_sizes);
  if (!cfg.roots.empty()) {
    std::vector<CutCandidate> kept;
    for (const std::string &name : cfg.roots) {
      NetId id = nl.find(name).value_or(nl.num_nets());
      if (id == nl.num_nets())
        throw Error(ErrorCode::InvalidArgument, "unknown root net '" + name + "'");
      auto it = std::find_if(cands.begin(), cands.end(), [&](const CutCandidate &c) { return c.root == id; });
      if (it == cands.end())
        throw Error(ErrorCode::InvalidArgument, "no lockable cut is rooted at '" + name + "'");
      kept.push_back(*it);
    }
    cands = std::move(kept);
  }
  std::set<NetId> excluded;
  std::map<NetId, DontCarePolicy> policy;
  Built built;
  std::vector<CutCandidate> cuts;
  for (int round = 0;; ++round) {
    std::vector<CutCandidate> pool;
    for (const auto &c : cands)
      if (!excluded.contains(c.root))
        pool.push_back(c);
    cuts = select_cuts(nl, pool, cfg.budget_key_bits, cfg.key_bits_per_lock, cfg.strategy, master.split(1).next());
    for (const auto &c : cuts)
      policy.try_emplace(c.root, cfg.dontcare_policy);
    built = splice(nl, cuts, cfg, policy);

    Netlist active = activate(built.locked, built.memory);
    if (!check_equivalence(active, {}, nl, {}).equivalent)
      throw Error(ErrorCode::EquivalenceFailure, "activated design differs from the original");

    // A key that unlocks every input means some lock is transparent in
    // context; find which and change it.
    if (!find_universal_key(built.locked, nl))
      break;
    if (round >= 16)
      throw Error(ErrorCode::UniversalKeyGate, "could not build a design lock without a universal key");
    bool changed = false;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      std::vector<KeyMemory> others;
      for (std::size_t j = 0; j < cuts.size(); ++j)
        if (j != i)
          others.push_back(built.memory[j]);
      if (!find_universal_key(activate(built.locked, others, true), nl))
        continue;
      NetId root = cuts[i].root;
      if (policy[root] == DontCarePolicy::DontCare)
        policy[root] = DontCarePolicy::Complement;
      else
        excluded.insert(root);
      changed = true;
    }
    if (!changed)
      excluded.insert(cuts.front().root);
  }

  result.locked = std::move(built.locked);
  result.memory = std::move(built.memory);
  LockReport &r = result.report;
  r.num_locks = cuts.size();
  r.key_bits_total = result.locked.key_inputs().size();
  r.gate_delta = static_cast<long>(result.locked.gates().size()) - static_cast<long>(nl.gates().size());
  r.literal_delta = static_cast<long>(pin_count(result.locked)) - static_cast<long>(pin_count(nl));
  r.depth_delta = static_cast<long>(logic_depth(result.locked)) - static_cast<long>(logic_depth(nl));
  for (const auto &c : cuts)
    r.roots.push_back(nl.name(c.root));
  r.corruption = corruption_report(result.locked, result.memory, cfg.corruption_trials, master.split(2).next());
  return result;
}

// ---------------------------------------------------------------------------

BaselineLock lock_xor_baseline(const Netlist &nl, std::size_t num_keys, std::uint64_t seed) {
  if (!nl.key_inputs().empty())
    throw Error(ErrorCode::InvalidArgument, "the design is already locked");
  if (num_keys > nl.gates().size())
    throw Error(ErrorCode::InvalidArgument, "more key gates requested than gates in the design");
  Rng rng(seed);
  std::vector<std::size_t> order(nl.gates().size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  rng.shuffle(order);
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(num_keys));
  std::sort(chosen.begin(), chosen.end());

  BaselineLock out;
  Netlist::Builder b;
  declare_interface(b, nl);
  for (std::size_t i = 0; i < num_keys; ++i)
    b.input(key_name(i));
  std::unordered_set<std::size_t> skip(chosen.begin(), chosen.end());
  copy_gates(b, nl, skip);
  for (std::size_t i = 0; i < num_keys; ++i) {
    const Gate &g = nl.gates()[chosen[i]];
    const std::string &name = nl.name(g.output);
    std::string pre = b.fresh_name(name + "_pre");
    std::vector<std::string> ins;
    for (NetId n : g.inputs)
      ins.push_back(nl.name(n));
    b.gate(g.kind, pre, ins);
    bool bit = rng.coin();
    b.gate(bit ? GateKind::Xnor : GateKind::Xor, name, {pre, key_name(i)});
    out.correct_key.push_back(bit);
  }
  out.locked = b.build();
  return out;
}

BaselineLock lock_antisat_baseline(const Netlist &nl, std::size_t num_keys, std::uint64_t seed) {
  if (!nl.key_inputs().empty())
    throw Error(ErrorCode::InvalidArgument, "the design is already locked");
  if (num_keys == 0 || num_keys % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "the Anti-SAT block needs a positive even key count");
  const std::size_t n = num_keys / 2;
  if (n > nl.primary_inputs().size())
    throw Error(ErrorCode::InvalidArgument, "the Anti-SAT block needs " + std::to_string(n) + " primary inputs");
  std::vector<std::size_t> targets;
  for (std::size_t g = 0; g < nl.gates().size(); ++g)
    if (nl.is_primary_output(nl.gates()[g].output))
      targets.push_back(g);
  if (targets.empty())
    throw Error(ErrorCode::InvalidArgument, "no gate-driven output to attach the Anti-SAT block to");

  Rng rng(seed);
  std::vector<std::size_t> pis(nl.primary_inputs().size());
  for (std::size_t i = 0; i < pis.size(); ++i)
    pis[i] = i;
  rng.shuffle(pis);
  pis.resize(n);
  std::sort(pis.begin(), pis.end());
  const std::size_t target = targets[rng.below(targets.size())];

  Netlist::Builder b;
  declare_interface(b, nl);
  for (std::size_t i = 0; i < num_keys; ++i)
    b.input(key_name(i));
  copy_gates(b, nl, {target});

  auto tree = [&](std::vector<std::string> level, bool negate, const std::string &base) {
    while (level.size() > 1) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
        bool last = level.size() == 2;
        std::string o = b.fresh_name(base);
        b.gate(last && negate ? GateKind::Nand : GateKind::And, o, {level[i], level[i + 1]});
        next.push_back(o);
      }
      if (level.size() % 2)
        next.push_back(level.back());
      level = std::move(next);
    }
    if (negate && n == 1) {
      std::string o = b.fresh_name(base);
      b.gate(GateKind::Not, o, {level[0]});
      return o;
    }
    return level[0];
  };
  std::vector<std::string> xa, xb;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string &x = nl.name(nl.primary_inputs()[pis[i]]);
    xa.push_back(b.fresh_name("as_a"));
    b.gate(GateKind::Xor, xa.back(), {x, key_name(i)});
    xb.push_back(b.fresh_name("as_b"));
    b.gate(GateKind::Xor, xb.back(), {x, key_name(n + i)});
  }
  std::string g = tree(xa, false, "as_g");
  std::string gbar = tree(xb, true, "as_gb");
  std::string flip = b.fresh_name("as_out");
  b.gate(GateKind::And, flip, {g, gbar});

  const Gate &t = nl.gates()[target];
  const std::string &name = nl.name(t.output);
  std::string pre = b.fresh_name(name + "_pre");
  std::vector<std::string> ins;
  for (NetId in : t.inputs)
    ins.push_back(nl.name(in));
  b.gate(t.kind, pre, ins);
  b.gate(GateKind::Xor, name, {pre, flip});

  BaselineLock out;
  out.locked = b.build();
  Bits half;
  for (std::size_t i = 0; i < n; ++i)
    half.push_back(rng.coin());
  out.correct_key = half;
  out.correct_key.insert(out.correct_key.end(), half.begin(), half.end());
  return out;
}

// ---------------------------------------------------------------------------

double corruption_report(const Netlist &locked, const std::vector<KeyMemory> &memory, std::size_t trials,
                         std::uint64_t seed) {
  if (trials == 0)
    throw Error(ErrorCode::InvalidArgument, "corruption needs at least one trial");
  const std::size_t n = locked.primary_inputs().size(), k = locked.key_inputs().size();
  if (k == 0)
    return 0.0;
  Netlist active = activate(locked, memory);
  std::vector<NetId> key_nets;
  for (NetId id : locked.key_inputs())
    key_nets.push_back(active.id(locked.name(id)));
  std::vector<NetId> outs_active;
  for (NetId o : locked.primary_outputs())
    outs_active.push_back(active.id(locked.name(o)));

  const bool exhaustive = n + k < 63 && (std::uint64_t{1} << (n + k)) <= trials;
  const std::uint64_t total = exhaustive ? (std::uint64_t{1} << (n + k)) : trials;
  Rng rng(seed);
  std::uint64_t wrong = 0, differ = 0;
  for (std::uint64_t block = 0; block * 64 < total; ++block) {
    std::vector<std::uint64_t> words = exhaustive ? exhaustive_words(n + k, block) : random_words(rng, n + k);
    std::vector<std::uint64_t> pw(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<std::uint64_t> kw(words.begin() + static_cast<std::ptrdiff_t>(n), words.end());
    auto ref = simulate_words(active, pw, {});
    std::uint64_t lanes = std::min<std::uint64_t>(64, total - block * 64);
    std::uint64_t mask = lanes < 64 ? (std::uint64_t{1} << lanes) - 1 : ~std::uint64_t{0};
    auto same_key = [&] {
      std::uint64_t same = ~std::uint64_t{0};
      for (std::size_t i = 0; i < k; ++i)
        same &= ~(kw[i] ^ ref[key_nets[i]]);
      return same & mask;
    };
    std::uint64_t valid = mask;
    if (exhaustive) {
      valid &= ~same_key();
    } else {
      // Redraw lanes that happened to get the correct key.
      for (std::uint64_t same = same_key(); same; same = same_key())
        for (std::size_t i = 0; i < k; ++i)
          kw[i] = (kw[i] & ~same) | (rng.next() & same);
    }
    auto got = simulate_words(locked, pw, kw);
    std::uint64_t diff = 0;
    for (std::size_t o = 0; o < outs_active.size(); ++o)
      diff |= got[locked.primary_outputs()[o]] ^ ref[outs_active[o]];
    wrong += static_cast<std::uint64_t>(std::popcount(valid));
    differ += static_cast<std::uint64_t>(std::popcount(diff & valid));
  }
  return wrong == 0 ? 0.0 : static_cast<double>(differ) / static_cast<double>(wrong);
}

} // namespace sublock
