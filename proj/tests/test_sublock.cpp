#include "attack.hpp"
#include "sublock.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace sublock;
using testing_support::RawCircuit;
using testing_support::RawGate;
using testing_support::raw_of;

namespace {

Netlist bench(const std::string &name) { return read_bench_file(std::string(SUBLOCK_BENCH_DIR) + "/" + name); }
Netlist fixture(const std::string &name) { return read_bench_file(std::string(SUBLOCK_TEST_DATA) + "/" + name); }

// Evaluates a locked netlist by name, fetching each key bit from the memory
// block that drives it. Support nets may themselves sit behind other locks.
class KeyedEval {
public:
  KeyedEval(const Netlist &locked, const std::vector<KeyMemory> &mem) : c_(raw_of(locked)), mem_(mem) {
    for (auto &g : c_.gates)
      drv_[g.out] = &g;
    for (std::size_t b = 0; b < mem.size(); ++b)
      for (std::size_t j = 0; j < mem[b].key_inputs.size(); ++j)
        key_[mem[b].key_inputs[j]] = {b, j};
    npi_ = locked.primary_inputs().size();
  }

  std::vector<bool> operator()(const std::vector<bool> &x) {
    val_.clear();
    for (std::size_t i = 0; i < npi_; ++i)
      val_[c_.inputs[i]] = x[i];
    std::vector<bool> out;
    for (auto &o : c_.outputs)
      out.push_back(value(o));
    return out;
  }

private:
  bool value(const std::string &n) {
    if (auto it = val_.find(n); it != val_.end())
      return it->second;
    bool r;
    if (auto k = key_.find(n); k != key_.end()) {
      const KeyMemory &m = mem_[k->second.first];
      std::map<std::string, bool> sv;
      for (auto &s : m.support)
        sv[s] = value(s);
      r = lookup_key(m, sv)[k->second.second];
    } else {
      RawCircuit one;
      const RawGate &g = *drv_.at(n);
      std::vector<bool> a;
      for (auto &i : g.in) {
        one.inputs.push_back(i);
        a.push_back(value(i));
      }
      one.outputs.push_back(g.out);
      one.gates.push_back(g);
      r = one.eval(a)[0];
    }
    val_[n] = r;
    return r;
  }

  RawCircuit c_;
  const std::vector<KeyMemory> &mem_;
  std::map<std::string, const RawGate *> drv_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> key_;
  std::map<std::string, bool> val_;
  std::size_t npi_ = 0;
};

std::vector<bool> random_bits(Rng &rng, std::size_t n) {
  std::vector<bool> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = rng.coin();
  return x;
}

// Checks activation by the keyed evaluator against the original, exhaustively
// up to 14 inputs and on `samples` random patterns beyond.
void check_activation(const Netlist &original, const LockResult &r, std::size_t samples = 2000) {
  RawCircuit ref = raw_of(original);
  KeyedEval keyed(r.locked, r.memory);
  const std::size_t n = original.primary_inputs().size();
  if (n <= 14) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      auto x = testing_support::bits_of_index(m, n);
      REQUIRE(keyed(x) == ref.eval(x));
    }
  } else {
    Rng rng(99);
    for (std::size_t t = 0; t < samples; ++t) {
      auto x = random_bits(rng, n);
      REQUIRE(keyed(x) == ref.eval(x));
    }
  }
}

std::set<std::size_t> gate_set(const CutCandidate &c) { return {c.gates.begin(), c.gates.end()}; }

// Cut legality straight from the definition.
void check_cut(const Netlist &nl, const CutCandidate &c) {
  auto inside = gate_set(c);
  REQUIRE(nl.driver(c.root).has_value());
  CHECK(inside.contains(*nl.driver(c.root)));
  std::set<NetId> produced;
  for (auto g : inside)
    produced.insert(nl.gates()[g].output);
  for (auto g : inside) {
    NetId out = nl.gates()[g].output;
    if (out == c.root)
      continue;
    CHECK_FALSE(nl.is_primary_output(out));
    for (auto f : nl.fanout(out))
      CHECK(inside.contains(f));
  }
  // Leaves are exactly the cone inputs not produced inside.
  std::set<NetId> leaves;
  for (auto g : inside)
    for (NetId in : nl.gates()[g].inputs)
      if (!produced.contains(in))
        leaves.insert(in);
  CHECK(std::vector<NetId>(leaves.begin(), leaves.end()) == c.support);
}

} // namespace

TEST_CASE("cuts of the five-input Y circuit") {
  Netlist nl = fixture("y_cut.bench");
  auto cuts = enumerate_cuts(nl, {3, 4});
  bool found = false;
  for (auto &c : cuts) {
    check_cut(nl, c);
    if (nl.name(c.root) == "Y") {
      found = true;
      std::vector<std::string> names;
      for (NetId s : c.support)
        names.push_back(nl.name(s));
      std::sort(names.begin(), names.end());
      CHECK(names == std::vector<std::string>{"c", "d", "e"});
      CHECK(c.gates.size() == 3);
    }
  }
  CHECK(found);
  for (std::size_t i = 1; i < cuts.size(); ++i)
    CHECK(cuts[i - 1].root < cuts[i].root);
}

TEST_CASE("cuts that cannot exist") {
  Netlist and2 = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
  CHECK(enumerate_cuts(and2, {3, 4}).empty());
  Netlist ha = parse_bench("INPUT(A)\nINPUT(B)\nOUTPUT(S)\nOUTPUT(C)\nS = XOR(A, B)\nC = AND(A, B)\n");
  CHECK(enumerate_cuts(ha, {3}).empty());
  CHECK(enumerate_cuts(ha, {2}).size() == 2);
}

TEST_CASE("cuts of the benchmarks are legal") {
  for (const char *name : {"c17.bench", "c432.bench", "c499.bench", "c880.bench"}) {
    Netlist nl = bench(name);
    auto cuts = enumerate_cuts(nl, {3, 4});
    CHECK_FALSE(cuts.empty());
    for (auto &c : cuts) {
      check_cut(nl, c);
      CHECK((c.support.size() == 3 || c.support.size() == 4));
    }
  }
}

TEST_CASE("fault impact") {
  Netlist ha = parse_bench("INPUT(A)\nINPUT(B)\nINPUT(U)\nOUTPUT(S)\nOUTPUT(C)\n"
                           "S = XOR(A, B)\nC = AND(A, B)\nd = NOT(U)\n");
  CHECK(fault_impact(ha, ha.id("S"), 8, 1) == 1.0);
  CHECK(fault_impact(ha, ha.id("d"), 8, 1) == 0.0);
  CHECK(fault_impact(ha, ha.id("U"), 8, 1) == 0.0);
  CHECK(fault_impact(ha, ha.id("A"), 8, 1) == 1.0);
  // B feeds C and S; flipping it always changes S.
  CHECK(fault_impact(ha, ha.id("B"), 1000, 1) == 1.0);
  CHECK_THROWS_AS(fault_impact(ha, 1000, 8, 1), Error);

  // Exhaustive count by hand on c17 for every net.
  Netlist c17 = bench("c17.bench");
  RawCircuit raw = raw_of(c17);
  for (NetId net = 0; net < c17.num_nets(); ++net) {
    std::size_t hits = 0;
    for (std::uint64_t m = 0; m < 32; ++m) {
      auto x = testing_support::bits_of_index(m, 5);
      auto good = raw.eval(x);
      // Flip the net by rewriting its driver (or the input) as its complement.
      RawCircuit bad = raw;
      const std::string &n = c17.name(net);
      std::vector<bool> xb = x;
      bool is_pi = false;
      for (std::size_t i = 0; i < 5; ++i)
        if (raw.inputs[i] == n) {
          is_pi = true;
          // Route readers through an inverter of the input.
          for (auto &g : bad.gates)
            for (auto &in : g.in)
              if (in == n)
                in = n + "_flip";
          bad.gates.insert(bad.gates.begin(), RawGate{"NOT", n + "_flip", {n}});
          for (auto &o : bad.outputs)
            if (o == n)
              o = n + "_flip";
        }
      if (!is_pi) {
        for (auto &g : bad.gates)
          if (g.out == n)
            g.out = n + "_good";
        bad.gates.push_back(RawGate{"NOT", n, {n + "_good"}});
      }
      hits += bad.eval(xb) != good;
    }
    CHECK(fault_impact(c17, net, 32, 5) == doctest::Approx(hits / 32.0));
  }
}

TEST_CASE("selecting cuts") {
  Netlist c17 = bench("c17.bench");
  auto cands = enumerate_cuts(c17, {3, 4});
  for (auto strategy : {SelectStrategy::Random, SelectStrategy::FaultImpact}) {
    auto a = select_cuts(c17, cands, 4, 2, strategy, 3);
    auto b = select_cuts(c17, cands, 4, 2, strategy, 3);
    CHECK(a == b);
    REQUIRE(a.size() == 2);
    auto ga = gate_set(a[0]);
    for (auto g : a[1].gates)
      CHECK_FALSE(ga.contains(g));
  }
  CHECK(select_cuts(c17, cands, 0, 2, SelectStrategy::Random, 3).empty());
  CHECK_THROWS_AS(select_cuts(c17, cands, 3, 2, SelectStrategy::Random, 3), Error);

  // The most disjoint cuts any order can reach, by exhaustive search.
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1U << cands.size()); ++mask) {
    std::set<std::size_t> used;
    bool ok = true;
    for (std::size_t i = 0; i < cands.size() && ok; ++i)
      if (mask >> i & 1U)
        for (auto g : cands[i].gates)
          ok = ok && used.insert(g).second;
    if (ok)
      best = std::max<std::size_t>(best, static_cast<std::size_t>(std::popcount(mask)));
  }
  try {
    select_cuts(c17, cands, 2 * (best + 1), 2, SelectStrategy::Random, 3);
    FAIL("expected InsufficientCandidates");
  } catch (const InsufficientCandidates &e) {
    CHECK(e.requested() == best + 1);
    CHECK(e.achievable() <= best);
    CHECK(e.achievable() >= 1);
  }
}

TEST_CASE("fault impact ordering") {
  Netlist c432 = bench("c432.bench");
  auto cands = enumerate_cuts(c432, {3, 4});
  auto picked = select_cuts(c432, cands, 8, 2, SelectStrategy::FaultImpact, 1);
  REQUIRE(picked.size() == 4);
  // The first pick in impact order is always taken.
  double top = 0;
  for (auto &c : cands)
    top = std::max(top, fault_impact(c432, c.root, default_fault_samples(c432), 1));
  double got = 0;
  for (auto &c : picked)
    got = std::max(got, fault_impact(c432, c.root, default_fault_samples(c432), 1));
  CHECK(got == top);
}

TEST_CASE("empty budget is the identity") {
  Netlist c17 = bench("c17.bench");
  LockConfig cfg;
  cfg.seed = 4;
  auto r = lock_design(c17, cfg);
  CHECK(r.locked == c17);
  CHECK(r.memory.empty());
  CHECK(r.report.gate_delta == 0);
  CHECK(r.report.literal_delta == 0);
  CHECK(r.report.depth_delta == 0);
  CHECK(r.report.corruption == 0.0);
  CHECK(corruption_report(r.locked, r.memory, 100, 1) == 0.0);
}

TEST_CASE("Y cut lock in context") {
  Netlist nl = fixture("y_cut.bench");
  LockConfig cfg;
  cfg.budget_key_bits = 2;
  cfg.roots = {"Y"};
  cfg.seed = 7;
  auto r = lock_design(nl, cfg);
  CHECK(r.report.roots == std::vector<std::string>{"Y"});
  CHECK(r.locked.key_inputs().size() == 2);
  check_activation(nl, r);
  CHECK(check_equivalence(activate(r.locked, r.memory), {}, nl, {}).equivalent);
  MESSAGE("Y cut gate delta in context: " << r.report.gate_delta);
  CHECK(r.report.gate_delta <= 5);

  // Gates outside the dotted box are untouched.
  std::map<std::string, std::string> kept;
  for (const auto &g : raw_of(r.locked).gates)
    kept[g.out] = g.kind + "(" + (g.in.size() > 1 ? g.in[0] + "," + g.in[1] : g.in[0]) + ")";
  CHECK(kept.at("n3") == "AND(a,b)");
  CHECK(kept.at("O1") == "NOR(n3,Y)");
  CHECK(kept.at("O2") == "XOR(b,Y)");
  CHECK_FALSE(kept.contains("n1"));
  CHECK_FALSE(kept.contains("n2"));

  cfg.roots = {"nope"};
  CHECK_THROWS_AS(lock_design(nl, cfg), Error);
}

TEST_CASE("c499 with sixteen key bits") {
  Netlist c499 = bench("c499.bench");
  LockConfig cfg;
  cfg.budget_key_bits = 16;
  cfg.seed = 1;
  auto r = lock_design(c499, cfg);
  CHECK(r.report.num_locks == 8);
  CHECK(r.report.key_bits_total == 16);
  CHECK(r.locked.key_inputs().size() == 16);
  CHECK(r.memory.size() == 8);
  CHECK(miter_equivalence(activate(r.locked, r.memory), c499).equivalent);
  check_activation(c499, r, 500);
  CHECK(r.report.corruption >= 0.0);
  CHECK(r.report.corruption <= 1.0);
  CHECK_FALSE(find_universal_key(r.locked, c499).has_value());
}

TEST_CASE("random designs lock, activate and keep no universal key") {
  int locked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto raw = testing_support::random_circuit(seed, 5 + static_cast<int>(seed % 4), 24, 3);
    Netlist nl = parse_bench(raw.to_bench());
    LockConfig cfg;
    cfg.budget_key_bits = 2 * (1 + seed % 3);
    cfg.seed = seed;
    cfg.dontcare_policy = seed % 2 ? DontCarePolicy::DontCare : DontCarePolicy::Complement;
    cfg.strategy = seed % 3 ? SelectStrategy::Random : SelectStrategy::FaultImpact;
    LockResult r;
    try {
      r = lock_design(nl, cfg);
    } catch (const InsufficientCandidates &) {
      continue;
    }
    ++locked;
    CHECK(r.report.key_bits_total == cfg.budget_key_bits);
    check_activation(nl, r);

    std::set<std::string> roots(r.report.roots.begin(), r.report.roots.end());
    CHECK(roots.size() == r.report.num_locks);

    // No single key works on every input, by brute force.
    const std::size_t n = nl.primary_inputs().size(), k = r.locked.key_inputs().size();
    RawCircuit lk = raw_of(r.locked);
    for (std::uint64_t key = 0; key < (std::uint64_t{1} << k); ++key) {
      bool everywhere = true;
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << n) && everywhere; ++m) {
        auto x = testing_support::bits_of_index(m, n);
        auto xk = x;
        auto kb = testing_support::bits_of_index(key, k);
        xk.insert(xk.end(), kb.begin(), kb.end());
        everywhere = lk.eval(xk) == raw.eval(x);
      }
      CHECK_FALSE(everywhere);
    }
  }
  CHECK(locked >= 15);
}

TEST_CASE("xor baseline") {
  Netlist c432 = bench("c432.bench");
  auto b = lock_xor_baseline(c432, 8, 5);
  REQUIRE(b.correct_key.size() == 8);
  RawCircuit ref = raw_of(c432), lk = raw_of(b.locked);
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    auto x = random_bits(rng, 36);
    auto xk = x;
    xk.insert(xk.end(), b.correct_key.begin(), b.correct_key.end());
    REQUIRE(lk.eval(xk) == ref.eval(x));
  }
  // A single wrong bit on a key gate that drives an output shows up.
  Netlist c17 = bench("c17.bench");
  auto all = lock_xor_baseline(c17, c17.gates().size(), 2);
  RawCircuit ref17 = raw_of(c17), lk17 = raw_of(all.locked);
  for (std::size_t i = 0; i < all.correct_key.size(); ++i) {
    Bits key = all.correct_key;
    key[i] = !key[i];
    bool differs = false;
    for (std::uint64_t m = 0; m < 32; ++m) {
      auto x = testing_support::bits_of_index(m, 5);
      auto xk = x;
      xk.insert(xk.end(), key.begin(), key.end());
      differs = differs || lk17.eval(xk) != ref17.eval(x);
    }
    // Every c17 gate is observable, so any flipped key gate is too.
    CHECK(differs);
  }
  CHECK_THROWS_AS(lock_xor_baseline(c17, 7, 1), Error);
}

TEST_CASE("anti-sat baseline is a point function") {
  Netlist nl = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nOUTPUT(y)\nOUTPUT(z)\n"
                           "p = AND(a, b)\nq = OR(c, d)\ny = XOR(p, q)\nz = NAND(a, d)\n");
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto b = lock_antisat_baseline(nl, 8, seed);
    REQUIRE(b.correct_key.size() == 8);
    RawCircuit ref = raw_of(nl), lk = raw_of(b.locked);
    auto corrupting = [&](std::uint64_t key) {
      std::size_t n = 0;
      for (std::uint64_t m = 0; m < 16; ++m) {
        auto x = testing_support::bits_of_index(m, 4);
        auto xk = x;
        auto kb = testing_support::bits_of_index(key, 8);
        xk.insert(xk.end(), kb.begin(), kb.end());
        n += lk.eval(xk) != ref.eval(x);
      }
      return n;
    };
    CHECK(corrupting(bits_value(b.correct_key)) == 0);
    for (std::uint64_t key = 0; key < 256; ++key) {
      bool equal_halves = (key >> 4) == (key & 15U);
      CHECK(corrupting(key) == (equal_halves ? 0U : 1U));
    }
  }
  CHECK_THROWS_AS(lock_antisat_baseline(nl, 7, 1), Error);
  CHECK_THROWS_AS(lock_antisat_baseline(nl, 10, 1), Error);
  Netlist c432 = bench("c432.bench");
  auto big = lock_antisat_baseline(c432, 16, 1);
  CHECK(static_cast<long>(big.locked.gates().size() - c432.gates().size()) == 32);
}

TEST_CASE("corruption matches an exhaustive count") {
  Netlist nl = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nt = AND(a, b)\ny = OR(t, c)\n");
  for (auto policy : {DontCarePolicy::DontCare, DontCarePolicy::Complement}) {
    LockConfig cfg;
    cfg.budget_key_bits = 2;
    cfg.seed = 12;
    cfg.dontcare_policy = policy;
    auto r = lock_design(nl, cfg);
    REQUIRE(r.memory.size() == 1);
    RawCircuit ref = raw_of(nl), lk = raw_of(r.locked);
    std::size_t wrong = 0, differ = 0;
    for (std::uint64_t m = 0; m < 8; ++m) {
      auto x = testing_support::bits_of_index(m, 3);
      std::map<std::string, bool> vals{{"a", x[0]}, {"b", x[1]}, {"c", x[2]}};
      Bits good = lookup_key(r.memory[0], vals);
      for (std::uint64_t key = 0; key < 4; ++key) {
        auto kb = testing_support::bits_of_index(key, 2);
        if (kb == good)
          continue;
        ++wrong;
        auto xk = x;
        xk.insert(xk.end(), kb.begin(), kb.end());
        differ += lk.eval(xk) != ref.eval(x);
      }
    }
    double want = static_cast<double>(differ) / static_cast<double>(wrong);
    CHECK(corruption_report(r.locked, r.memory, 1000, 3) == doctest::Approx(want));
    CHECK(r.report.corruption == doctest::Approx(want));
    if (policy == DontCarePolicy::Complement)
      CHECK(want == 1.0);
  }
  Netlist c880 = bench("c880.bench");
  LockConfig cfg;
  cfg.budget_key_bits = 8;
  cfg.seed = 2;
  auto r = lock_design(c880, cfg);
  double c = corruption_report(r.locked, r.memory, 5000, 9);
  CHECK(c >= 0.0);
  CHECK(c <= 1.0);
}

TEST_CASE("locking is reproducible from the seed") {
  Netlist c432 = bench("c432.bench");
  LockConfig cfg;
  cfg.budget_key_bits = 16;
  cfg.seed = 21;
  cfg.strategy = SelectStrategy::FaultImpact;
  auto a = lock_design(c432, cfg), b = lock_design(c432, cfg);
  CHECK(emit_bench(a.locked) == emit_bench(b.locked));
  CHECK(a.memory == b.memory);
  CHECK(a.report.roots == b.report.roots);
  CHECK(a.report.corruption == b.report.corruption);
}
