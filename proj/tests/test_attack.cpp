#include "attack.hpp"
#include "sublock.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace sublock;
using testing_support::bits_of_index;
using testing_support::RawCircuit;
using testing_support::raw_of;

namespace {

Netlist bench(const std::string &name) { return read_bench_file(std::string(SUBLOCK_BENCH_DIR) + "/" + name); }

std::vector<bool> with_key(std::vector<bool> x, const Bits &key) {
  x.insert(x.end(), key.begin(), key.end());
  return x;
}

// Does `key` make the locked circuit match the original, by plain evaluation?
// Exhaustive up to 16 inputs, 3000 random patterns beyond.
bool key_works(const Netlist &locked, const Netlist &original, const Bits &key) {
  RawCircuit lk = raw_of(locked), ref = raw_of(original);
  const std::size_t n = original.primary_inputs().size();
  if (n <= 16) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      auto x = bits_of_index(m, n);
      if (lk.eval(with_key(x, key)) != ref.eval(x))
        return false;
    }
    return true;
  }
  Rng rng(17);
  for (int t = 0; t < 3000; ++t) {
    std::vector<bool> x(n);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = rng.coin();
    if (lk.eval(with_key(x, key)) != ref.eval(x))
      return false;
  }
  return true;
}

} // namespace

TEST_CASE("c17 with two xor key gates falls") {
  Netlist c17 = bench("c17.bench");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto b = lock_xor_baseline(c17, 2, seed);
    Oracle oracle(c17);
    auto r = sat_attack(b.locked, oracle);
    CHECK(r.status == AttackStatus::KeyFound);
    CHECK(r.iterations <= 4);
    REQUIRE(r.candidate_key.has_value());
    // The keys that truly unlock, by trying all four.
    std::set<std::uint64_t> good;
    for (std::uint64_t k = 0; k < 4; ++k)
      if (key_works(b.locked, c17, bits_of(k, 2)))
        good.insert(k);
    CHECK(good.contains(bits_value(b.correct_key)));
    CHECK(good.contains(bits_value(*r.candidate_key)));
  }
}

TEST_CASE("xor baselines always fall") {
  Netlist c17 = bench("c17.bench"), c432 = bench("c432.bench");
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const Netlist &nl = seed % 2 ? c17 : c432;
    std::size_t keys = seed % 2 ? 2 + seed % 5 : 2 + seed;
    auto b = lock_xor_baseline(nl, keys, seed);
    Oracle oracle(nl);
    auto r = sat_attack(b.locked, oracle);
    CHECK(r.status == AttackStatus::KeyFound);
    REQUIRE(r.candidate_key.has_value());
    CHECK(key_works(b.locked, nl, *r.candidate_key));
    CHECK(r.dips.size() == r.iterations);
  }
}

TEST_CASE("a key that never matters gives no DIP") {
  Netlist nl = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nOUTPUT(y)\n"
                           "t = AND(b, keyinput0)\nu = OR(b, t)\ny = AND(a, u)\n");
  Netlist ref = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
  Oracle oracle(ref);
  auto r = sat_attack(nl, oracle);
  CHECK(r.iterations == 0);
  CHECK(r.status == AttackStatus::KeyFound);
  CHECK(oracle.queries() == 0);
}

TEST_CASE("DIPs never repeat and each one still splits the surviving keys") {
  Netlist c17 = bench("c17.bench");
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto b = lock_xor_baseline(c17, 6, seed);
    Oracle oracle(c17);
    auto r = sat_attack(b.locked, oracle);
    RawCircuit lk = raw_of(b.locked), ref = raw_of(c17);
    std::set<std::vector<bool>> seen;
    std::vector<std::uint64_t> alive;
    for (std::uint64_t k = 0; k < 64; ++k)
      alive.push_back(k);
    for (const Dip &d : r.dips) {
      CHECK(seen.insert(d.input).second);
      CHECK(d.response == ref.eval(d.input));
      std::set<std::vector<bool>> outs;
      for (auto k : alive)
        outs.insert(lk.eval(with_key(d.input, bits_of(k, 6))));
      CHECK(outs.size() >= 2);
      std::vector<std::uint64_t> next;
      for (auto k : alive)
        if (lk.eval(with_key(d.input, bits_of(k, 6))) == d.response)
          next.push_back(k);
      CHECK(next.size() < alive.size());
      alive = next;
    }
  }
}

TEST_CASE("sublock on c17 never yields a working key") {
  Netlist c17 = bench("c17.bench");
  int runs = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    LockConfig cfg;
    cfg.budget_key_bits = 4;
    cfg.seed = seed;
    cfg.support_sizes = {2, 3, 4};
    LockResult lr;
    try {
      lr = lock_design(c17, cfg);
    } catch (const InsufficientCandidates &) {
      continue;
    }
    ++runs;
    Oracle oracle(c17);
    auto r = sat_attack(lr.locked, oracle);
    CHECK(r.status != AttackStatus::KeyFound);
    if (r.status == AttackStatus::WrongKey) {
      REQUIRE(r.candidate_key.has_value());
      REQUIRE(r.counterexample.has_value());
      RawCircuit lk = raw_of(lr.locked), ref = raw_of(c17);
      CHECK(lk.eval(with_key(*r.counterexample, *r.candidate_key)) != ref.eval(*r.counterexample));
    } else {
      CHECK_FALSE(r.candidate_key.has_value());
    }
    // No key of the 16 works everywhere.
    for (std::uint64_t k = 0; k < 16; ++k)
      CHECK_FALSE(key_works(lr.locked, c17, bits_of(k, 4)));
  }
  CHECK(runs >= 10);
}

TEST_CASE("anti-sat needs exponentially many DIPs") {
  Netlist c432 = bench("c432.bench");
  auto b = lock_antisat_baseline(c432, 16, 3);
  Oracle oracle(c432);
  auto r = sat_attack(b.locked, oracle);
  MESSAGE("anti-sat c432 k=16 iterations: " << r.iterations);
  CHECK(r.iterations + 2 >= 128);
  CHECK(r.status == AttackStatus::KeyFound);
  REQUIRE(r.candidate_key.has_value());
  CHECK(key_works(b.locked, c432, *r.candidate_key));
}

TEST_CASE("attack budget") {
  Netlist c432 = bench("c432.bench");
  auto b = lock_antisat_baseline(c432, 16, 3);
  Oracle oracle(c432);
  AttackOptions opt;
  opt.max_iters = 5;
  try {
    sat_attack(b.locked, oracle, opt);
    FAIL("expected the budget to run out");
  } catch (const AttackBudgetExceeded &e) {
    CHECK(e.code() == ErrorCode::IterationBudgetExceeded);
    CHECK(e.partial().iterations == 5);
    CHECK(e.partial().dips.size() == 5);
  }
  CHECK(default_max_iters(4) == 160);
  CHECK(default_max_iters(40) == 10 * (std::size_t{1} << 20));
  Netlist ha = parse_bench("INPUT(A)\nOUTPUT(S)\nS = NOT(A)\n");
  Oracle wrong(ha);
  CHECK_THROWS_AS(sat_attack(b.locked, wrong), Error);
}

TEST_CASE("universal key search") {
  Netlist c17 = bench("c17.bench");
  auto x = lock_xor_baseline(c17, 4, 9);
  auto key = find_universal_key(x.locked, c17);
  REQUIRE(key.has_value());
  CHECK(key_works(x.locked, c17, *key));

  LockConfig cfg;
  cfg.budget_key_bits = 4;
  cfg.seed = 2;
  cfg.support_sizes = {2, 3, 4};
  auto lr = lock_design(c17, cfg);
  CHECK_FALSE(find_universal_key(lr.locked, c17).has_value());
}

namespace {

// Half adder with S and C locked under keys 01 (inputs 00, 01) and 10
// (inputs 10, 11).
LockedFunction locked_half_adder() {
  TruthTable t(2, 2);
  const char *s = "0110", *c = "0001";
  for (std::uint32_t m = 0; m < 4; ++m) {
    t.set(0, m, s[m] == '1' ? Tri::One : Tri::Zero);
    t.set(1, m, c[m] == '1' ? Tri::One : Tri::Zero);
  }
  KeyPlan p;
  p.num_inputs = 2;
  p.num_key_bits = 2;
  p.partition = {0, 0, 1, 1};
  p.valid_keys = {bits_from_string("01"), bits_from_string("10")};
  return lock_function(t, p, {{"keyinput0", "keyinput1"}, {"A", "B"}, {"S", "C"}});
}

} // namespace

TEST_CASE("brute force recovers the half adder key map") {
  LockedFunction lf = locked_half_adder();
  const Netlist &locked = lf.synth.network;
  REQUIRE(locked.key_inputs().size() == 2);
  Netlist ha = parse_bench("INPUT(A)\nINPUT(B)\nOUTPUT(S)\nOUTPUT(C)\nS = XOR(A, B)\nC = AND(A, B)\n");
  Oracle oracle(ha);
  auto r = brute_force_key_map(locked, oracle, {{{"keyinput0", "keyinput1"}, {"A", "B"}}});
  REQUIRE(r.memory.has_value());
  REQUIRE(r.memory->size() == 1);

  RawCircuit lk = raw_of(locked), ref = raw_of(ha);
  auto correct = [&](std::uint64_t x, const std::string &key) {
    auto xb = bits_of_index(x, 2);
    return lk.eval(with_key(xb, bits_from_string(key))) == ref.eval(xb);
  };
  // The planted map is one of the valid solutions.
  CHECK(correct(0, "01"));
  CHECK(correct(1, "01"));
  CHECK(correct(2, "10"));
  CHECK(correct(3, "10"));
  // Whatever map came back is consistent with the oracle, and the per-input
  // multiplicity matches a direct count.
  for (std::uint64_t x = 0; x < 4; ++x) {
    std::string pattern = bits_to_string(bits_of(x, 2));
    CHECK(correct(x, r.memory->front().entries.at(pattern)));
    std::size_t n = 0;
    for (const char *k : {"00", "01", "10", "11"})
      n += correct(x, k);
    CHECK(r.keys_per_input[x] == n);
  }
}

TEST_CASE("brute force on an xor lock gives the planted key") {
  Netlist ha = parse_bench("INPUT(A)\nINPUT(B)\nOUTPUT(S)\nOUTPUT(C)\nS = XOR(A, B)\nC = AND(A, B)\n");
  Netlist locked = parse_bench("INPUT(A)\nINPUT(B)\nINPUT(keyinput0)\nOUTPUT(S)\nOUTPUT(C)\n"
                               "s0 = XOR(A, B)\nS = XNOR(s0, keyinput0)\nC = AND(A, B)\n");
  Oracle oracle(ha);
  auto r = brute_force_key_map(locked, oracle, {{{"keyinput0"}, {}}});
  REQUIRE(r.memory.has_value());
  CHECK(r.memory->front().entries.size() == 1);
  CHECK(r.memory->front().entries.begin()->second == "1");

  // An oracle no key can explain: C is off on two inputs.
  Netlist bad = parse_bench("INPUT(A)\nINPUT(B)\nOUTPUT(S)\nOUTPUT(C)\nS = XOR(A, B)\nC = OR(A, B)\n");
  Oracle liar(bad);
  auto none = brute_force_key_map(locked, liar);
  CHECK_FALSE(none.memory.has_value());
  CHECK(none.keys_per_input[1] == 0);

  Netlist c432 = bench("c432.bench");
  auto big = lock_xor_baseline(c432, 2, 1);
  Oracle o432(c432);
  CHECK_THROWS_AS(brute_force_key_map(big.locked, o432), Error);
}
