#include "netlist.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace sublock;

namespace {

const char *c17_text = R"(# c17
INPUT(N1)
INPUT(N2)
INPUT(N3)
INPUT(N6)
INPUT(N7)
OUTPUT(N22)
OUTPUT(N23)
N10 = NAND(N1, N3)
N11 = NAND(N3, N6)
N16 = NAND(N2, N11)
N19 = NAND(N11, N7)
N22 = NAND(N10, N16)
N23 = NAND(N16, N19)
)";

std::vector<std::string> corpus() {
  std::vector<std::string> files;
  for (auto &e : std::filesystem::directory_iterator(SUBLOCK_BENCH_DIR))
    if (e.path().extension() == ".bench")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

} // namespace

TEST_CASE("c17 parses with five inputs and six gates") {
  Netlist nl = parse_bench(c17_text);
  CHECK(nl.primary_inputs().size() == 5);
  CHECK(nl.key_inputs().size() == 0);
  CHECK(nl.primary_outputs().size() == 2);
  CHECK(nl.gates().size() == 6);
  for (const Gate &g : nl.gates())
    CHECK(g.kind == GateKind::Nand);
}

TEST_CASE("passthrough netlist") {
  Netlist nl = parse_bench("INPUT(a)\nOUTPUT(a)");
  CHECK(nl.primary_inputs().size() == 1);
  CHECK(nl.primary_outputs().size() == 1);
  CHECK(nl.gates().empty());
  CHECK(simulate(nl, {true}, {}) == Bits{true});
  std::string text = emit_bench(nl);
  CHECK(text.find('=') == std::string::npos);
  CHECK(parse_bench(text) == nl);
}

TEST_CASE("parse errors carry a position") {
  SUBCASE("undefined net") {
    try {
      parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, z)\n");
      FAIL("expected error");
    } catch (const ParseError &e) {
      CHECK(e.code() == ErrorCode::UndefinedNet);
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("'z'") != std::string::npos);
    }
  }
  SUBCASE("duplicate definition") {
    CHECK_THROWS_AS(parse_bench("INPUT(a)\nINPUT(b)\ny = AND(a, b)\ny = OR(a, b)\nOUTPUT(y)\n"), ParseError);
  }
  SUBCASE("cycle") {
    try {
      parse_bench("INPUT(a)\nOUTPUT(y)\nx = AND(a, y)\ny = NOT(x)\n");
      FAIL("expected error");
    } catch (const ParseError &e) {
      CHECK(e.code() == ErrorCode::CombinationalCycle);
    }
  }
  SUBCASE("unknown gate") {
    try {
      parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = MUX(a, b)\n");
      FAIL("expected error");
    } catch (const ParseError &e) {
      CHECK(e.code() == ErrorCode::UnknownGate);
      CHECK(e.line() == 4);
      CHECK(e.column() == 5);
    }
  }
  SUBCASE("syntax") {
    try {
      parse_bench("INPUT(a\n");
      FAIL("expected error");
    } catch (const ParseError &e) {
      CHECK(e.code() == ErrorCode::Parse);
      CHECK(e.line() == 1);
    }
    CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a)\n"), ParseError);
    CHECK_THROWS_AS(parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NOT(a, b)\n"), ParseError);
  }
}

TEST_CASE("key inputs, DFF boundaries, wide XOR, CRLF") {
  Netlist nl = parse_bench("INPUT(a)\r\nINPUT(keyinput0)\r\nINPUT(b)\r\nINPUT(c)\r\nOUTPUT(y)\r\n"
                           "q = DFF(d)\r\nd = XOR(a, b, c, q)\r\ny = XNOR(d, keyinput0)  # trailing\r\n");
  CHECK(nl.key_inputs().size() == 1);
  CHECK(nl.name(nl.key_inputs()[0]) == "keyinput0");
  // q is a pseudo input, d a pseudo output
  CHECK(nl.primary_inputs().size() == 4);
  CHECK(nl.primary_outputs().size() == 2);
  for (const Gate &g : nl.gates())
    if (g.kind == GateKind::Xor || g.kind == GateKind::Xnor)
      CHECK(g.inputs.size() == 2);
  // y = !(a^b^c^q ^ key)
  for (std::uint64_t p = 0; p < 16; ++p) {
    Bits x = bits_of(p, 4);
    bool parity = x[0] ^ x[1] ^ x[2] ^ x[3];
    Bits out = simulate(nl, x, {true});
    CHECK(out[0] == (parity == true));
    CHECK(out[1] == parity);
  }
  std::string text = emit_bench(nl);
  CHECK(text.find("INPUT(keyinput0)\n") != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("lowercase keywords and BUF aliases") {
  Netlist nl = parse_bench("input(a)\noutput(y)\nt = buf(a)\ny = Buff(t)\n");
  CHECK(nl.gates().size() == 2);
  CHECK(simulate(nl, {false}, {}) == Bits{false});
}

TEST_CASE("round trip over the benchmark corpus") {
  auto files = corpus();
  REQUIRE(files.size() >= 6);
  for (const auto &f : files) {
    CAPTURE(f);
    Netlist a = read_bench_file(f);
    std::string t1 = emit_bench(a);
    Netlist b = parse_bench(t1);
    CHECK(a == b);
    CHECK(emit_bench(b) == t1);
    // topological order
    std::vector<bool> defined(a.num_nets(), false);
    for (NetId i : a.primary_inputs())
      defined[i] = true;
    for (NetId i : a.key_inputs())
      defined[i] = true;
    for (const Gate &g : a.gates()) {
      for (NetId in : g.inputs)
        CHECK(defined[in]);
      defined[g.output] = true;
    }
  }
}

TEST_CASE("simulation") {
  SUBCASE("half adder") {
    Netlist ha = parse_bench("INPUT(A)\nINPUT(B)\nOUTPUT(S)\nOUTPUT(C)\nS = XOR(A, B)\nC = AND(A, B)\n");
    CHECK(simulate(ha, {true, true}, {}) == Bits{false, true});
    CHECK(simulate(ha, {true, false}, {}) == Bits{true, false});
    CHECK_THROWS_AS(simulate(ha, {true}, {}), Error);
    CHECK_THROWS_AS(simulate(ha, {true, true}, {true}), Error);
  }
  SUBCASE("c17 agrees with a name-level evaluator") {
    Netlist nl = parse_bench(c17_text);
    testing_support::RawCircuit raw;
    raw.inputs = {"N1", "N2", "N3", "N6", "N7"};
    raw.outputs = {"N22", "N23"};
    raw.gates = {{"NAND", "N10", {"N1", "N3"}},  {"NAND", "N11", {"N3", "N6"}},
                 {"NAND", "N16", {"N2", "N11"}}, {"NAND", "N19", {"N11", "N7"}},
                 {"NAND", "N22", {"N10", "N16"}}, {"NAND", "N23", {"N16", "N19"}}};
    CHECK(simulate(nl, Bits(5, false), {}) == Bits{false, false});
    CHECK(raw.eval(Bits(5, false)) == Bits{false, false});
    for (std::uint64_t p = 0; p < 32; ++p) {
      Bits x = bits_of(p, 5);
      CHECK(simulate(nl, x, {}) == raw.eval(x));
      CHECK(simulate(nl, x, {}) == simulate(nl, x, {}));
    }
  }
  SUBCASE("word-parallel matches scalar on random circuits") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      auto raw = testing_support::random_circuit(seed, 6, 20, 3);
      Netlist nl = parse_bench(raw.to_bench());
      auto words = exhaustive_words(6, 0);
      auto vals = simulate_words(nl, words, {});
      for (std::uint64_t p = 0; p < 64; ++p) {
        Bits x = bits_of(p, 6);
        Bits expect = raw.eval(x);
        for (std::size_t o = 0; o < expect.size(); ++o)
          CHECK(((vals[nl.primary_outputs()[o]] >> p) & 1U) == expect[o]);
      }
    }
  }
}

TEST_CASE("fanin cones") {
  Netlist ha = parse_bench("INPUT(A)\nINPUT(B)\nOUTPUT(S)\nOUTPUT(C)\nS = XOR(A, B)\nC = AND(A, B)\n");
  CHECK(fanin_cone(ha, ha.id("A")) == std::vector<NetId>{ha.id("A")});
  auto s = fanin_cone(ha, ha.id("S"));
  CHECK(s.size() == 3);
  CHECK_THROWS_AS(fanin_cone(ha, 99), Error);
  CHECK_THROWS_AS(ha.id("nope"), Error);

  Netlist nl = parse_bench(c17_text);
  for (const Gate &g : nl.gates()) {
    std::set<NetId> expect{g.output};
    for (NetId in : g.inputs)
      for (NetId x : fanin_cone(nl, in))
        expect.insert(x);
    auto got = fanin_cone(nl, g.output);
    CHECK(std::vector<NetId>(expect.begin(), expect.end()) == got);
  }
  CHECK(logic_depth(nl) == 3);
  CHECK(pin_count(nl) == 12);
}

TEST_CASE("builder fresh names avoid collisions") {
  Netlist::Builder b;
  b.input("a");
  b.input("a_1");
  CHECK(b.fresh_name("a") == "a_2");
  CHECK(b.fresh_name("z") == "z");
  CHECK(b.fresh_name("z") == "z_1");
}
