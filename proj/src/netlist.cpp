#include "netlist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sublock {

const char *to_string(GateKind kind) {
  switch (kind) {
  case GateKind::And: return "AND";
  case GateKind::Nand: return "NAND";
  case GateKind::Or: return "OR";
  case GateKind::Nor: return "NOR";
  case GateKind::Xor: return "XOR";
  case GateKind::Xnor: return "XNOR";
  case GateKind::Not: return "NOT";
  case GateKind::Buf: return "BUFF";
  }
  return "?";
}

std::optional<GateKind> gate_kind_from_string(std::string_view s) {
  std::string u(s);
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  if (u == "AND") return GateKind::And;
  if (u == "NAND") return GateKind::Nand;
  if (u == "OR") return GateKind::Or;
  if (u == "NOR") return GateKind::Nor;
  if (u == "XOR") return GateKind::Xor;
  if (u == "XNOR") return GateKind::Xnor;
  if (u == "NOT" || u == "INV") return GateKind::Not;
  if (u == "BUF" || u == "BUFF") return GateKind::Buf;
  return std::nullopt;
}

bool is_key_input_name(std::string_view name) { return name.starts_with("keyinput"); }

// ---------------------------------------------------------------------------
// Netlist

std::optional<NetId> Netlist::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end())
    return std::nullopt;
  return it->second;
}

NetId Netlist::id(std::string_view name) const {
  if (auto id = find(name))
    return *id;
  throw Error(ErrorCode::UnknownNet, "unknown net '" + std::string(name) + "'");
}

std::optional<std::size_t> Netlist::driver(NetId net) const {
  std::int32_t d = driver_.at(net);
  if (d < 0)
    return std::nullopt;
  return static_cast<std::size_t>(d);
}

bool Netlist::operator==(const Netlist &other) const {
  return names_ == other.names_ && primary_inputs_ == other.primary_inputs_ &&
         key_inputs_ == other.key_inputs_ && primary_outputs_ == other.primary_outputs_ &&
         gates_ == other.gates_;
}

void Netlist::index() {
  const std::size_t n = names_.size();
  by_name_.clear();
  for (NetId i = 0; i < n; ++i)
    by_name_.emplace(names_[i], i);
  driver_.assign(n, -1);
  fanout_.assign(n, {});
  is_po_.assign(n, false);
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    driver_[gates_[g].output] = static_cast<std::int32_t>(g);
    for (NetId in : gates_[g].inputs)
      fanout_[in].push_back(static_cast<std::uint32_t>(g));
  }
  for (NetId po : primary_outputs_)
    is_po_[po] = true;
}

// ---------------------------------------------------------------------------
// Builder

void Netlist::Builder::define(const std::string &name, int line) {
  if (name.empty())
    throw ParseError(ErrorCode::Parse, line, 1, "empty net name");
  auto [it, inserted] = defined_.emplace(name, line);
  if (!inserted)
    throw ParseError(ErrorCode::DuplicateDefinition, line, 1, "net '" + name + "' defined more than once");
  used_[name] = true;
}

void Netlist::Builder::input(std::string name, int line) {
  define(name, line);
  if (is_key_input_name(name))
    keys_.push_back(std::move(name));
  else
    inputs_.push_back(std::move(name));
}

void Netlist::Builder::output(std::string name, int line) {
  used_[name] = true;
  for (const auto &o : outputs_)
    if (o.first == name)
      return;
  outputs_.emplace_back(std::move(name), line);
}

void Netlist::Builder::gate(GateKind kind, std::string output, std::vector<std::string> inputs, int line) {
  const bool unary = kind == GateKind::Not || kind == GateKind::Buf;
  if (unary && inputs.size() != 1)
    throw ParseError(ErrorCode::Parse, line, 1, std::string(to_string(kind)) + " takes exactly one input");
  if (!unary && inputs.size() < 2)
    throw ParseError(ErrorCode::Parse, line, 1, std::string(to_string(kind)) + " needs at least two inputs");
  if ((kind == GateKind::Xor || kind == GateKind::Xnor) && inputs.size() != 2)
    throw ParseError(ErrorCode::Parse, line, 1, "XOR/XNOR must be binary in the builder");
  define(output, line);
  for (const auto &in : inputs)
    used_[in] = true;
  gates_.push_back({kind, std::move(output), std::move(inputs), line});
}

bool Netlist::Builder::defines(std::string_view name) const { return defined_.contains(std::string(name)); }

std::string Netlist::Builder::fresh_name(const std::string &base) {
  if (!used_.contains(base)) {
    used_[base] = true;
    return base;
  }
  int &n = fresh_counter_[base];
  for (;;) {
    std::string candidate = base + "_" + std::to_string(++n);
    if (!used_.contains(candidate)) {
      used_[candidate] = true;
      return candidate;
    }
  }
}

Netlist Netlist::Builder::build() const {
  Netlist nl;
  std::unordered_map<std::string, NetId> ids;
  auto add_net = [&](const std::string &name) {
    NetId id = static_cast<NetId>(nl.names_.size());
    nl.names_.push_back(name);
    ids.emplace(name, id);
    return id;
  };
  for (const auto &n : inputs_)
    nl.primary_inputs_.push_back(add_net(n));
  for (const auto &n : keys_)
    nl.key_inputs_.push_back(add_net(n));

  // Gate outputs by name, then a DFS post-order which keeps an already
  // topological file order intact.
  std::unordered_map<std::string, std::size_t> gate_of;
  for (std::size_t g = 0; g < gates_.size(); ++g)
    gate_of.emplace(gates_[g].output, g);

  auto check_ref = [&](const std::string &name, int line) {
    if (!defined_.contains(name)) {
      if (line > 0)
        throw ParseError(ErrorCode::UndefinedNet, line, 1, "undefined net '" + name + "'");
      throw Error(ErrorCode::UndefinedNet, "undefined net '" + name + "'");
    }
  };
  for (const auto &g : gates_)
    for (const auto &in : g.inputs)
      check_ref(in, g.line);
  for (const auto &[name, line] : outputs_)
    check_ref(name, line);

  std::vector<std::uint8_t> state(gates_.size(), 0); // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> order;
  order.reserve(gates_.size());
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t root = 0; root < gates_.size(); ++root) {
    if (state[root] != 0)
      continue;
    stack.emplace_back(root, 0);
    state[root] = 1;
    while (!stack.empty()) {
      auto &[g, next] = stack.back();
      if (next < gates_[g].inputs.size()) {
        const std::string &in = gates_[g].inputs[next++];
        auto it = gate_of.find(in);
        if (it == gate_of.end())
          continue;
        std::size_t child = it->second;
        if (state[child] == 1)
          throw ParseError(ErrorCode::CombinationalCycle, gates_[child].line, 1,
                           "combinational cycle through net '" + gates_[child].output + "'");
        if (state[child] == 0) {
          state[child] = 1;
          stack.emplace_back(child, 0);
        }
      } else {
        state[g] = 2;
        order.push_back(g);
        stack.pop_back();
      }
    }
  }

  for (std::size_t g : order)
    add_net(gates_[g].output);
  nl.gates_.reserve(order.size());
  for (std::size_t g : order) {
    Gate gate{gates_[g].kind, {}, ids.at(gates_[g].output)};
    for (const auto &in : gates_[g].inputs)
      gate.inputs.push_back(ids.at(in));
    nl.gates_.push_back(std::move(gate));
  }
  for (const auto &o : outputs_)
    nl.primary_outputs_.push_back(ids.at(o.first));
  nl.index();
  return nl;
}

// ---------------------------------------------------------------------------
// .bench text

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  int line;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
      ++pos;
  }
  int column() const { return static_cast<int>(pos) + 1; }
  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(ErrorCode::Parse, line, column(), msg); }
  void expect(char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c)
      fail(std::string("expected '") + c + "'");
    ++pos;
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ' ' || c == '\t' || c == '(' || c == ')' || c == ',' || c == '=')
        break;
      ++pos;
    }
    if (start == pos)
      fail("expected identifier");
    return std::string(text.substr(start, pos - start));
  }
};

} // namespace

Netlist parse_bench(std::string_view text) {
  Netlist::Builder b;
  struct WideXor {
    GateKind kind;
    std::string output;
    std::vector<std::string> inputs;
    int line;
  };
  std::vector<WideXor> deferred;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);

    Cursor c{line, 0, line_no};
    if (c.at_end()) {
      if (end == text.size())
        break;
      continue;
    }
    std::string head = c.ident();
    c.skip_ws();
    if (c.pos < line.size() && line[c.pos] == '(') {
      std::string upper = head;
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
      c.expect('(');
      std::string name = c.ident();
      c.expect(')');
      if (!c.at_end())
        c.fail("trailing characters");
      if (upper == "INPUT")
        b.input(name, line_no);
      else if (upper == "OUTPUT")
        b.output(name, line_no);
      else
        throw ParseError(ErrorCode::Parse, line_no, 1, "unknown declaration '" + head + "'");
    } else {
      c.expect('=');
      c.skip_ws();
      int kind_col = c.column();
      std::string kind_name = c.ident();
      c.expect('(');
      std::vector<std::string> args;
      args.push_back(c.ident());
      for (;;) {
        c.skip_ws();
        if (c.pos < line.size() && line[c.pos] == ',') {
          ++c.pos;
          args.push_back(c.ident());
          continue;
        }
        break;
      }
      c.expect(')');
      if (!c.at_end())
        c.fail("trailing characters");

      std::string upper = kind_name;
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
      if (upper == "DFF") {
        if (args.size() != 1)
          throw ParseError(ErrorCode::Parse, line_no, kind_col, "DFF takes exactly one input");
        // scan boundary: q becomes a pseudo input, d a pseudo output
        b.input(head, line_no);
        b.output(args[0], line_no);
        continue;
      }
      auto kind = gate_kind_from_string(kind_name);
      if (!kind)
        throw ParseError(ErrorCode::UnknownGate, line_no, kind_col, "unknown gate type '" + kind_name + "'");
      if ((*kind == GateKind::Xor || *kind == GateKind::Xnor) && args.size() > 2) {
        deferred.push_back({*kind, head, std::move(args), line_no});
        continue;
      }
      b.gate(*kind, head, std::move(args), line_no);
    }
    if (end == text.size())
      break;
  }

  // Wide XOR/XNOR become a chain of binary XORs; temporaries are named after
  // every file name is known so they cannot collide.
  for (auto &w : deferred) {
    std::string acc = w.inputs[0];
    for (std::size_t i = 1; i + 1 < w.inputs.size(); ++i) {
      std::string tmp = b.fresh_name(w.output + "_x" + std::to_string(i));
      b.gate(GateKind::Xor, tmp, {acc, w.inputs[i]}, w.line);
      acc = tmp;
    }
    b.gate(w.kind, w.output, {acc, w.inputs.back()}, w.line);
  }
  return b.build();
}

Netlist read_bench_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bench(ss.str());
}

std::string emit_bench(const Netlist &nl) {
  std::string out;
  for (NetId id : nl.primary_inputs())
    out += "INPUT(" + nl.name(id) + ")\n";
  for (NetId id : nl.key_inputs())
    out += "INPUT(" + nl.name(id) + ")\n";
  out += "\n";
  for (NetId id : nl.primary_outputs())
    out += "OUTPUT(" + nl.name(id) + ")\n";
  if (!nl.gates().empty())
    out += "\n";
  for (const Gate &g : nl.gates()) {
    out += nl.name(g.output);
    out += " = ";
    out += to_string(g.kind);
    out += "(";
    for (std::size_t i = 0; i < g.inputs.size(); ++i) {
      if (i)
        out += ", ";
      out += nl.name(g.inputs[i]);
    }
    out += ")\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation and structure

std::uint64_t eval_gate_word(GateKind kind, std::span<const std::uint64_t> in) {
  std::uint64_t v = 0;
  switch (kind) {
  case GateKind::And:
  case GateKind::Nand:
    v = ~std::uint64_t{0};
    for (auto x : in)
      v &= x;
    return kind == GateKind::Nand ? ~v : v;
  case GateKind::Or:
  case GateKind::Nor:
    for (auto x : in)
      v |= x;
    return kind == GateKind::Nor ? ~v : v;
  case GateKind::Xor:
  case GateKind::Xnor:
    for (auto x : in)
      v ^= x;
    return kind == GateKind::Xnor ? ~v : v;
  case GateKind::Not:
    return ~in[0];
  case GateKind::Buf:
    return in[0];
  }
  return v;
}

std::vector<std::uint64_t> simulate_words(const Netlist &nl, std::span<const std::uint64_t> pi_words,
                                          std::span<const std::uint64_t> key_words, std::optional<NetOverride> force) {
  if (pi_words.size() != nl.primary_inputs().size() || key_words.size() != nl.key_inputs().size())
    throw Error(ErrorCode::LengthMismatch, "simulation input widths do not match the netlist interface");
  std::vector<std::uint64_t> val(nl.num_nets(), 0);
  for (std::size_t i = 0; i < pi_words.size(); ++i)
    val[nl.primary_inputs()[i]] = pi_words[i];
  for (std::size_t i = 0; i < key_words.size(); ++i)
    val[nl.key_inputs()[i]] = key_words[i];
  if (force && !nl.driver(force->net))
    val[force->net] = force->value;
  std::uint64_t buf[16];
  std::vector<std::uint64_t> wide;
  for (const Gate &g : nl.gates()) {
    std::span<std::uint64_t> args;
    if (g.inputs.size() <= 16) {
      args = std::span<std::uint64_t>(buf, g.inputs.size());
    } else {
      wide.resize(g.inputs.size());
      args = wide;
    }
    for (std::size_t i = 0; i < g.inputs.size(); ++i)
      args[i] = val[g.inputs[i]];
    val[g.output] = eval_gate_word(g.kind, args);
    if (force && g.output == force->net)
      val[g.output] = force->value;
  }
  return val;
}

Bits simulate(const Netlist &nl, const Bits &pi_values, const Bits &key_values) {
  if (pi_values.size() != nl.primary_inputs().size())
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(nl.primary_inputs().size()) +
                                               " input values, got " + std::to_string(pi_values.size()));
  if (key_values.size() != nl.key_inputs().size())
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(nl.key_inputs().size()) +
                                               " key values, got " + std::to_string(key_values.size()));
  std::vector<std::uint64_t> pi(pi_values.size()), key(key_values.size());
  for (std::size_t i = 0; i < pi.size(); ++i)
    pi[i] = pi_values[i] ? 1 : 0;
  for (std::size_t i = 0; i < key.size(); ++i)
    key[i] = key_values[i] ? 1 : 0;
  auto val = simulate_words(nl, pi, key);
  Bits out;
  out.reserve(nl.primary_outputs().size());
  for (NetId po : nl.primary_outputs())
    out.push_back((val[po] & 1U) != 0);
  return out;
}

std::vector<NetId> fanin_cone(const Netlist &nl, NetId net) {
  if (net >= nl.num_nets())
    throw Error(ErrorCode::UnknownNet, "unknown net id " + std::to_string(net));
  std::vector<bool> seen(nl.num_nets(), false);
  std::vector<NetId> stack{net}, cone;
  seen[net] = true;
  while (!stack.empty()) {
    NetId n = stack.back();
    stack.pop_back();
    cone.push_back(n);
    if (auto d = nl.driver(n))
      for (NetId in : nl.gates()[*d].inputs)
        if (!seen[in]) {
          seen[in] = true;
          stack.push_back(in);
        }
  }
  std::sort(cone.begin(), cone.end());
  return cone;
}

std::size_t logic_depth(const Netlist &nl) {
  std::vector<std::size_t> depth(nl.num_nets(), 0);
  for (const Gate &g : nl.gates()) {
    std::size_t d = 0;
    for (NetId in : g.inputs)
      d = std::max(d, depth[in]);
    depth[g.output] = d + 1;
  }
  std::size_t best = 0;
  for (NetId po : nl.primary_outputs())
    best = std::max(best, depth[po]);
  return best;
}

std::size_t pin_count(const Netlist &nl) {
  std::size_t n = 0;
  for (const Gate &g : nl.gates())
    n += g.inputs.size();
  return n;
}

std::vector<std::uint64_t> exhaustive_words(std::size_t width, std::uint64_t block) {
  static constexpr std::uint64_t lane_pattern[6] = {
      0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
      0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL,
  };
  std::vector<std::uint64_t> words(width);
  for (std::size_t i = 0; i < width; ++i) {
    std::size_t bit = width - 1 - i; // variable 0 is the MSB of the index
    if (bit < 6)
      words[i] = lane_pattern[bit];
    else
      words[i] = ((block >> (bit - 6)) & 1U) ? ~std::uint64_t{0} : 0;
  }
  return words;
}

} // namespace sublock
