#include "common.hpp"

namespace sublock {

const char *to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::Parse: return "parse error";
  case ErrorCode::UndefinedNet: return "undefined net";
  case ErrorCode::DuplicateDefinition: return "duplicate definition";
  case ErrorCode::CombinationalCycle: return "combinational cycle";
  case ErrorCode::UnknownGate: return "unknown gate";
  case ErrorCode::LengthMismatch: return "length mismatch";
  case ErrorCode::UnknownNet: return "unknown net";
  case ErrorCode::InvalidArgument: return "invalid argument";
  case ErrorCode::SupportTooLarge: return "support too large";
  case ErrorCode::DependsOutsideSupport: return "output depends outside support";
  case ErrorCode::InfeasiblePlan: return "infeasible key plan";
  case ErrorCode::CannotForceDependency: return "cannot force dependency";
  case ErrorCode::InsufficientCandidates: return "insufficient candidates";
  case ErrorCode::EquivalenceFailure: return "equivalence failure";
  case ErrorCode::UniversalKeyGate: return "universal key gate failure";
  case ErrorCode::IterationBudgetExceeded: return "iteration budget exceeded";
  case ErrorCode::ArityMismatch: return "arity mismatch";
  case ErrorCode::ScaleBound: return "scale bound exceeded";
  case ErrorCode::Io: return "i/o error";
  case ErrorCode::Internal: return "internal error";
  }
  return "unknown error";
}

ParseError::ParseError(ErrorCode code, int line, int column, const std::string &msg)
    : Error(code, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line), column_(column) {}

InsufficientCandidates::InsufficientCandidates(std::size_t requested, std::size_t achievable)
    : Error(ErrorCode::InsufficientCandidates,
            "requested " + std::to_string(requested) + " disjoint cuts but at most " +
                std::to_string(achievable) + " are available"),
      requested_(requested), achievable_(achievable) {}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound <= 1)
    return 0;
  // rejection sampling on the top of the range
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    std::uint64_t r = next();
    if (r < limit)
      return r % bound;
  }
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x5b1c0c4bULL)));
}

std::string bits_to_string(const Bits &b) {
  std::string s;
  s.reserve(b.size());
  for (bool v : b)
    s.push_back(v ? '1' : '0');
  return s;
}

Bits bits_from_string(const std::string &s) {
  Bits b;
  b.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw Error(ErrorCode::InvalidArgument, "not a bit string: '" + s + "'");
    b.push_back(c == '1');
  }
  return b;
}

Bits bits_of(std::uint64_t value, std::size_t width) {
  Bits b(width);
  for (std::size_t i = 0; i < width; ++i)
    b[i] = ((value >> (width - 1 - i)) & 1U) != 0;
  return b;
}

std::uint64_t bits_value(const Bits &b) {
  std::uint64_t v = 0;
  for (bool x : b)
    v = (v << 1) | (x ? 1U : 0U);
  return v;
}

} // namespace sublock
