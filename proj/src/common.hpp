#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sublock {

/// Bit vector used for input patterns, key assignments and output values.
using Bits = std::vector<bool>;

enum class ErrorCode {
  Parse,
  UndefinedNet,
  DuplicateDefinition,
  CombinationalCycle,
  UnknownGate,
  LengthMismatch,
  UnknownNet,
  InvalidArgument,
  SupportTooLarge,
  DependsOutsideSupport,
  InfeasiblePlan,
  CannotForceDependency,
  InsufficientCandidates,
  EquivalenceFailure,
  UniversalKeyGate,
  IterationBudgetExceeded,
  ArityMismatch,
  ScaleBound,
  Io,
  Internal,
};

const char *to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

class ParseError : public Error {
public:
  ParseError(ErrorCode code, int line, int column, const std::string &msg);
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

class InsufficientCandidates : public Error {
public:
  InsufficientCandidates(std::size_t requested, std::size_t achievable);
  std::size_t requested() const { return requested_; }
  std::size_t achievable() const { return achievable_; }

private:
  std::size_t requested_;
  std::size_t achievable_;
};

/// Seeded generator with a portable bounded draw. std::uniform_int_distribution
/// is implementation-defined, so it is avoided to keep outputs identical across
/// standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t bound);
  bool coin() { return (next() >> 63) != 0; }

  /// Independent stream derived from this generator's seed; the same
  /// (seed, stream) pair always yields the same generator.
  Rng split(std::uint64_t stream) const;

  template <typename T> void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// "0101"-style rendering, most significant (index 0) first.
std::string bits_to_string(const Bits &b);
Bits bits_from_string(const std::string &s);
/// Bits of `value` over `width` positions, MSB first.
Bits bits_of(std::uint64_t value, std::size_t width);
std::uint64_t bits_value(const Bits &b);

} // namespace sublock
