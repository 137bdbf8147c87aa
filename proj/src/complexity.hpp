#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>

namespace sublock {

/// Brute-force attempt counts for a k-bit key.
struct Attempts {
  std::uint32_t k = 0;
  mpz_class l;      // 2^k key sequences
  mpz_class lambda; // 2^(k/2); floor for odd k
  std::optional<mpz_class> pc;
  std::optional<mpz_class> total;
  std::optional<mpz_class> increased;
};

/// Largest l accepted by permuted_combinations.
inline constexpr std::uint64_t max_exact_l = std::uint64_t{1} << 20;

mpz_class attempts_conventional(std::uint32_t k);
/// Throws InvalidArgument for odd k.
mpz_class attempts_antisat(std::uint32_t k);
/// Sum over r = 1..l of l!/(l-r)!, the ordered nonempty selections of
/// distinct items from l. Throws ScaleBound above max_exact_l.
mpz_class permuted_combinations(std::uint64_t l);
/// The same count via l! * sum_{j=0}^{l-1} 1/j!, evaluated in integers.
mpz_class permuted_combinations_factorial_form(std::uint64_t l);
/// pc, total and increased are left empty when 2^k exceeds max_exact_l.
Attempts attempts_total(std::uint32_t k);

} // namespace sublock
