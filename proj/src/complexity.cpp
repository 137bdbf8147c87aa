#include "complexity.hpp"

#include "common.hpp"

namespace sublock {

mpz_class attempts_conventional(std::uint32_t k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, k);
  return r;
}

mpz_class attempts_antisat(std::uint32_t k) {
  if (k % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "the Anti-SAT count needs an even key width");
  return attempts_conventional(k / 2);
}

namespace {

// acc <- 1 + j * acc for j = a..b-1, as acc' = p * acc + q.
void split(std::uint64_t a, std::uint64_t b, mpz_class &p, mpz_class &q) {
  if (b - a == 1) {
    p = static_cast<unsigned long>(a);
    q = 1;
    return;
  }
  std::uint64_t m = a + (b - a) / 2;
  mpz_class p1, q1, p2, q2;
  split(a, m, p1, q1);
  split(m, b, p2, q2);
  p = p2 * p1;
  q = p2 * q1 + q2;
}

} // namespace

mpz_class permuted_combinations(std::uint64_t l) {
  if (l == 0)
    throw Error(ErrorCode::InvalidArgument, "permuted combinations need l >= 1");
  if (l > max_exact_l)
    throw Error(ErrorCode::ScaleBound, "l = " + std::to_string(l) + " exceeds the exact limit of 2^20");
  // l + l(l-1) + ... + l! = l * (1 + (l-1) * (1 + ... (1 + 1 * 1))), with the
  // nested products grouped pairwise so large l stays tractable.
  if (l == 1)
    return 1;
  mpz_class p, q;
  split(1, l, p, q);
  return mpz_class(static_cast<unsigned long>(l)) * (p + q);
}

mpz_class permuted_combinations_factorial_form(std::uint64_t l) {
  if (l == 0)
    throw Error(ErrorCode::InvalidArgument, "permuted combinations need l >= 1");
  if (l > max_exact_l)
    throw Error(ErrorCode::ScaleBound, "l = " + std::to_string(l) + " exceeds the exact limit of 2^20");
  mpz_class fact;
  mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(l));
  // l!/j! is exact for j < l.
  mpz_class sum = 0, jfact = 1;
  for (std::uint64_t j = 0; j < l; ++j) {
    if (j > 0)
      jfact *= static_cast<unsigned long>(j);
    sum += fact / jfact;
  }
  return sum;
}

Attempts attempts_total(std::uint32_t k) {
  Attempts a;
  a.k = k;
  a.l = attempts_conventional(k);
  a.lambda = attempts_conventional(k / 2);
  if (k <= 20) {
    a.pc = permuted_combinations(std::uint64_t{1} << k);
    a.total = a.l + *a.pc;
    a.increased = *a.total - a.l;
  }
  return a;
}

} // namespace sublock
