#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace motint {

using Integer = mpz_class;
using Rational = mpq_class;

/// Trial division; throws for p >= 2^31.
bool is_prime(std::uint64_t p);

Integer ipow(const Integer& base, unsigned long e);
Rational rpow(const Rational& base, long e);

/// Exact "a/b" text, or "a" when the denominator is 1.
std::string to_string(const Rational& q);
std::string to_string(const Integer& z);

Rational parse_rational(const std::string& s);

/// p-adic valuation of a nonzero integer.
int padic_val(const Integer& z, std::uint32_t p);

/// Solves A x = b exactly; nullopt when A is singular. A is n x n.
std::optional<std::vector<Rational>> solve_linear(std::vector<std::vector<Rational>> A, std::vector<Rational> b);

/// Primes in [lo, hi].
std::vector<std::uint32_t> primes_in(std::uint32_t lo, std::uint32_t hi);

}  // namespace motint
