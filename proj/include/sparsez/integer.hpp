#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace sparsez {

using Integer = mpz_class;
using Rational = mpq_class;

/// Parses a base-10 integer with an optional leading sign. Throws
/// Error(InvalidSpec) on anything else.
Integer parse_integer(std::string_view text);

/// Parses "p", "-p" or "p/q" into a canonical rational.
Rational parse_rational(std::string_view text);

std::string to_decimal(const Integer& value);
std::string to_decimal(const Rational& value);

Integer ipow(const Integer& base, unsigned long exponent);

std::optional<std::int64_t> to_int64(const Integer& value);

// Throws Error(UnsupportedBound) naming `what` when the value does not fit.
std::int64_t checked_int64(const Integer& value, std::string_view what);

Integer floor_div(const Integer& a, const Integer& b);
Integer floor_mod(const Integer& a, const Integer& b);

// Largest e with base^e <= value, for base >= 2 and value >= 1.
unsigned long floor_log(const Integer& value, const Integer& base);

}  // namespace sparsez
