#include "sparsez/integer.hpp"

#include <limits>

#include "sparsez/error.hpp"

namespace sparsez {

namespace {

bool valid_decimal(std::string_view text) {
  if (text.empty()) return false;
  std::size_t i = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (i == text.size()) return false;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  return true;
}

}  // namespace

Integer parse_integer(std::string_view text) {
  if (!valid_decimal(text)) {
    throw Error(ErrorCode::InvalidSpec,
                "not a decimal integer: '" + std::string(text) + "'");
  }
  std::string digits(text[0] == '+' ? text.substr(1) : text);
  return Integer(digits, 10);
}

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text));
  Integer num = parse_integer(text.substr(0, slash));
  Integer den = parse_integer(text.substr(slash + 1));
  if (den == 0) throw Error(ErrorCode::InvalidSpec, "zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string to_decimal(const Integer& value) { return value.get_str(10); }

std::string to_decimal(const Rational& value) { return value.get_str(10); }

Integer ipow(const Integer& base, unsigned long exponent) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exponent);
  return out;
}

std::optional<std::int64_t> to_int64(const Integer& value) {
  static const Integer lo(std::to_string(std::numeric_limits<std::int64_t>::min()));
  static const Integer hi(std::to_string(std::numeric_limits<std::int64_t>::max()));
  if (value < lo || value > hi) return std::nullopt;
  if (value.fits_slong_p()) return static_cast<std::int64_t>(value.get_si());
  return std::stoll(value.get_str());
}

std::int64_t checked_int64(const Integer& value, std::string_view what) {
  auto v = to_int64(value);
  if (!v) {
    throw Error(ErrorCode::UnsupportedBound,
                std::string(what) + " does not fit in 64 bits: " + to_decimal(value));
  }
  return *v;
}

Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

Integer floor_mod(const Integer& a, const Integer& b) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

unsigned long floor_log(const Integer& value, const Integer& base) {
  unsigned long e = 0;
  Integer p = base;
  while (p <= value) {
    ++e;
    p *= base;
  }
  return e;
}

}  // namespace sparsez
