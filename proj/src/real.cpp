#include "sparsez/real.hpp"

#include <algorithm>
#include <cstdlib>
#include <utility>
#include <vector>

#include "sparsez/error.hpp"

namespace sparsez {

Interval::Interval(mpfr_prec_t precision) {
  mpfr_init2(lo_, precision);
  mpfr_init2(hi_, precision);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

Interval::Interval(const Interval& other) {
  mpfr_init2(lo_, other.precision());
  mpfr_init2(hi_, other.precision());
  mpfr_set(lo_, other.lo_, MPFR_RNDD);
  mpfr_set(hi_, other.hi_, MPFR_RNDU);
}

Interval::Interval(Interval&& other) noexcept : Interval(other) {}

Interval& Interval::operator=(const Interval& other) {
  if (this != &other) {
    mpfr_set_prec(lo_, other.precision());
    mpfr_set_prec(hi_, other.precision());
    mpfr_set(lo_, other.lo_, MPFR_RNDD);
    mpfr_set(hi_, other.hi_, MPFR_RNDU);
  }
  return *this;
}

Interval& Interval::operator=(Interval&& other) noexcept {
  if (this != &other) {
    mpfr_swap(lo_, other.lo_);
    mpfr_swap(hi_, other.hi_);
  }
  return *this;
}

Interval::~Interval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

Interval Interval::exact(const Rational& value, mpfr_prec_t precision) {
  Interval out(precision);
  mpfr_set_q(out.lo_, value.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(out.hi_, value.get_mpq_t(), MPFR_RNDU);
  return out;
}

Interval Interval::exact(long value, mpfr_prec_t precision) {
  Interval out(precision);
  mpfr_set_si(out.lo_, value, MPFR_RNDD);
  mpfr_set_si(out.hi_, value, MPFR_RNDU);
  return out;
}

namespace {

mpfr_prec_t joint(const Interval& a, const Interval& b) {
  return std::max(a.precision(), b.precision());
}

}  // namespace

Interval operator+(const Interval& a, const Interval& b) {
  Interval out(joint(a, b));
  mpfr_add(out.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_add(out.hi_, a.hi_, b.hi_, MPFR_RNDU);
  return out;
}

Interval operator-(const Interval& a, const Interval& b) {
  Interval out(joint(a, b));
  mpfr_sub(out.lo_, a.lo_, b.hi_, MPFR_RNDD);
  mpfr_sub(out.hi_, a.hi_, b.lo_, MPFR_RNDU);
  return out;
}

Interval operator*(const Interval& a, const Interval& b) {
  const mpfr_prec_t prec = joint(a, b);
  Interval out(prec);
  mpfr_t t;
  mpfr_init2(t, prec);
  mpfr_srcptr xs[2] = {a.lo_, a.hi_};
  mpfr_srcptr ys[2] = {b.lo_, b.hi_};
  bool first = true;
  for (auto x : xs) {
    for (auto y : ys) {
      mpfr_mul(t, x, y, MPFR_RNDD);
      if (first || mpfr_less_p(t, out.lo_)) mpfr_set(out.lo_, t, MPFR_RNDD);
      mpfr_mul(t, x, y, MPFR_RNDU);
      if (first || mpfr_greater_p(t, out.hi_)) mpfr_set(out.hi_, t, MPFR_RNDU);
      first = false;
    }
  }
  mpfr_clear(t);
  return out;
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) {
    throw Error(ErrorCode::PrecisionExhausted, "interval division by a range containing 0");
  }
  Interval inv(b.precision());
  mpfr_ui_div(inv.lo_, 1, b.hi_, MPFR_RNDD);
  mpfr_ui_div(inv.hi_, 1, b.lo_, MPFR_RNDU);
  return a * inv;
}

Interval Interval::operator-() const {
  Interval out(precision());
  mpfr_neg(out.lo_, hi_, MPFR_RNDD);
  mpfr_neg(out.hi_, lo_, MPFR_RNDU);
  return out;
}

Interval Interval::abs() const {
  if (mpfr_sgn(lo_) >= 0) return *this;
  if (mpfr_sgn(hi_) <= 0) return -*this;
  Interval out(precision());
  mpfr_set_zero(out.lo_, 1);
  if (mpfr_cmpabs(lo_, hi_) > 0) {
    mpfr_neg(out.hi_, lo_, MPFR_RNDU);
  } else {
    mpfr_set(out.hi_, hi_, MPFR_RNDU);
  }
  return out;
}

Interval Interval::pow(unsigned long exponent) const {
  Interval out(precision());
  mpfr_pow_ui(out.lo_, lo_, exponent, MPFR_RNDD);
  mpfr_pow_ui(out.hi_, hi_, exponent, MPFR_RNDU);
  return out;
}

bool Interval::contains_zero() const {
  return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0;
}

bool Interval::certainly_less(const Interval& other) const {
  return mpfr_less_p(hi_, other.lo_) != 0;
}

bool Interval::overlaps(const Interval& other) const {
  return !certainly_less(other) && !other.certainly_less(*this);
}

std::optional<Integer> Interval::certified_floor() const {
  Integer flo;
  Integer fhi;
  mpfr_get_z(flo.get_mpz_t(), lo_, MPFR_RNDD);
  mpfr_get_z(fhi.get_mpz_t(), hi_, MPFR_RNDD);
  if (flo != fhi) return std::nullopt;
  return flo;
}

double Interval::midpoint() const {
  return 0.5 * (mpfr_get_d(lo_, MPFR_RNDN) + mpfr_get_d(hi_, MPFR_RNDN));
}

std::string Interval::lower_string(int digits) const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*RDg", digits, lo_);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

std::string Interval::upper_string(int digits) const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*RUg", digits, hi_);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

Interval Interval::min(const Interval& a, const Interval& b) {
  Interval out(joint(a, b));
  mpfr_min(out.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_min(out.hi_, a.hi_, b.hi_, MPFR_RNDU);
  return out;
}

CertifiedReal CertifiedReal::rational(const Rational& value) {
  return CertifiedReal(Kind::Rational, value);
}

CertifiedReal CertifiedReal::pi() { return CertifiedReal(Kind::Pi, Rational(0)); }

CertifiedReal CertifiedReal::e() { return CertifiedReal(Kind::E, Rational(0)); }

CertifiedReal CertifiedReal::sqrt(const Rational& radicand) {
  if (radicand <= 0) {
    throw Error(ErrorCode::InvalidSpec, "square root of a nonpositive rational");
  }
  const Integer& num = radicand.get_num();
  const Integer& den = radicand.get_den();
  if (mpz_perfect_square_p(num.get_mpz_t()) && mpz_perfect_square_p(den.get_mpz_t())) {
    Integer rn;
    Integer rd;
    mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
    Rational root(rn, rd);
    root.canonicalize();
    return rational(root);
  }
  return CertifiedReal(Kind::Sqrt, radicand);
}

CertifiedReal CertifiedReal::parse(std::string_view text) {
  if (text == "pi") return pi();
  if (text == "e") return e();
  if (text.starts_with("sqrt:")) return sqrt(parse_rational(text.substr(5)));
  if (text.starts_with("sqrt") && text.size() > 4) return sqrt(parse_rational(text.substr(4)));
  return rational(parse_rational(text));
}

std::string CertifiedReal::name() const {
  switch (kind_) {
    case Kind::Rational: return to_decimal(value_);
    case Kind::Pi: return "pi";
    case Kind::E: return "e";
    case Kind::Sqrt: return "sqrt:" + to_decimal(value_);
  }
  return {};
}

Interval CertifiedReal::enclose(mpfr_prec_t precision) const {
  Interval out(precision);
  switch (kind_) {
    case Kind::Rational:
      return Interval::exact(value_, precision);
    case Kind::Pi:
      mpfr_const_pi(out.lower(), MPFR_RNDD);
      mpfr_const_pi(out.upper(), MPFR_RNDU);
      return out;
    case Kind::E:
      mpfr_set_ui(out.lower(), 1, MPFR_RNDD);
      mpfr_set_ui(out.upper(), 1, MPFR_RNDU);
      mpfr_exp(out.lower(), out.lower(), MPFR_RNDD);
      mpfr_exp(out.upper(), out.upper(), MPFR_RNDU);
      return out;
    case Kind::Sqrt: {
      Interval r = Interval::exact(value_, precision);
      mpfr_sqrt(out.lower(), r.lower(), MPFR_RNDD);
      mpfr_sqrt(out.upper(), r.upper(), MPFR_RNDU);
      return out;
    }
  }
  return out;
}

namespace {

Rational rational_pow(const Rational& base, long exponent) {
  Rational out(1);
  Rational b = exponent < 0 ? Rational(1) / base : base;
  for (long i = 0; i < std::labs(exponent); ++i) out *= b;
  return out;
}

long floor_half(long e) { return e >= 0 ? e / 2 : -((-e + 1) / 2); }

// Factorization of n > 0 by trial division up to 10^6. A leftover that is
// not a perfect square is kept as a single factor.
std::vector<std::pair<Integer, long>> radical_factors(Integer n) {
  std::vector<std::pair<Integer, long>> out;
  for (unsigned long p = 2; p <= 1'000'000 && Integer(p) * p <= n; ++p) {
    long a = 0;
    while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
      mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
      ++a;
    }
    if (a > 0) out.emplace_back(Integer(p), a);
  }
  if (n > 1) {
    if (mpz_perfect_square_p(n.get_mpz_t())) {
      Integer root;
      mpz_sqrt(root.get_mpz_t(), n.get_mpz_t());
      out.emplace_back(root, 2);
    } else {
      out.emplace_back(n, 1);
    }
  }
  return out;
}

}  // namespace

void SymbolicTerm::multiply(const CertifiedReal& real, long exponent) {
  if (exponent == 0) return;
  if (real.is_rational()) {
    coefficient *= rational_pow(real.value(), exponent);
    return;
  }
  if (real.kind() != CertifiedReal::Kind::Sqrt) {
    const std::string key = real.name();
    const long e = monomial[key] + exponent;
    if (e == 0) {
      monomial.erase(key);
    } else {
      monomial[key] = e;
    }
    return;
  }
  // sqrt(n/d) = sqrt(n d) / d, and sqrt(n d) splits into square roots of
  // primes, which are linearly independent over the rationals.
  const Integer& den = real.value().get_den();
  coefficient *= rational_pow(Rational(den), -exponent);
  for (const auto& [p, a] : radical_factors(real.value().get_num() * den)) {
    const std::string key = "sqrt:" + to_decimal(p);
    long e = monomial[key] + a * exponent;
    const long half = floor_half(e);
    coefficient *= rational_pow(Rational(p), half);
    e -= 2 * half;
    if (e == 0) {
      monomial.erase(key);
    } else {
      monomial[key] = e;
    }
  }
}

void SymbolicTerm::divide(const SymbolicTerm& other) {
  coefficient /= other.coefficient;
  for (const auto& [name, e] : other.monomial) {
    multiply(CertifiedReal::parse(name), -e);
  }
}

Interval SymbolicTerm::enclose(mpfr_prec_t precision) const {
  Interval out = Interval::exact(coefficient, precision);
  for (const auto& [name, e] : monomial) {
    Interval base = CertifiedReal::parse(name).enclose(precision);
    if (e > 0) {
      out = out * base.pow(static_cast<unsigned long>(e));
    } else {
      out = out / base.pow(static_cast<unsigned long>(-e));
    }
  }
  return out;
}

}  // namespace sparsez
