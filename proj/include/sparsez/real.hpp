#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <mpfr.h>

#include "sparsez/integer.hpp"

namespace sparsez {

/// Closed interval [lower, upper] with MPFR endpoints rounded outward.
/// Every arithmetic result encloses the exact result of the operation on
/// any points of the operands.
class Interval {
 public:
  explicit Interval(mpfr_prec_t precision);
  Interval(const Interval& other);
  Interval(Interval&& other) noexcept;
  Interval& operator=(const Interval& other);
  Interval& operator=(Interval&& other) noexcept;
  ~Interval();

  static Interval exact(const Rational& value, mpfr_prec_t precision);
  static Interval exact(long value, mpfr_prec_t precision);

  mpfr_prec_t precision() const { return mpfr_get_prec(lo_); }
  mpfr_srcptr lower() const { return lo_; }
  mpfr_srcptr upper() const { return hi_; }
  mpfr_ptr lower() { return lo_; }
  mpfr_ptr upper() { return hi_; }

  friend Interval operator+(const Interval& a, const Interval& b);
  friend Interval operator-(const Interval& a, const Interval& b);
  friend Interval operator*(const Interval& a, const Interval& b);
  // Throws Error(PrecisionExhausted) when the divisor straddles zero.
  friend Interval operator/(const Interval& a, const Interval& b);
  Interval operator-() const;

  Interval abs() const;
  // Requires a nonnegative interval.
  Interval pow(unsigned long exponent) const;

  bool contains_zero() const;
  bool certainly_positive() const { return mpfr_sgn(lo_) > 0; }
  bool certainly_negative() const { return mpfr_sgn(hi_) < 0; }
  bool certainly_less(const Interval& other) const;
  bool overlaps(const Interval& other) const;
  bool is_point() const { return mpfr_equal_p(lo_, hi_) != 0; }

  /// The common floor of both endpoints, if they agree.
  std::optional<Integer> certified_floor() const;

  double midpoint() const;
  std::string lower_string(int digits = 20) const;
  std::string upper_string(int digits = 20) const;

  // Enclosure of min(a, b) over the two ranges.
  static Interval min(const Interval& a, const Interval& b);

 private:
  mpfr_t lo_;
  mpfr_t hi_;
};

/// A real number given by a name that can be enclosed to any precision:
/// a rational, pi, e, or the square root of a positive rational.
class CertifiedReal {
 public:
  enum class Kind { Rational, Pi, E, Sqrt };

  static CertifiedReal rational(const Rational& value);
  static CertifiedReal pi();
  static CertifiedReal e();
  // Perfect-square radicands collapse to the rational root.
  static CertifiedReal sqrt(const Rational& radicand);

  /// Accepts "pi", "e", "sqrt2", "sqrt:<rational>", or a rational literal.
  static CertifiedReal parse(std::string_view text);

  Kind kind() const { return kind_; }
  // The rational value, or the radicand for Kind::Sqrt.
  const Rational& value() const { return value_; }
  bool is_rational() const { return kind_ == Kind::Rational; }

  /// Canonical token; parse(name()) round-trips.
  std::string name() const;

  Interval enclose(mpfr_prec_t precision) const;

  friend bool operator==(const CertifiedReal& a, const CertifiedReal& b) {
    return a.kind_ == b.kind_ && a.value_ == b.value_;
  }

 private:
  CertifiedReal(Kind kind, Rational value) : kind_(kind), value_(std::move(value)) {}

  Kind kind_;
  Rational value_;
};

/// coefficient * prod(name^exponent) over non-rational certified reals.
/// Distinct canonical terms are treated as distinct reals, which is the
/// declared algebraic independence of the named constants.
struct SymbolicTerm {
  Rational coefficient = 1;
  std::map<std::string, long> monomial;

  // Folds rational factors into the coefficient and even powers of square
  // roots into their radicand.
  void multiply(const CertifiedReal& real, long exponent = 1);
  void multiply(const Rational& factor) { coefficient *= factor; }
  void divide(const SymbolicTerm& other);

  bool is_rational() const { return monomial.empty(); }
  Interval enclose(mpfr_prec_t precision) const;

  friend bool operator==(const SymbolicTerm&, const SymbolicTerm&) = default;
};

}  // namespace sparsez
