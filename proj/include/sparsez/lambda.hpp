#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "sparsez/integer.hpp"
#include "sparsez/real.hpp"

namespace sparsez {

/// A strictly increasing sequence of positive reals (lambda_n).
struct LambdaSpec {
  // lambda_n = tau^n, n >= 0.
  struct PowerOfReal {
    CertifiedReal tau;
  };
  struct Step {
    Integer multiplier;
    std::size_t tau_index;
  };
  // lambda_0 = taus[0], lambda_{n+1} = c_n * taus[i_n] * lambda_n. The step
  // list is applied cyclically.
  struct Recursive {
    std::vector<CertifiedReal> taus;
    std::vector<Step> steps;
  };
  // Finite sequence lambda_n = values[n].
  struct ExplicitRationals {
    std::vector<Rational> values;
  };

  std::variant<PowerOfReal, Recursive, ExplicitRationals> kind;
  bool independence_declared = false;

  static LambdaSpec power(CertifiedReal tau, bool independent = false) {
    return LambdaSpec{PowerOfReal{std::move(tau)}, independent};
  }
};

/// Integer polynomial perturbation g(n) = sum_j coefficients[j] * n^j.
struct PerturbSpec {
  std::vector<Integer> coefficients;

  Integer at(std::size_t n) const;
  bool is_zero() const;
};

}  // namespace sparsez
