#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsez/budgets.hpp"
#include "sparsez/core.hpp"
#include "sparsez/integer.hpp"
#include "sparsez/multiplicative.hpp"

namespace sparsez {

/// Coefficients c in {-1, 1}^k, k >= 1.
class SignVector {
 public:
  explicit SignVector(std::vector<int> signs);
  // "1,-1,1" or "+-+".
  static SignVector parse(std::string_view text);
  // All 2^k sign vectors in lexicographic order with -1 < 1.
  static std::vector<SignVector> all(std::size_t k);

  std::size_t size() const { return signs_.size(); }
  int operator[](std::size_t i) const { return signs_[i]; }
  const std::vector<int>& signs() const { return signs_; }
  std::string to_string() const;

  friend bool operator==(const SignVector&, const SignVector&) = default;

 private:
  std::vector<int> signs_;
};

/// True when sum c_i x_i = r and every proper nonempty signed subsum is
/// nonzero. For k = 1 this is c_1 x_1 = r.
bool is_dotted(std::span<const Integer> values, const SignVector& signs,
               const Integer& target);

struct EquationQuery {
  SignVector signs;
  Integer target;
  Window domain;
};

struct DottedSolutionSet {
  std::vector<std::vector<Integer>> solutions;
  Integer source_bound;
};

// Lexicographically sorted. Throws Error(BudgetExceeded) when
// |domain|^(k-1) passes budgets.elements.
DottedSolutionSet dotted_solutions(const EquationQuery& query,
                                   const Budgets& budgets = {});

/// Dotted solution counts of c·x ≐ r over every c in {-1,1}^k and r in
/// [1, R]; counting over all sign vectors is the same as counting solutions
/// of x_1 + ... + x_k ≐ r in (±domain)^k.
struct WeightedSumProfile {
  unsigned k = 0;
  std::int64_t max_target = 0;
  // totals[r - 1]
  std::vector<std::uint64_t> totals;
  // per_sign[s][r - 1] for SignVector::all(k)[s]
  std::vector<std::vector<std::uint64_t>> per_sign;
  std::uint64_t max = 0;
  std::int64_t argmax = 0;
};

WeightedSumProfile weighted_sum_profile(const Window& domain, unsigned k,
                                        std::int64_t max_target,
                                        const Budgets& budgets = {});

/// d*k exponents in block order: block i holds the exponent vector of x_i.
using ExponentTuple = std::vector<std::uint32_t>;

/// Every tuple in [0, box]^{dk} with sum c_i f(n_i) ≐ r, sorted. Throws
/// Error(NotIndependent) for dependent Q.
std::vector<ExponentTuple> box_solutions(Generators q, const SignVector& signs,
                                         const Integer& target, unsigned box,
                                         const Budgets& budgets = {});

/// Subtracts the per-axis minimum over blocks, so every axis has a zero.
ExponentTuple orbit_minimal(const ExponentTuple& tuple, std::size_t d);

/// Representatives of solutions to c·x ≐ 0 modulo scalar equivalence.
std::vector<ExponentTuple> scalar_classes(Generators q, const SignVector& signs,
                                          unsigned box,
                                          const Budgets& budgets = {});

struct OrbitDecomposition {
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<ExponentTuple> base_points;
  unsigned box = 0;
};

/// Orbit-minimal representatives of X(c, 0) found in the box, kept when all
/// coordinates are <= box - margin.
OrbitDecomposition orbit_decompose(Generators q, const SignVector& signs,
                                   unsigned box, unsigned margin = 2,
                                   const Budgets& budgets = {});

struct OrbitVerification {
  bool passed = true;
  unsigned box = 0;
  std::size_t solutions = 0;
  std::size_t orbit_points = 0;
  // "missed" (a solution outside every orbit) or "spurious" (an orbit point
  // that is not a solution).
  std::optional<std::string> discrepancy_kind;
  std::optional<ExponentTuple> discrepancy;
};

OrbitVerification orbit_verify(const OrbitDecomposition& decomposition,
                               Generators q, const SignVector& signs,
                               unsigned box, const Budgets& budgets = {});

struct FinitenessReport {
  std::vector<ExponentTuple> solutions;
  std::vector<std::vector<Integer>> values;
  std::size_t half_box_count = 0;
  bool stabilized = false;
};

/// Solutions of c·f(n) ≐ r (r != 0) in the box; stabilized when box and
/// box/2 give the same count.
FinitenessReport inhomogeneous_finiteness(Generators q, const SignVector& signs,
                                          const Integer& target, unsigned box,
                                          const Budgets& budgets = {});

}  // namespace sparsez
