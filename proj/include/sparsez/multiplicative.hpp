#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sparsez/budgets.hpp"
#include "sparsez/core.hpp"
#include "sparsez/integer.hpp"

namespace sparsez {

using Generators = std::span<const std::int64_t>;

struct PrimePower {
  std::uint64_t prime;
  unsigned exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Trial division up to budgets.prime_bound. A leftover cofactor below
/// prime_bound^2 is prime and kept; anything larger raises
/// Error(FactorizationIncomplete).
std::vector<PrimePower> factorize(std::int64_t n, const Budgets& budgets = {});

/// Coordinates (n_1, ..., n_d) of q_1^n_1 ... q_d^n_d.
struct ExponentVector {
  std::vector<std::uint32_t> coords;
  auto operator<=>(const ExponentVector&) const = default;
};

/// Exact sorted Gamma(Q) ∩ [1, bound] by a heap merge. Throws
/// Error(BudgetExceeded) past budgets.elements values.
Window enumerate_monoid(Generators q, const Integer& bound, const Budgets& budgets = {});

Integer exponent_encode(Generators q, const ExponentVector& n);

// Throws Error(NotIndependent) or Error(NotInMonoid).
ExponentVector exponent_decode(Generators q, const Integer& x,
                               const Budgets& budgets = {});

struct IndependenceCertificate {
  bool independent = false;
  std::vector<std::uint64_t> primes;
  // Row i holds the prime exponents of q_i.
  std::vector<std::vector<long>> exponent_matrix;
  std::size_t rank = 0;
  // When dependent: nonzero n with prod q_i^n_i = 1, first nonzero entry
  // positive, entries coprime.
  std::vector<Integer> relation;
};

IndependenceCertificate is_mult_independent(Generators q,
                                            const Budgets& budgets = {});

struct LacunarityVerdict {
  struct Lacunary {
    std::int64_t base;
    // (generator, e) with generator = base^e.
    std::vector<std::pair<std::int64_t, unsigned>> exponents;
  };
  struct NonLacunary {
    std::int64_t a;
    std::int64_t b;
  };
  std::variant<Lacunary, NonLacunary> verdict;

  bool is_lacunary() const {
    return std::holds_alternative<Lacunary>(verdict);
  }
};

LacunarityVerdict classify_lacunary(Generators q, const Budgets& budgets = {});

struct RatioStatistics {
  Rational max_tail_ratio;
  Rational min_tail_ratio;
  std::size_t ratios_considered = 0;
};

// Consecutive ratios a_{i+1}/a_i over the last ceil(tail_fraction * (|w|-1))
// gaps. Throws Error(WindowTooSmall) for |w| < 3.
RatioStatistics ratio_statistics(const Window& window, double tail_fraction);

/// Partition of the generators by q ~ r iff log_q r is rational, with the
/// per-class base b, lcm u of the exponents log_b r, and c = b^u.
struct CommonBaseReduction {
  struct BaseClass {
    std::vector<std::int64_t> members;
    std::int64_t base;
    std::uint64_t lcm;
    Integer combined;
  };
  struct Placement {
    std::int64_t generator;
    std::size_t class_index;
    // generator = base^v and lcm = k * v.
    std::uint64_t v;
    std::uint64_t k;
  };
  std::vector<BaseClass> classes;
  std::vector<Placement> placements;
};

CommonBaseReduction common_base_reduction(Generators q,
                                          const Budgets& budgets = {});

/// A = union of c_i^N as a set specification.
SetSpec reduction_union_spec(const CommonBaseReduction& reduction);

struct ReductionReport {
  bool passed = true;
  Integer bound;
  std::uint64_t checks = 0;
  // Set on failure: which equivalence broke and at which x.
  std::optional<std::string> failed_claim;
  std::optional<Integer> counterexample;
};

/// Checks for every x in [1, bound]:
///   x in c_i^N  <=>  c_i^m x in A for all 1 <= m <= t, and
///   x in q^N    <=>  q^m x in c^N for some 0 <= m <= k-1.
ReductionReport verify_reduction_claims(const CommonBaseReduction& reduction,
                                        const Integer& bound);

}  // namespace sparsez
