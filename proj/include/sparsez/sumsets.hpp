#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparsez/budgets.hpp"
#include "sparsez/core.hpp"
#include "sparsez/integer.hpp"

namespace sparsez {

/// Sums of at most n elements of ±A (the empty sum included), cut to
/// [-range, range]. Summands come only from the source window, so this is
/// a lower bound on the true intersection.
struct SignedSumsetWindow {
  std::vector<std::int64_t> values;
  unsigned n = 0;
  Integer source_bound;
  std::int64_t range = 0;

  bool contains(std::int64_t x) const;
};

// Throws Error(BudgetExceeded) when the half sumsets or the pair scan pass
// budgets.elements.
SignedSumsetWindow signed_sumset(const Window& window, unsigned n,
                                 std::int64_t range,
                                 const Budgets& budgets = {});

/// The sumset at source bound B and 2B; stabilized when both agree.
struct SumsetProbe {
  SignedSumsetWindow at_bound;
  SignedSumsetWindow at_double;
  bool stabilized = false;
};

SumsetProbe signed_sumset_probe(const SetSpec& spec, const Integer& source_bound,
                                unsigned n, std::int64_t range,
                                const Budgets& budgets = {});

/// Smallest d in [1, d_max] with dZ ∩ [-range, range] inside the sumset.
std::optional<std::int64_t> full_residue_class(const SignedSumsetWindow& sumset,
                                               std::int64_t d_max);

struct ArithmeticProgression {
  std::size_t length = 0;
  std::int64_t start = 0;
  std::int64_t diff = 0;

  friend bool operator==(const ArithmeticProgression&,
                         const ArithmeticProgression&) = default;
};

/// Longest progression with common difference >= min_diff inside the sorted
/// set S. Ties go to the smallest difference, then the smallest start. A
/// singleton set gives length 1 with diff = min_diff; the empty set gives
/// length 0.
ArithmeticProgression longest_ap(std::span<const std::int64_t> sorted,
                                 std::int64_t min_diff = 1);

struct DensityReport {
  struct Checkpoint {
    Integer m;
    Integer count;
    Rational ratio;
  };
  std::vector<Checkpoint> rows;
};

/// |S ∩ [1, m]| / m at each checkpoint m. Throws Error(BoundExceeded) past
/// the window bound.
DensityReport density_report(const Window& window,
                             std::span<const Integer> checkpoints);
DensityReport density_report(std::span<const std::int64_t> sorted,
                             std::int64_t exact_bound,
                             std::span<const Integer> checkpoints);

/// Least n with Σ_n(C ∪ {0,1}) ⊇ [0, M], unsigned sums only. Throws
/// Error(NotFoundUpTo) past n_cap and Error(BoundExceeded) when C is not
/// exact up to M.
unsigned additive_basis_witness(const Window& c, std::int64_t m,
                                unsigned n_cap = 64);
unsigned additive_basis_witness(std::span<const std::int64_t> sorted,
                                std::int64_t exact_bound, std::int64_t m,
                                unsigned n_cap = 64);

}  // namespace sparsez
