#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sparsez/budgets.hpp"
#include "sparsez/core.hpp"
#include "sparsez/equations.hpp"
#include "sparsez/integer.hpp"
#include "sparsez/lambda.hpp"
#include "sparsez/real.hpp"

namespace sparsez {

// Throws Error(InvalidSpec) for empty tau lists, out-of-range step indices,
// nonpositive multipliers, tau <= 1, or non-increasing explicit values.
void validate(const LambdaSpec& spec);

/// Number of defined terms; nullopt for infinite sequences.
std::optional<std::size_t> lambda_length(const LambdaSpec& spec);

/// lambda_n as an exact symbolic term.
SymbolicTerm lambda_term(const LambdaSpec& spec, std::size_t n);

enum class LambdaPurpose { Floor, Ratio };

struct LambdaValue {
  Interval enclosure{64};
  std::optional<Integer> floor;
  // Exact value when lambda_n is rational.
  std::optional<Rational> exact;
};

/// Floor: refines precision until both endpoints share a floor, throwing
/// Error(PrecisionExhausted) at the cap. Ratio: returns the enclosure at
/// working precision.
LambdaValue eval_lambda(const LambdaSpec& spec, std::size_t n,
                        LambdaPurpose purpose, const Budgets& budgets = {});

Integer lambda_floor(const LambdaSpec& spec, std::size_t n,
                     const Budgets& budgets = {});

/// A rational-coefficient relation q*lambda_i - p*lambda_j = 0 with
/// |p|, |q| <= coefficient_bound inside the first `prefix` terms.
struct IntegerRelation {
  std::size_t i;
  std::size_t j;
  Integer p;
  Integer q;
};

std::optional<IntegerRelation> find_integer_relation(
    const LambdaSpec& spec, std::size_t prefix = 12,
    long coefficient_bound = 100);

/// A real quantity: certified enclosure plus exact value when rational.
struct CertifiedValue {
  Interval enclosure{64};
  std::optional<Rational> exact;
};

struct RatioGapReport {
  std::size_t prefix = 0;
  std::size_t distinct_ratios = 0;
  // Minimum distance between distinct ratios lambda_n / lambda_m.
  CertifiedValue min_gap;
  // Smallest ratio strictly above 1, minus 1.
  CertifiedValue min_distance_above_one;
  // inf lambda_{n+1} / lambda_n over n < N.
  CertifiedValue inf_consecutive_ratio;
};

RatioGapReport ratio_min_gap(const LambdaSpec& spec, std::size_t n,
                             const Budgets& budgets = {});

struct EpsilonEntry {
  unsigned k = 0;
  CertifiedValue value;
  std::vector<int> signs;
  std::vector<std::size_t> indices;
  // The minimum over indices <= N/2 matches.
  bool stabilized = false;
};

/// eps_k = min |sum c_i lambda_{n_i}| / max lambda_{n_i} over n_i <= N with
/// every nonempty signed subsum nonzero.
std::vector<EpsilonEntry> epsilon_oracle(const LambdaSpec& spec, unsigned k_max,
                                         std::size_t n,
                                         const Budgets& budgets = {});

/// A ⊆ B + F witnessed on a finite prefix: a_n = b_{f(n)} + r_n.
struct SparseDecomposition {
  Window a;
  Window b;
  LambdaSpec lambda;
  std::vector<Integer> shifts;
  std::vector<std::size_t> f;
  std::vector<Integer> r;
  // max |m - n| with f(m) = f(n).
  std::size_t k_spread = 0;

  std::size_t size() const { return a.size(); }
  const Integer& a_at(std::size_t n) const { return a.elements()[n]; }
};

struct Assignment {
  std::size_t b_index;
  Integer shift;
};

// Throws Error(InconsistentDecomposition) naming the first bad index and
// Error(NotWeaklyIncreasing) when f decreases.
SparseDecomposition build_sparse_decomposition(
    const Window& b, const LambdaSpec& lambda, std::vector<Integer> shifts,
    const std::vector<Assignment>& interleave);

/// A = B = first n terms of floor(lambda_n) + g(n), F = {0}, f = id.
SparseDecomposition perturbed_decomposition(const LambdaSpec& lambda,
                                            const PerturbSpec& perturbation,
                                            std::size_t n,
                                            const Budgets& budgets = {});

/// B = first n_b terms of floor(lambda_n); A lists b_j + s for s in F in
/// order, with f(m) = m / |F|.
SparseDecomposition interleaved_decomposition(const LambdaSpec& lambda,
                                              std::vector<Integer> shifts,
                                              std::size_t n_b,
                                              const Budgets& budgets = {});

/// max |b_n - lambda_n| / lambda_n over the last tail_fraction of B.
CertifiedValue relative_deviation(const SparseDecomposition& dec,
                                  double tail_fraction,
                                  const Budgets& budgets = {});

using IndexTuple = std::vector<std::size_t>;

/// Partition of [k] induced by f(n_i) = f(n_j), cells in order of first
/// member.
std::vector<std::vector<std::size_t>> level_partition(
    const SparseDecomposition& dec, const IndexTuple& tuple);

// A(c, r) and A_0(c, r) on the index window [0, window).
std::vector<IndexTuple> solutions_a(const SparseDecomposition& dec,
                                    const SignVector& signs, const Integer& r,
                                    std::optional<std::size_t> window = {},
                                    const Budgets& budgets = {});
std::vector<IndexTuple> solutions_a0(const SparseDecomposition& dec,
                                     const SignVector& signs, const Integer& r,
                                     std::optional<std::size_t> window = {},
                                     const Budgets& budgets = {});

struct FinitenessProbe {
  std::size_t window1 = 0;
  std::size_t window2 = 0;
  std::size_t count1 = 0;
  std::size_t count2 = 0;
  bool stabilized = false;
};

FinitenessProbe finiteness_probe(const SparseDecomposition& dec,
                                 const SignVector& signs, const Integer& r,
                                 std::size_t window1, std::size_t window2,
                                 const Budgets& budgets = {});

/// All set partitions of {0, ..., k-1}, each with cells ordered by first
/// member.
std::vector<std::vector<std::vector<std::size_t>>> set_partitions(std::size_t k);

/// One (partition, sigma) pair: the zero-sum cells Q, their union I, the
/// shift assignment sigma on I and the reduced target s.
struct PartitionCell {
  std::vector<std::vector<std::size_t>> partition;
  std::vector<Integer> cell_sums;
  std::vector<std::size_t> zero_cells;
  std::vector<std::size_t> covered;
  std::vector<Integer> sigma;
  std::vector<Integer> zero_cell_shift_sums;
  Integer reduced_target;
};

struct UnionCheckReport {
  bool passed = true;
  std::size_t cells = 0;
  std::size_t direct_count = 0;
  std::size_t assembled_count = 0;
  // Cells whose pieces are nonempty.
  std::vector<PartitionCell> covering_cells;
  // "missing" (in A but not assembled) or "extra".
  std::optional<std::string> discrepancy_kind;
  std::optional<IndexTuple> discrepancy;
};

/// Rebuilds A(c, r) on [0, window) as the union of the pieces X(P, sigma)
/// and compares it with the direct solution scan.
UnionCheckReport lemma_union_check(const SparseDecomposition& dec,
                                   const SignVector& signs, const Integer& r,
                                   std::size_t window,
                                   const Budgets& budgets = {});

}  // namespace sparsez
