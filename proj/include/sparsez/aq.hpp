#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsez/budgets.hpp"
#include "sparsez/core.hpp"
#include "sparsez/integer.hpp"

namespace sparsez::aq {

/// a_n = q^n + n.
Integer element(std::int64_t q, unsigned long n);

/// f(k, r) = q^{k+1}(q^r - 1) + k + r - kq + q - 1.
Integer f_value(std::int64_t q, unsigned long k, unsigned long r);

struct IdentityReport {
  bool passed = true;
  std::size_t checked = 0;
  std::optional<std::size_t> first_failure;
};

/// (1-q)n = a_{n+2} - q a_{n+1} + q - 2 and
/// (q-1)n = q a_{n+1} - a_{n+2} - q a_1 + a_2 for 0 <= n <= n_max.
IdentityReport verify_linear_identity(std::int64_t q, std::size_t n_max);

/// Signed summands from ±A_q adding up to t, built from the second
/// identity: 2q + 2 summands, or none for t = 0. Requires (q-1) | t.
std::vector<Integer> sumset_witness(std::int64_t q, const Integer& t);

/// Whether x = q^n + n for some n >= 0.
bool is_member(std::int64_t q, const Integer& x);

struct CoverageReport {
  bool passed = true;
  std::size_t certified = 0;
  std::size_t max_summands = 0;
  std::optional<Integer> first_failure;
};

/// Certifies every t in (q-1)Z ∩ [-range, range] lies in Σ_{2q+2}(±A_q) by
/// building and checking its witness.
CoverageReport certify_sumset_coverage(std::int64_t q, std::int64_t range);

struct Context {
  std::int64_t q = 0;
  std::int64_t range = 0;
  // A_q source window used for the brute-force scan.
  Window window;
  // B ∩ [-M, M], sorted.
  std::vector<std::int64_t> b;
  // V ∩ [1, M]: positive values u - qv + q - 2.
  std::vector<std::int64_t> v;
  // X = B ∩ [1, M].
  std::vector<std::int64_t> x;
  // C = (q-1)Z+ ∩ [1, M] minus X.
  std::vector<std::int64_t> c;
  // The u,v scan at the source bound and its double agree on positive
  // values.
  bool stabilized = false;
  // The scan matches the f(k, r) construction on positive values.
  bool cross_check = false;
};

// Throws Error(NotStabilized) when doubling the source bound changes the
// scanned positive part.
Context build_context(std::int64_t q, std::int64_t range,
                      const Budgets& budgets = {});

struct GCount {
  std::int64_t q = 0;
  Integer n;
  std::uint64_t g = 0;
  double bound = 0;
  bool holds = false;
};

/// g(n) = #{(k, r) : 1 <= f(k, r) <= n} over k <= log_q n and
/// r <= log_q((q+1)n), against (log_q(q+1) + log_q n) log_q n.
GCount count_g(std::int64_t q, const Integer& n);

struct DensityBasis {
  Rational density;
  std::int64_t basis_range = 0;
  unsigned basis_n = 0;
};

// Throws Error(NotFoundUpTo) when the basis witness passes n_cap.
DensityBasis density_and_basis(const Context& context, std::int64_t basis_range,
                               unsigned n_cap = 64);

struct WitnessReport {
  bool successor_identity = true;
  bool exponent_graph = true;
  std::uint64_t pairs_checked = 0;
  std::optional<std::string> failure;

  bool passed() const { return successor_identity && exponent_graph; }
};

/// (i) {s(a) - a - 1 : a = a_n, n < N} = (q-1){q^n : n < N};
/// (ii) for x, y in [0, q^N]: y = q^x iff y in q^N, 0 <= x < y and
/// x + y in A_q.
WitnessReport definability_witnesses(std::int64_t q, unsigned n);

}  // namespace sparsez::aq
