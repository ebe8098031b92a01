#include "sparsez/aq.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sparsez/error.hpp"
#include "sparsez/sumsets.hpp"

namespace sparsez::aq {

namespace {

void require_q(std::int64_t q) {
  if (q < 2) throw Error(ErrorCode::InvalidSpec, "A_q needs q >= 2");
}

// Positive values u - qv + q - 2 <= m over u, v in A_q. These are exactly
// f(k, r) for r >= 1, plus f(0, 0) = q - 1; u <= v only gives negatives.
std::vector<std::int64_t> positive_values(std::int64_t q, std::int64_t m) {
  std::set<std::int64_t> out;
  if (q - 1 <= m) out.insert(q - 1);
  for (unsigned long k = 0; f_value(q, k, 1) <= m; ++k) {
    for (unsigned long r = 1;; ++r) {
      const Integer v = f_value(q, k, r);
      if (v > m) break;
      if (v >= 1) out.insert(v.get_si());
    }
  }
  return {out.begin(), out.end()};
}

struct Scan {
  std::vector<std::int64_t> positive;
  std::vector<std::int64_t> nonpositive;
};

Scan scan_pairs(std::int64_t q, const Window& window, std::int64_t m) {
  std::set<std::int64_t> pos;
  std::set<std::int64_t> neg;
  for (const auto& u : window.elements()) {
    for (const auto& v : window.elements()) {
      const Integer w = u - q * v + q - 2;
      if (w < -m || w > m) continue;
      const auto x = w.get_si();
      if (x > 0) {
        pos.insert(x);
      } else {
        neg.insert(x);
      }
    }
  }
  return {{pos.begin(), pos.end()}, {neg.begin(), neg.end()}};
}

}  // namespace

Integer element(std::int64_t q, unsigned long n) {
  require_q(q);
  return ipow(Integer(q), n) + n;
}

Integer f_value(std::int64_t q, unsigned long k, unsigned long r) {
  require_q(q);
  const Integer qq(q);
  return ipow(qq, k + 1) * (ipow(qq, r) - 1) + k + r - Integer(k) * q + q - 1;
}

IdentityReport verify_linear_identity(std::int64_t q, std::size_t n_max) {
  require_q(q);
  IdentityReport report;
  const Integer a1 = element(q, 1);
  const Integer a2 = element(q, 2);
  Integer power = q;  // q^{n+1}
  for (std::size_t n = 0; n <= n_max; ++n) {
    const Integer next = power + (n + 1);             // a_{n+1}
    const Integer after = power * q + (n + 2);         // a_{n+2}
    const Integer scaled = Integer(static_cast<unsigned long>(n)) * (q - 1);
    const bool first = -scaled == after - q * next + q - 2;
    const bool second = scaled == q * next - after - q * a1 + a2;
    ++report.checked;
    if (!first || !second) {
      report.passed = false;
      report.first_failure = n;
      return report;
    }
    power *= q;
  }
  return report;
}

std::vector<Integer> sumset_witness(std::int64_t q, const Integer& t) {
  require_q(q);
  if (floor_mod(t, q - 1) != 0) {
    throw Error(ErrorCode::InvalidSpec, to_decimal(t) + " is not a multiple of q - 1");
  }
  std::vector<Integer> out;
  if (t == 0) return out;
  const Integer n = abs(t) / (q - 1);
  const unsigned long ni = checked_int64(n, "witness index");
  const int sign = t > 0 ? 1 : -1;
  // (q-1)n = q a_{n+1} - a_{n+2} - q a_1 + a_2.
  for (std::int64_t i = 0; i < q; ++i) out.push_back(sign * element(q, ni + 1));
  out.push_back(-sign * element(q, ni + 2));
  for (std::int64_t i = 0; i < q; ++i) out.push_back(-sign * element(q, 1));
  out.push_back(sign * element(q, 2));
  return out;
}

bool is_member(std::int64_t q, const Integer& x) {
  require_q(q);
  if (x < 1) return false;
  for (unsigned long n = 0;; ++n) {
    const Integer a = element(q, n);
    if (a == x) return true;
    if (a > x) return false;
  }
}

CoverageReport certify_sumset_coverage(std::int64_t q, std::int64_t range) {
  require_q(q);
  CoverageReport report;
  const std::size_t cap = static_cast<std::size_t>(2 * q + 2);
  for (std::int64_t t = -(range / (q - 1)) * (q - 1); t <= range; t += q - 1) {
    const auto summands = sumset_witness(q, t);
    Integer total = 0;
    bool ok = summands.size() <= cap;
    for (const auto& s : summands) {
      total += s;
      ok = ok && is_member(q, abs(s));
    }
    ok = ok && total == t;
    report.max_summands = std::max(report.max_summands, summands.size());
    if (!ok) {
      report.passed = false;
      report.first_failure = Integer(t);
      return report;
    }
    ++report.certified;
  }
  return report;
}

Context build_context(std::int64_t q, std::int64_t range, const Budgets& budgets) {
  require_q(q);
  if (range < q * q) throw Error(ErrorCode::InvalidSpec, "context needs M >= q^2");
  const unsigned long l_max = floor_log(Integer(range), Integer(q)) + 1 +
                              floor_log(Integer(q + 1) * range, Integer(q)) + 1;
  const Integer source = element(q, l_max);
  Context ctx{q, range, materialize(SetSpec::aq(q), source, {}, budgets), {}, {}, {}, {}, false,
              false};

  const Scan at_bound = scan_pairs(q, ctx.window, range);
  const Scan at_double = scan_pairs(q, materialize(SetSpec::aq(q), 2 * source, {}, budgets), range);
  if (at_bound.positive != at_double.positive) {
    throw Error(ErrorCode::NotStabilized,
                "positive part of B changed when the A_q source bound doubled");
  }
  ctx.stabilized = true;

  ctx.v = positive_values(q, range);
  for (auto x : ctx.v) {
    if (x % (q - 1) == 0) ctx.x.push_back(x);
  }
  std::vector<std::int64_t> multiples;
  for (std::int64_t b = -(range / (q - 1)) * (q - 1); b <= 0; b += q - 1) multiples.push_back(b);
  // A finite window cannot reach (1-q)n for large n, so the non-positive
  // part comes from the identity and only the positive part is compared.
  ctx.cross_check = at_bound.positive == ctx.v;

  ctx.b = multiples;
  ctx.b.insert(ctx.b.end(), ctx.x.begin(), ctx.x.end());
  for (std::int64_t c = q - 1, i = 0; c <= range; c += q - 1) {
    while (i < static_cast<std::int64_t>(ctx.x.size()) && ctx.x[static_cast<std::size_t>(i)] < c) ++i;
    if (i < static_cast<std::int64_t>(ctx.x.size()) && ctx.x[static_cast<std::size_t>(i)] == c) continue;
    ctx.c.push_back(c);
  }
  return ctx;
}

GCount count_g(std::int64_t q, const Integer& n) {
  require_q(q);
  if (n < q) throw Error(ErrorCode::InvalidSpec, "g(n) needs n >= q");
  GCount out;
  out.q = q;
  out.n = n;
  const unsigned long k_max = floor_log(n, Integer(q));
  const unsigned long r_max = floor_log(Integer(q + 1) * n, Integer(q));
  for (unsigned long k = 0; k <= k_max; ++k) {
    for (unsigned long r = 0; r <= r_max; ++r) {
      const Integer f = f_value(q, k, r);
      if (f >= 1 && f <= n) ++out.g;
    }
  }
  const double log_q = std::log(static_cast<double>(q));
  const double log_n = std::log(n.get_d()) / log_q;
  out.bound = (std::log(static_cast<double>(q + 1)) / log_q + log_n) * log_n;
  out.holds = static_cast<double>(out.g) <= out.bound;
  return out;
}

DensityBasis density_and_basis(const Context& context, std::int64_t basis_range, unsigned n_cap) {
  if (basis_range > context.range) {
    throw Error(ErrorCode::BoundExceeded, "basis range exceeds the context range");
  }
  DensityBasis out;
  out.density = Rational(Integer(static_cast<unsigned long>(context.c.size())), Integer(context.range));
  out.density.canonicalize();
  out.basis_range = basis_range;
  out.basis_n = additive_basis_witness(context.c, context.range, basis_range, n_cap);
  return out;
}

WitnessReport definability_witnesses(std::int64_t q, unsigned n) {
  require_q(q);
  if (n < 3) throw Error(ErrorCode::InvalidSpec, "definability witnesses need N >= 3");
  WitnessReport report;
  const Integer top = ipow(Integer(q), n);
  if (top > Integer(1UL << 40)) {
    throw Error(ErrorCode::BudgetExceeded, "q^N is too large for the exhaustive check");
  }
  const std::uint64_t limit = top.get_ui();

  // (i) s(a_n) - a_n - 1 = (q - 1) q^n.
  std::set<Integer> lhs;
  std::set<Integer> rhs;
  for (unsigned long i = 0; i < n; ++i) {
    lhs.insert(element(q, i + 1) - element(q, i) - 1);
    rhs.insert((q - 1) * ipow(Integer(q), i));
  }
  if (lhs != rhs) {
    report.successor_identity = false;
    report.failure = "successor differences differ from (q-1) q^N";
  }

  // (ii) over x in [0, q^N] and y in q^N ∩ [1, q^N]; the equivalence is
  // trivially true for y outside q^N since both sides fail.
  std::vector<bool> member(2 * limit + 2, false);
  for (unsigned long i = 0;; ++i) {
    const Integer a = element(q, i);
    if (a > 2 * limit + 1) break;
    member[a.get_ui()] = true;
  }
  std::uint64_t y = 1;
  for (unsigned e = 0; e <= n; ++e, y *= static_cast<std::uint64_t>(q)) {
    for (std::uint64_t x = 0; x <= limit; ++x) {
      ++report.pairs_checked;
      const bool graph = x == e;
      const bool defined = x < y && member[x + y];
      if (graph != defined) {
        report.exponent_graph = false;
        report.failure = "exponent graph fails at x = " + std::to_string(x) +
                         ", y = " + std::to_string(y);
        return report;
      }
    }
  }
  return report;
}

}  // namespace sparsez::aq
