#include "sparsez/sumsets.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "sparsez/error.hpp"

namespace sparsez {

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidSpec, message);
}

void require_sorted(std::span<const std::int64_t> xs) {
  if (std::adjacent_find(xs.begin(), xs.end(), std::greater_equal<>()) != xs.end()) {
    invalid("input set must be strictly increasing");
  }
}

// Sums of at most `count` elements of t, sorted and deduplicated.
std::vector<std::int64_t> bounded_sums(const std::vector<std::int64_t>& t, unsigned count,
                                       const Budgets& budgets) {
  std::vector<std::int64_t> sums{0};
  for (unsigned step = 0; step < count; ++step) {
    if (static_cast<double>(sums.size()) * static_cast<double>(t.size()) >
        static_cast<double>(budgets.elements)) {
      throw Error(ErrorCode::BudgetExceeded, "half sumset passes the element budget");
    }
    std::vector<std::int64_t> next = sums;
    next.reserve(sums.size() * (t.size() + 1));
    for (auto s : sums) {
      for (auto x : t) next.push_back(s + x);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    if (next.size() == sums.size()) break;
    sums = std::move(next);
  }
  return sums;
}

}  // namespace

bool SignedSumsetWindow::contains(std::int64_t x) const {
  if (x < -range || x > range) {
    throw Error(ErrorCode::BoundExceeded, "query outside the sumset range");
  }
  return std::binary_search(values.begin(), values.end(), x);
}

SignedSumsetWindow signed_sumset(const Window& window, unsigned n, std::int64_t range,
                                 const Budgets& budgets) {
  if (range < 1) invalid("sumset range must be >= 1");
  if (static_cast<std::uint64_t>(range) > budgets.elements) {
    throw Error(ErrorCode::BudgetExceeded, "sumset range passes the element budget");
  }
  // Every partial sum stays below headroom in absolute value.
  const std::int64_t headroom = std::numeric_limits<std::int64_t>::max() / (n + 2);
  std::vector<std::int64_t> t;
  for (const auto& x : window.elements()) {
    const auto v = to_int64(x);
    if (!v || *v > headroom || *v < -headroom) {
      throw Error(ErrorCode::UnsupportedBound, "sumset summand " + to_decimal(x) +
                                                   " is too large for 64-bit sums");
    }
    if (*v != 0) {
      t.push_back(*v);
      t.push_back(-*v);
    }
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());

  const auto left = bounded_sums(t, (n + 1) / 2, budgets);
  const auto right = bounded_sums(t, n / 2, budgets);
  std::vector<char> hit(static_cast<std::size_t>(2 * range + 1), 0);
  std::uint64_t pairs = 0;
  for (auto x : left) {
    // y in [-range - x, range - x].
    auto it = std::lower_bound(right.begin(), right.end(), -range - x);
    for (; it != right.end() && *it <= range - x; ++it) {
      if (++pairs > budgets.elements) {
        throw Error(ErrorCode::BudgetExceeded, "sumset pair scan passes the element budget");
      }
      hit[static_cast<std::size_t>(x + *it + range)] = 1;
    }
  }
  SignedSumsetWindow out;
  out.n = n;
  out.source_bound = window.bound();
  out.range = range;
  for (std::int64_t v = -range; v <= range; ++v) {
    if (hit[static_cast<std::size_t>(v + range)]) out.values.push_back(v);
  }
  return out;
}

SumsetProbe signed_sumset_probe(const SetSpec& spec, const Integer& source_bound, unsigned n,
                                std::int64_t range, const Budgets& budgets) {
  SumsetProbe probe{signed_sumset(materialize(spec, source_bound, {}, budgets), n, range, budgets),
                    signed_sumset(materialize(spec, 2 * source_bound, {}, budgets), n, range,
                                  budgets),
                    false};
  probe.stabilized = probe.at_bound.values == probe.at_double.values;
  return probe;
}

std::optional<std::int64_t> full_residue_class(const SignedSumsetWindow& sumset,
                                               std::int64_t d_max) {
  for (std::int64_t d = 1; d <= d_max; ++d) {
    bool full = true;
    for (std::int64_t x = -(sumset.range / d) * d; x <= sumset.range && full; x += d) {
      full = std::binary_search(sumset.values.begin(), sumset.values.end(), x);
    }
    if (full) return d;
  }
  return std::nullopt;
}

ArithmeticProgression longest_ap(std::span<const std::int64_t> sorted, std::int64_t min_diff) {
  if (min_diff < 1) invalid("min_diff must be >= 1");
  require_sorted(sorted);
  if (sorted.empty()) return {};
  ArithmeticProgression best{1, sorted.front(), min_diff};
  // len[j][d]: longest progression with difference d ending at sorted[j].
  std::vector<std::unordered_map<std::int64_t, std::size_t>> len(sorted.size());
  for (std::size_t j = 1; j < sorted.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const std::int64_t d = sorted[j] - sorted[i];
      if (d < min_diff) continue;
      auto prev = len[i].find(d);
      const std::size_t length = prev == len[i].end() ? 2 : prev->second + 1;
      len[j][d] = length;
      const std::int64_t start = sorted[j] - static_cast<std::int64_t>(length - 1) * d;
      const bool better = length > best.length ||
                          (length == best.length &&
                           (d < best.diff || (d == best.diff && start < best.start)));
      if (better) best = {length, start, d};
    }
  }
  return best;
}

DensityReport density_report(std::span<const std::int64_t> sorted, std::int64_t exact_bound,
                             std::span<const Integer> checkpoints) {
  require_sorted(sorted);
  DensityReport report;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const Integer& m = checkpoints[i];
    if (m < 1) invalid("density checkpoints must be >= 1");
    if (i > 0 && m <= checkpoints[i - 1]) invalid("density checkpoints must increase");
    if (m > exact_bound) {
      throw Error(ErrorCode::BoundExceeded,
                  "checkpoint " + to_decimal(m) + " is past the exactness bound");
    }
    const auto mi = checked_int64(m, "checkpoint");
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), mi) -
                       std::lower_bound(sorted.begin(), sorted.end(), std::int64_t{1});
    Rational ratio(Integer(count), m);
    ratio.canonicalize();
    report.rows.push_back({m, Integer(count), ratio});
  }
  return report;
}

DensityReport density_report(const Window& window, std::span<const Integer> checkpoints) {
  if (window.lo() > 1) {
    throw Error(ErrorCode::BoundExceeded, "density needs a window exact from 1");
  }
  DensityReport report;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const Integer& m = checkpoints[i];
    if (m < 1) invalid("density checkpoints must be >= 1");
    if (i > 0 && m <= checkpoints[i - 1]) invalid("density checkpoints must increase");
    if (m > window.bound()) {
      throw Error(ErrorCode::BoundExceeded,
                  "checkpoint " + to_decimal(m) + " is past the window bound");
    }
    const auto& xs = window.elements();
    const auto count = std::upper_bound(xs.begin(), xs.end(), m) -
                       std::lower_bound(xs.begin(), xs.end(), Integer(1));
    Rational ratio(Integer(count), m);
    ratio.canonicalize();
    report.rows.push_back({m, Integer(count), ratio});
  }
  return report;
}

unsigned additive_basis_witness(std::span<const std::int64_t> sorted, std::int64_t exact_bound,
                                std::int64_t m, unsigned n_cap) {
  require_sorted(sorted);
  if (m < 0) invalid("basis target must be >= 0");
  if (m > exact_bound) {
    throw Error(ErrorCode::BoundExceeded, "C is only exact up to " + std::to_string(exact_bound));
  }
  if (!sorted.empty() && sorted.front() < 0) invalid("C must consist of positive integers");
  std::vector<std::int64_t> items{1};
  for (auto c : sorted) {
    if (c > 1 && c <= m) items.push_back(c);
  }
  // Fewest summands reaching each t, found layer by layer.
  constexpr unsigned unreached = std::numeric_limits<unsigned>::max();
  std::vector<unsigned> dist(static_cast<std::size_t>(m + 1), unreached);
  dist[0] = 0;
  std::vector<std::int64_t> frontier{0};
  std::size_t reached = 1;
  unsigned layer = 0;
  while (reached < dist.size()) {
    if (++layer > n_cap) {
      throw Error(ErrorCode::NotFoundUpTo,
                  "no witness n <= " + std::to_string(n_cap) + " covers [0, " + std::to_string(m) + "]");
    }
    std::vector<std::int64_t> next;
    for (auto t : frontier) {
      for (auto c : items) {
        const std::int64_t s = t + c;
        if (s > m) break;
        if (dist[static_cast<std::size_t>(s)] == unreached) {
          dist[static_cast<std::size_t>(s)] = layer;
          next.push_back(s);
          ++reached;
        }
      }
    }
    frontier = std::move(next);
  }
  return layer;
}

unsigned additive_basis_witness(const Window& c, std::int64_t m, unsigned n_cap) {
  if (c.lo() > 1) throw Error(ErrorCode::BoundExceeded, "C must be exact from 1");
  std::vector<std::int64_t> xs;
  for (const auto& x : c.elements()) {
    if (x > m) break;
    xs.push_back(checked_int64(x, "basis element"));
  }
  const Integer bound = std::min(c.bound(), Integer(std::numeric_limits<std::int64_t>::max()));
  return additive_basis_witness(xs, checked_int64(bound, "window bound"), m, n_cap);
}

}  // namespace sparsez
