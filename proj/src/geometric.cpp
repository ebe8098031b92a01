#include "sparsez/geometric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sparsez/error.hpp"

namespace sparsez {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidSpec, message);
}

bool exceeds_one(const CertifiedReal& tau) {
  switch (tau.kind()) {
    case CertifiedReal::Kind::Rational:
    case CertifiedReal::Kind::Sqrt:
      return tau.value() > 1;
    case CertifiedReal::Kind::Pi:
    case CertifiedReal::Kind::E:
      return true;
  }
  return false;
}

// A finite sum of symbolic terms, grouped by monomial. It is zero exactly
// when every grouped coefficient vanishes.
struct TermSum {
  std::map<std::map<std::string, long>, Rational> parts;

  void add(const SymbolicTerm& term, int sign = 1) {
    Rational& slot = parts[term.monomial];
    if (sign > 0) {
      slot += term.coefficient;
    } else {
      slot -= term.coefficient;
    }
    if (slot == 0) parts.erase(term.monomial);
  }
  void add(const TermSum& other, int sign = 1) {
    for (const auto& [mono, coef] : other.parts) add(SymbolicTerm{coef, mono}, sign);
  }
  TermSum divided(const SymbolicTerm& d) const {
    TermSum out;
    for (const auto& [mono, coef] : parts) {
      SymbolicTerm t{coef, mono};
      t.divide(d);
      out.add(t);
    }
    return out;
  }
  bool is_zero() const { return parts.empty(); }
  std::optional<Rational> rational() const {
    if (parts.empty()) return Rational(0);
    if (parts.size() == 1 && parts.begin()->first.empty()) return parts.begin()->second;
    return std::nullopt;
  }
  Interval enclose(mpfr_prec_t precision) const {
    Interval out = Interval::exact(0L, precision);
    for (const auto& [mono, coef] : parts) out = out + SymbolicTerm{coef, mono}.enclose(precision);
    return out;
  }
  friend bool operator==(const TermSum&, const TermSum&) = default;
};

TermSum single(const SymbolicTerm& t) {
  TermSum out;
  out.add(t);
  return out;
}

// Sign of a symbolic sum; nonzero sums are separated from zero by refining
// the precision.
int certified_sign(const TermSum& x, const Budgets& budgets) {
  if (x.is_zero()) return 0;
  if (auto q = x.rational()) return sgn(*q);
  for (mpfr_prec_t p = budgets.working_precision; p <= static_cast<mpfr_prec_t>(budgets.precision_cap);
       p *= 2) {
    Interval iv = x.enclose(p);
    if (iv.certainly_positive()) return 1;
    if (iv.certainly_negative()) return -1;
  }
  throw Error(ErrorCode::PrecisionExhausted, "could not separate a nonzero quantity from zero");
}

int certified_compare(const TermSum& a, const TermSum& b, const Budgets& budgets) {
  TermSum diff = a;
  diff.add(b, -1);
  return certified_sign(diff, budgets);
}

CertifiedValue certified_value(const TermSum& x, const Budgets& budgets) {
  const auto precision = static_cast<mpfr_prec_t>(std::max(budgets.working_precision, 128u));
  return CertifiedValue{x.enclose(precision), x.rational()};
}

std::size_t certified_argmin(const std::vector<TermSum>& xs, const Budgets& budgets) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (certified_compare(xs[i], xs[best], budgets) < 0) best = i;
  }
  return best;
}

std::size_t effective_prefix(const LambdaSpec& spec, std::size_t n) {
  if (auto length = lambda_length(spec)) {
    if (*length == 0) invalid("empty lambda sequence");
    return std::min(n, *length - 1);
  }
  return n;
}

}  // namespace

void validate(const LambdaSpec& spec) {
  std::visit(overloaded{
                 [](const LambdaSpec::PowerOfReal& p) {
                   if (!exceeds_one(p.tau)) invalid("tau must exceed 1");
                 },
                 [](const LambdaSpec::Recursive& r) {
                   if (r.taus.empty()) invalid("recursive lambda needs at least one tau");
                   if (r.steps.empty()) invalid("recursive lambda needs at least one step");
                   for (const auto& t : r.taus) {
                     if (!exceeds_one(t)) invalid("every tau must exceed 1");
                   }
                   for (const auto& s : r.steps) {
                     if (s.multiplier < 1) invalid("step multipliers must be positive");
                     if (s.tau_index >= r.taus.size()) invalid("step tau index out of range");
                   }
                 },
                 [](const LambdaSpec::ExplicitRationals& e) {
                   if (e.values.empty()) invalid("explicit lambda needs at least one value");
                   if (e.values.front() <= 0) invalid("lambda values must be positive");
                   for (std::size_t i = 1; i < e.values.size(); ++i) {
                     if (e.values[i] <= e.values[i - 1]) {
                       invalid("lambda values must be strictly increasing");
                     }
                   }
                 },
             },
             spec.kind);
}

std::optional<std::size_t> lambda_length(const LambdaSpec& spec) {
  if (const auto* e = std::get_if<LambdaSpec::ExplicitRationals>(&spec.kind)) {
    return e->values.size();
  }
  return std::nullopt;
}

SymbolicTerm lambda_term(const LambdaSpec& spec, std::size_t n) {
  SymbolicTerm out;
  std::visit(overloaded{
                 [&](const LambdaSpec::PowerOfReal& p) {
                   out.multiply(p.tau, static_cast<long>(n));
                 },
                 [&](const LambdaSpec::Recursive& r) {
                   out.multiply(r.taus.front());
                   for (std::size_t m = 0; m < n; ++m) {
                     const auto& step = r.steps[m % r.steps.size()];
                     out.multiply(Rational(step.multiplier));
                     out.multiply(r.taus[step.tau_index]);
                   }
                 },
                 [&](const LambdaSpec::ExplicitRationals& e) {
                   if (n >= e.values.size()) {
                     throw Error(ErrorCode::BoundExceeded,
                                 "lambda index " + std::to_string(n) + " past the explicit list");
                   }
                   out.coefficient = e.values[n];
                 },
             },
             spec.kind);
  return out;
}

LambdaValue eval_lambda(const LambdaSpec& spec, std::size_t n, LambdaPurpose purpose,
                        const Budgets& budgets) {
  validate(spec);
  const SymbolicTerm term = lambda_term(spec, n);
  const auto start = static_cast<mpfr_prec_t>(budgets.working_precision);
  if (term.is_rational()) {
    Integer floor = floor_div(term.coefficient.get_num(), term.coefficient.get_den());
    return LambdaValue{Interval::exact(term.coefficient, start), floor, term.coefficient};
  }
  if (purpose == LambdaPurpose::Ratio) return LambdaValue{term.enclose(start), {}, {}};
  for (mpfr_prec_t p = start; p <= static_cast<mpfr_prec_t>(budgets.precision_cap); p *= 2) {
    Interval iv = term.enclose(p);
    if (auto floor = iv.certified_floor()) return LambdaValue{std::move(iv), floor, {}};
  }
  throw Error(ErrorCode::PrecisionExhausted,
              "floor of lambda_" + std::to_string(n) + " not certified at the precision cap");
}

Integer lambda_floor(const LambdaSpec& spec, std::size_t n, const Budgets& budgets) {
  return *eval_lambda(spec, n, LambdaPurpose::Floor, budgets).floor;
}

std::optional<IntegerRelation> find_integer_relation(const LambdaSpec& spec, std::size_t prefix,
                                                     long coefficient_bound) {
  validate(spec);
  std::size_t count = prefix;
  if (auto length = lambda_length(spec)) count = std::min(count, *length);
  std::vector<SymbolicTerm> terms;
  for (std::size_t n = 0; n < count; ++n) terms.push_back(lambda_term(spec, n));
  for (std::size_t j = 1; j < count; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      SymbolicTerm ratio = terms[i];
      ratio.divide(terms[j]);
      if (!ratio.is_rational()) continue;
      const Integer& p = ratio.coefficient.get_num();
      const Integer& q = ratio.coefficient.get_den();
      if (abs(p) <= coefficient_bound && q <= coefficient_bound) {
        return IntegerRelation{i, j, p, q};
      }
    }
  }
  return std::nullopt;
}

RatioGapReport ratio_min_gap(const LambdaSpec& spec, std::size_t n, const Budgets& budgets) {
  validate(spec);
  const std::size_t last = effective_prefix(spec, n);
  if (last < 1) invalid("ratio gaps need at least two terms");
  std::vector<SymbolicTerm> terms;
  for (std::size_t i = 0; i <= last; ++i) terms.push_back(lambda_term(spec, i));

  std::set<std::pair<std::map<std::string, long>, Rational>> seen;
  std::vector<TermSum> ratios;
  for (std::size_t hi = 0; hi <= last; ++hi) {
    for (std::size_t lo = 0; lo <= hi; ++lo) {
      SymbolicTerm r = terms[hi];
      r.divide(terms[lo]);
      if (seen.emplace(r.monomial, r.coefficient).second) ratios.push_back(single(r));
    }
  }
  std::sort(ratios.begin(), ratios.end(), [&](const TermSum& a, const TermSum& b) {
    return certified_compare(a, b, budgets) < 0;
  });

  std::vector<TermSum> gaps;
  std::optional<TermSum> above_one;
  const TermSum one = single(SymbolicTerm{});
  for (std::size_t i = 0; i + 1 < ratios.size(); ++i) {
    TermSum gap = ratios[i + 1];
    gap.add(ratios[i], -1);
    gaps.push_back(std::move(gap));
    if (!above_one && ratios[i] == one) {
      above_one = ratios[i + 1];
      above_one->add(one, -1);
    }
  }
  std::vector<TermSum> consecutive;
  for (std::size_t i = 0; i < last; ++i) {
    SymbolicTerm r = terms[i + 1];
    r.divide(terms[i]);
    consecutive.push_back(single(r));
  }

  RatioGapReport report{last, ratios.size(),
                        certified_value(gaps[certified_argmin(gaps, budgets)], budgets),
                        certified_value(*above_one, budgets),
                        certified_value(consecutive[certified_argmin(consecutive, budgets)], budgets)};
  return report;
}

std::vector<EpsilonEntry> epsilon_oracle(const LambdaSpec& spec, unsigned k_max, std::size_t n,
                                         const Budgets& budgets) {
  validate(spec);
  if (k_max < 1 || k_max > 5) invalid("epsilon oracle supports 1 <= k <= 5");
  const std::size_t last = effective_prefix(spec, n);
  const std::size_t half = last / 2;

  std::vector<SymbolicTerm> terms;
  std::vector<double> logs;
  for (std::size_t i = 0; i <= last; ++i) {
    terms.push_back(lambda_term(spec, i));
    Interval iv = terms.back().enclose(128);
    mpfr_t l;
    mpfr_init2(l, 128);
    mpfr_log(l, iv.lower(), MPFR_RNDN);
    logs.push_back(mpfr_get_d(l, MPFR_RNDN));
    mpfr_clear(l);
  }

  // Signed terms are encoded as id = 2 * index + (sign > 0).
  const std::size_t ids = 2 * (last + 1);
  std::vector<EpsilonEntry> out;
  std::uint64_t visited = 0;
  for (unsigned k = 1; k <= k_max; ++k) {
    struct Candidate {
      std::vector<std::size_t> ids;
      double value;
    };
    // Best double value overall and among indices <= half, with the tuples
    // that come within the rounding margin of it.
    double best[2] = {INFINITY, INFINITY};
    std::vector<Candidate> near[2];
    constexpr double margin = 1e-9;

    std::vector<std::size_t> tuple(k, 0);
    std::vector<double> scaled(k);
    std::vector<double> subsum(std::size_t{1} << k);
    while (true) {
      if (++visited > budgets.elements) {
        throw Error(ErrorCode::BudgetExceeded, "epsilon enumeration passed the element budget");
      }
      std::size_t top = 0;
      for (auto id : tuple) top = std::max(top, id / 2);
      for (unsigned i = 0; i < k; ++i) {
        const double sign = tuple[i] % 2 ? 1.0 : -1.0;
        scaled[i] = sign * std::exp(logs[tuple[i] / 2] - logs[top]);
      }
      bool valid = true;
      subsum[0] = 0;
      for (std::size_t mask = 1; mask < subsum.size() && valid; ++mask) {
        const auto low = static_cast<unsigned>(__builtin_ctzll(mask));
        subsum[mask] = subsum[mask & (mask - 1)] + scaled[low];
        if (std::fabs(subsum[mask]) < 1e-6) {
          TermSum exact;
          for (unsigned i = 0; i < k; ++i) {
            if (mask >> i & 1) exact.add(terms[tuple[i] / 2], tuple[i] % 2 ? 1 : -1);
          }
          valid = !exact.is_zero();
        }
      }
      if (valid) {
        const double value = std::fabs(subsum.back());
        for (int h = 0; h < 2; ++h) {
          if (h == 1 && top > half) continue;
          if (value < best[h] * (1 - margin)) {
            best[h] = value;
            std::erase_if(near[h], [&](const Candidate& c) {
              return c.value > best[h] * (1 + margin);
            });
          }
          if (value <= best[h] * (1 + margin)) near[h].push_back({tuple, value});
        }
      }
      // Next nondecreasing tuple.
      int pos = static_cast<int>(k) - 1;
      while (pos >= 0 && tuple[static_cast<std::size_t>(pos)] == ids - 1) --pos;
      if (pos < 0) break;
      const std::size_t next = tuple[static_cast<std::size_t>(pos)] + 1;
      for (auto i = static_cast<std::size_t>(pos); i < k; ++i) tuple[i] = next;
    }

    auto exact_value = [&](const std::vector<std::size_t>& t) {
      TermSum sum;
      std::size_t top = 0;
      for (auto id : t) {
        sum.add(terms[id / 2], id % 2 ? 1 : -1);
        top = std::max(top, id / 2);
      }
      TermSum ratio = sum.divided(terms[top]);
      if (certified_sign(ratio, budgets) < 0) {
        TermSum neg;
        neg.add(ratio, -1);
        return neg;
      }
      return ratio;
    };
    auto minimum = [&](const std::vector<Candidate>& cands) {
      std::vector<TermSum> values;
      for (const auto& c : cands) values.push_back(exact_value(c.ids));
      const std::size_t at = certified_argmin(values, budgets);
      return std::make_pair(values[at], cands[at].ids);
    };
    if (near[0].empty()) {
      throw Error(ErrorCode::InvalidSpec, "no admissible tuple for k = " + std::to_string(k));
    }
    auto [value, ids_at] = minimum(near[0]);
    EpsilonEntry entry;
    entry.k = k;
    entry.value = certified_value(value, budgets);
    for (auto id : ids_at) {
      entry.signs.push_back(id % 2 ? 1 : -1);
      entry.indices.push_back(id / 2);
    }
    entry.stabilized = !near[1].empty() && minimum(near[1]).first == value;
    out.push_back(std::move(entry));
  }
  return out;
}

SparseDecomposition build_sparse_decomposition(const Window& b, const LambdaSpec& lambda,
                                               std::vector<Integer> shifts,
                                               const std::vector<Assignment>& interleave) {
  validate(lambda);
  if (shifts.empty()) invalid("shift set F must be nonempty");
  if (interleave.empty()) invalid("decomposition needs at least one element");
  std::sort(shifts.begin(), shifts.end());
  shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());
  auto inconsistent = [](std::size_t n, const std::string& why) {
    return Error(ErrorCode::InconsistentDecomposition,
                 "index " + std::to_string(n) + ": " + why);
  };
  std::vector<Integer> a;
  std::vector<std::size_t> f;
  std::vector<Integer> r;
  for (std::size_t n = 0; n < interleave.size(); ++n) {
    const auto& [index, shift] = interleave[n];
    if (index >= b.size()) throw inconsistent(n, "f(n) is past the end of B");
    if (!std::binary_search(shifts.begin(), shifts.end(), shift)) {
      throw inconsistent(n, "shift " + to_decimal(shift) + " is not in F");
    }
    if (n > 0 && index < f.back()) {
      throw Error(ErrorCode::NotWeaklyIncreasing,
                  "f decreases at index " + std::to_string(n));
    }
    Integer value = b.elements()[index] + shift;
    if (n > 0 && value <= a.back()) throw inconsistent(n, "a_n is not strictly increasing");
    a.push_back(std::move(value));
    f.push_back(index);
    r.push_back(shift);
  }
  std::size_t spread = 0;
  for (std::size_t start = 0, i = 0; i < f.size(); ++i) {
    if (f[i] != f[start]) start = i;
    spread = std::max(spread, i - start);
  }
  const Integer lo = a.front();
  const Integer hi = a.back();
  return SparseDecomposition{Window(std::move(a), lo, hi), b, lambda, std::move(shifts),
                             std::move(f), std::move(r), spread};
}

namespace {

Window prefix_window(std::vector<Integer> xs, std::optional<SetSpec> source) {
  const Integer lo = std::min(Integer(0), xs.front());
  const Integer hi = xs.back();
  return Window(std::move(xs), lo, hi, std::move(source));
}

}  // namespace

SparseDecomposition perturbed_decomposition(const LambdaSpec& lambda,
                                            const PerturbSpec& perturbation, std::size_t n,
                                            const Budgets& budgets) {
  validate(lambda);
  if (n == 0) invalid("decomposition needs at least one element");
  if (auto length = lambda_length(lambda); length && n > *length) {
    throw Error(ErrorCode::BoundExceeded, "lambda has fewer than n terms");
  }
  std::vector<Integer> xs;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(lambda_floor(lambda, i, budgets) + perturbation.at(i));
    if (i > 0 && xs[i] <= xs[i - 1]) {
      invalid("floor(lambda_n) + g(n) is not strictly increasing at n = " + std::to_string(i));
    }
  }
  Window b = prefix_window(xs, SetSpec::perturbed(lambda, perturbation));
  std::vector<Assignment> identity;
  for (std::size_t i = 0; i < n; ++i) identity.push_back({i, Integer(0)});
  return build_sparse_decomposition(b, lambda, {Integer(0)}, identity);
}

SparseDecomposition interleaved_decomposition(const LambdaSpec& lambda,
                                              std::vector<Integer> shifts, std::size_t n_b,
                                              const Budgets& budgets) {
  validate(lambda);
  if (n_b == 0) invalid("decomposition needs at least one element");
  if (shifts.empty()) invalid("shift set F must be nonempty");
  std::sort(shifts.begin(), shifts.end());
  shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());
  std::vector<Integer> xs;
  for (std::size_t i = 0; i < n_b; ++i) {
    xs.push_back(lambda_floor(lambda, i, budgets));
    if (i > 0 && xs[i] <= xs[i - 1]) {
      invalid("floor(lambda_n) is not strictly increasing at n = " + std::to_string(i));
    }
  }
  Window b = prefix_window(xs, SetSpec::perturbed(lambda));
  std::vector<Assignment> assignment;
  for (std::size_t j = 0; j < n_b; ++j) {
    for (const auto& s : shifts) assignment.push_back({j, s});
  }
  return build_sparse_decomposition(b, lambda, std::move(shifts), assignment);
}

CertifiedValue relative_deviation(const SparseDecomposition& dec, double tail_fraction,
                                  const Budgets& budgets) {
  if (!(tail_fraction > 0 && tail_fraction <= 1)) invalid("tail fraction must lie in (0, 1]");
  const std::size_t size = dec.b.size();
  auto count = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(size)));
  count = std::clamp<std::size_t>(count, 1, size);
  std::vector<TermSum> deviations;
  for (std::size_t j = size - count; j < size; ++j) {
    const SymbolicTerm lambda = lambda_term(dec.lambda, j);
    TermSum d;
    d.add(SymbolicTerm{Rational(dec.b.elements()[j]), {}});
    d.add(lambda, -1);
    if (certified_sign(d, budgets) < 0) {
      TermSum neg;
      neg.add(d, -1);
      d = std::move(neg);
    }
    deviations.push_back(d.divided(lambda));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < deviations.size(); ++i) {
    if (certified_compare(deviations[i], deviations[best], budgets) > 0) best = i;
  }
  return certified_value(deviations[best], budgets);
}

std::vector<std::vector<std::size_t>> level_partition(const SparseDecomposition& dec,
                                                      const IndexTuple& tuple) {
  std::vector<std::vector<std::size_t>> cells;
  std::vector<std::size_t> levels;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const std::size_t level = dec.f.at(tuple[i]);
    auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) {
      levels.push_back(level);
      cells.push_back({i});
    } else {
      cells[static_cast<std::size_t>(it - levels.begin())].push_back(i);
    }
  }
  return cells;
}

namespace {

std::size_t resolve_window(const SparseDecomposition& dec, std::optional<std::size_t> window) {
  const std::size_t w = window.value_or(dec.size());
  if (w > dec.size()) {
    throw Error(ErrorCode::BoundExceeded, "index window " + std::to_string(w) +
                                              " exceeds the decomposition length " +
                                              std::to_string(dec.size()));
  }
  return w;
}

bool passes_partition_filter(const SparseDecomposition& dec, const SignVector& signs,
                             const IndexTuple& tuple) {
  for (const auto& cell : level_partition(dec, tuple)) {
    int sum = 0;
    for (auto i : cell) sum += signs[i];
    if (sum == 0) return false;
  }
  return true;
}

}  // namespace

std::vector<IndexTuple> solutions_a(const SparseDecomposition& dec, const SignVector& signs,
                                    const Integer& r, std::optional<std::size_t> window,
                                    const Budgets& budgets) {
  const std::size_t w = resolve_window(dec, window);
  const std::size_t k = signs.size();
  std::vector<IndexTuple> out;
  if (w == 0) return out;
  double work = std::pow(static_cast<double>(w), static_cast<double>(k - 1));
  if (work > static_cast<double>(budgets.elements)) {
    throw Error(ErrorCode::BudgetExceeded, "solution scan passes the element budget");
  }
  const auto& a = dec.a.elements();
  const auto first = a.begin();
  const auto end = a.begin() + static_cast<std::ptrdiff_t>(w);
  IndexTuple tuple(k, 0);
  while (true) {
    Integer partial = r;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      if (signs[i] > 0) {
        partial -= a[tuple[i]];
      } else {
        partial += a[tuple[i]];
      }
    }
    // c_k a_last = partial.
    const Integer need = signs[k - 1] > 0 ? partial : Integer(-partial);
    auto it = std::lower_bound(first, end, need);
    if (it != end && *it == need) {
      tuple[k - 1] = static_cast<std::size_t>(it - first);
      out.push_back(tuple);
    }
    if (k == 1) break;
    std::size_t pos = k - 1;
    while (pos > 0 && tuple[pos - 1] + 1 == w) tuple[--pos] = 0;
    if (pos == 0) break;
    ++tuple[pos - 1];
  }
  return out;
}

std::vector<IndexTuple> solutions_a0(const SparseDecomposition& dec, const SignVector& signs,
                                     const Integer& r, std::optional<std::size_t> window,
                                     const Budgets& budgets) {
  auto all = solutions_a(dec, signs, r, window, budgets);
  std::erase_if(all, [&](const IndexTuple& t) { return !passes_partition_filter(dec, signs, t); });
  return all;
}

FinitenessProbe finiteness_probe(const SparseDecomposition& dec, const SignVector& signs,
                                 const Integer& r, std::size_t window1, std::size_t window2,
                                 const Budgets& budgets) {
  if (window1 >= window2) invalid("finiteness probe needs window1 < window2");
  FinitenessProbe probe;
  probe.window1 = window1;
  probe.window2 = window2;
  probe.count1 = solutions_a0(dec, signs, r, window1, budgets).size();
  probe.count2 = solutions_a0(dec, signs, r, window2, budgets).size();
  probe.stabilized = probe.count1 == probe.count2;
  return probe;
}

std::vector<std::vector<std::vector<std::size_t>>> set_partitions(std::size_t k) {
  if (k == 0) return {{}};
  std::vector<std::vector<std::vector<std::size_t>>> out;
  // Restricted growth strings: label[i] <= 1 + max(label[0..i-1]).
  std::vector<std::size_t> label(k, 0);
  while (true) {
    const std::size_t blocks = *std::max_element(label.begin(), label.end()) + 1;
    std::vector<std::vector<std::size_t>> partition(blocks);
    for (std::size_t i = 0; i < k; ++i) partition[label[i]].push_back(i);
    out.push_back(std::move(partition));
    std::size_t pos = k;
    bool advanced = false;
    while (pos > 1 && !advanced) {
      --pos;
      const auto prefix = label.begin() + static_cast<std::ptrdiff_t>(pos);
      if (label[pos] <= *std::max_element(label.begin(), prefix)) {
        ++label[pos];
        std::fill(prefix + 1, label.end(), 0);
        advanced = true;
      }
    }
    if (!advanced) return out;
  }
}

UnionCheckReport lemma_union_check(const SparseDecomposition& dec, const SignVector& signs,
                                   const Integer& r, std::size_t window,
                                   const Budgets& budgets) {
  const std::size_t k = signs.size();
  if (k > 4) invalid("the union check supports k <= 4");
  const std::size_t w = resolve_window(dec, window);
  const auto spread = static_cast<long>(dec.k_spread);
  const auto& a = dec.a.elements();
  const auto& b = dec.b.elements();

  UnionCheckReport report;
  std::set<IndexTuple> assembled;
  for (const auto& partition : set_partitions(k)) {
    PartitionCell cell;
    cell.partition = partition;
    for (std::size_t p = 0; p < partition.size(); ++p) {
      int sum = 0;
      for (auto i : partition[p]) sum += signs[i];
      cell.cell_sums.emplace_back(sum);
      if (sum == 0) {
        cell.zero_cells.push_back(p);
        cell.covered.insert(cell.covered.end(), partition[p].begin(), partition[p].end());
      }
    }
    std::sort(cell.covered.begin(), cell.covered.end());
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < k; ++i) {
      if (!std::binary_search(cell.covered.begin(), cell.covered.end(), i)) rest.push_back(i);
    }
    // Position of each covered index inside sigma.
    std::vector<std::size_t> slot(k, 0);
    for (std::size_t s = 0; s < cell.covered.size(); ++s) slot[cell.covered[s]] = s;

    // Enumerate sigma in F^I.
    std::vector<std::size_t> choice(cell.covered.size(), 0);
    while (true) {
      ++report.cells;
      cell.sigma.clear();
      for (auto c : choice) cell.sigma.push_back(dec.shifts[c]);
      cell.zero_cell_shift_sums.clear();
      cell.reduced_target = r;
      for (auto p : cell.zero_cells) {
        Integer sp = 0;
        for (auto i : partition[p]) sp += signs[i] * cell.sigma[slot[i]];
        cell.reduced_target -= sp;
        cell.zero_cell_shift_sums.push_back(std::move(sp));
      }

      // A_0 of the reduced equation over the indices outside I.
      std::vector<IndexTuple> reduced;
      if (rest.empty()) {
        if (cell.reduced_target == 0) reduced.push_back({});
      } else {
        std::vector<int> sub;
        for (auto i : rest) sub.push_back(signs[i]);
        reduced = solutions_a0(dec, SignVector(sub), cell.reduced_target, w, budgets);
      }

      // For each zero cell, the pairs (u, n) with n in U(P, u): offsets
      // u in [-K, K]^P, all n + u_i inside the window on one f-level, and
      // a_{n + u_i} = b_{level} + s_i.
      std::vector<std::vector<std::vector<std::size_t>>> pieces;  // per zero cell: index lists
      bool empty_piece = reduced.empty();
      for (auto p : cell.zero_cells) {
        if (empty_piece) break;
        const auto& members = partition[p];
        std::set<std::vector<std::size_t>> found;
        std::vector<long> u(members.size(), -spread);
        while (true) {
          for (long n = 0; n < static_cast<long>(w) + spread; ++n) {
            std::vector<std::size_t> indices;
            bool ok = true;
            std::optional<std::size_t> level;
            for (std::size_t m = 0; m < members.size() && ok; ++m) {
              const long idx = n + u[m];
              if (idx < 0 || idx >= static_cast<long>(w)) {
                ok = false;
                break;
              }
              const auto i = static_cast<std::size_t>(idx);
              if (level && dec.f[i] != *level) ok = false;
              level = dec.f[i];
              if (ok && a[i] != b[*level] + cell.sigma[slot[members[m]]]) ok = false;
              indices.push_back(i);
            }
            if (ok) found.insert(indices);
          }
          std::size_t pos = 0;
          while (pos < u.size() && u[pos] == spread) u[pos++] = -spread;
          if (pos == u.size()) break;
          ++u[pos];
        }
        pieces.emplace_back(found.begin(), found.end());
        if (pieces.back().empty()) empty_piece = true;
      }
      if (!empty_piece) {
        report.covering_cells.push_back(cell);
        // Assemble n_* ⊗ (u ⊕ n) over the product of pieces.
        std::vector<std::size_t> pick(pieces.size(), 0);
        for (const auto& star : reduced) {
          std::fill(pick.begin(), pick.end(), 0);
          while (true) {
            IndexTuple tuple(k, 0);
            for (std::size_t j = 0; j < rest.size(); ++j) tuple[rest[j]] = star[j];
            for (std::size_t z = 0; z < pieces.size(); ++z) {
              const auto& members = partition[cell.zero_cells[z]];
              const auto& idx = pieces[z][pick[z]];
              for (std::size_t m = 0; m < members.size(); ++m) tuple[members[m]] = idx[m];
            }
            assembled.insert(std::move(tuple));
            std::size_t pos = 0;
            while (pos < pick.size() && pick[pos] + 1 == pieces[pos].size()) pick[pos++] = 0;
            if (pos == pick.size()) break;
            ++pick[pos];
          }
        }
      }

      std::size_t pos = 0;
      while (pos < choice.size() && choice[pos] + 1 == dec.shifts.size()) choice[pos++] = 0;
      if (pos == choice.size()) break;
      ++choice[pos];
    }
  }

  const auto direct = solutions_a(dec, signs, r, w, budgets);
  report.direct_count = direct.size();
  report.assembled_count = assembled.size();
  const std::set<IndexTuple> direct_set(direct.begin(), direct.end());
  for (const auto& t : direct) {
    if (!assembled.count(t)) {
      report.passed = false;
      report.discrepancy_kind = "missing";
      report.discrepancy = t;
      return report;
    }
  }
  for (const auto& t : assembled) {
    if (!direct_set.count(t)) {
      report.passed = false;
      report.discrepancy_kind = "extra";
      report.discrepancy = t;
      return report;
    }
  }
  return report;
}

}  // namespace sparsez
