#include "sparsez/equations.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "sparsez/error.hpp"

namespace sparsez {

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidSpec, message);
}

void check_budget(std::size_t domain, std::size_t k, const Budgets& budgets) {
  const double work = std::pow(static_cast<double>(domain), static_cast<double>(k) - 1);
  if (work > static_cast<double>(budgets.elements)) {
    throw Error(ErrorCode::BudgetExceeded, "solution scan passes the element budget");
  }
}

template <class T>
bool dotted(const std::vector<T>& xs, const SignVector& signs, const T& target) {
  const std::size_t k = xs.size();
  const std::size_t full = (std::size_t{1} << k) - 1;
  std::vector<T> sums(full + 1);
  sums[0] = 0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    const auto low = static_cast<std::size_t>(__builtin_ctzll(mask));
    if (signs[low] > 0) {
      sums[mask] = sums[mask & (mask - 1)] + xs[low];
    } else {
      sums[mask] = sums[mask & (mask - 1)] - xs[low];
    }
    if (mask != full && sums[mask] == 0) return false;
  }
  return sums[full] == target;
}

// Calls emit(indices) for every dotted solution in domain^k, in
// lexicographic order of indices.
template <class T>
void scan(const std::vector<T>& domain, const SignVector& signs, const T& target,
          const std::function<void(const std::vector<std::size_t>&)>& emit) {
  const std::size_t k = signs.size();
  if (domain.empty()) return;
  std::vector<std::size_t> idx(k, 0);
  std::vector<T> xs(k);
  while (true) {
    T partial = target;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      xs[i] = domain[idx[i]];
      if (signs[i] > 0) {
        partial -= xs[i];
      } else {
        partial += xs[i];
      }
    }
    T need = signs[k - 1] > 0 ? partial : T(-partial);
    auto it = std::lower_bound(domain.begin(), domain.end(), need);
    if (it != domain.end() && *it == need) {
      idx[k - 1] = static_cast<std::size_t>(it - domain.begin());
      xs[k - 1] = need;
      if (dotted(xs, signs, target)) emit(idx);
    }
    if (k == 1) return;
    std::size_t pos = k - 1;
    while (pos > 0 && idx[pos - 1] + 1 == domain.size()) idx[--pos] = 0;
    if (pos == 0) return;
    ++idx[pos - 1];
  }
}

// Narrow values to int64 when every partial sum of k terms stays in range.
std::optional<std::vector<std::int64_t>> narrow(const std::vector<Integer>& xs,
                                                const Integer& target, std::size_t k) {
  const std::int64_t headroom = std::numeric_limits<std::int64_t>::max() / static_cast<std::int64_t>(k + 2);
  auto fits = [&](const Integer& x) {
    auto v = to_int64(x);
    return v && *v <= headroom && *v >= -headroom;
  };
  if (!fits(target)) return std::nullopt;
  std::vector<std::int64_t> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    if (!fits(x)) return std::nullopt;
    out.push_back(x.get_si());
  }
  return out;
}

void scan_domain(const std::vector<Integer>& domain, const SignVector& signs, const Integer& target,
                 const std::function<void(const std::vector<std::size_t>&)>& emit) {
  if (auto small = narrow(domain, target, signs.size())) {
    scan<std::int64_t>(*small, signs, target.get_si(), emit);
  } else {
    scan<Integer>(domain, signs, target, emit);
  }
}

void require_independent(Generators q) {
  if (!is_mult_independent(q).independent) {
    throw Error(ErrorCode::NotIndependent, "generators are multiplicatively dependent");
  }
}

// Monoid values over the exponent box, sorted, with their exponent vectors.
struct BoxDomain {
  std::vector<Integer> values;
  std::vector<std::vector<std::uint32_t>> exponents;
};

BoxDomain box_domain(Generators q, unsigned box) {
  const std::size_t d = q.size();
  std::vector<std::pair<Integer, std::vector<std::uint32_t>>> items;
  std::vector<std::uint32_t> e(d, 0);
  while (true) {
    items.emplace_back(exponent_encode(q, ExponentVector{e}), e);
    std::size_t pos = 0;
    while (pos < d && e[pos] == box) e[pos++] = 0;
    if (pos == d) break;
    ++e[pos];
  }
  std::sort(items.begin(), items.end());
  BoxDomain out;
  for (auto& [v, ex] : items) {
    out.values.push_back(std::move(v));
    out.exponents.push_back(std::move(ex));
  }
  return out;
}

std::vector<ExponentTuple> solve_in_box(const BoxDomain& dom, const SignVector& signs,
                                        const Integer& target, const Budgets& budgets) {
  check_budget(dom.values.size(), signs.size(), budgets);
  std::vector<ExponentTuple> out;
  scan_domain(dom.values, signs, target, [&](const std::vector<std::size_t>& idx) {
    ExponentTuple t;
    for (auto i : idx) t.insert(t.end(), dom.exponents[i].begin(), dom.exponents[i].end());
    out.push_back(std::move(t));
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SignVector::SignVector(std::vector<int> signs) : signs_(std::move(signs)) {
  if (signs_.empty()) invalid("sign vector needs k >= 1");
  for (int s : signs_) {
    if (s != 1 && s != -1) invalid("sign vector entries must be 1 or -1");
  }
}

SignVector SignVector::parse(std::string_view text) {
  std::vector<int> signs;
  if (!text.empty() && text.find_first_not_of("+-") == std::string_view::npos) {
    for (char ch : text) signs.push_back(ch == '+' ? 1 : -1);
    return SignVector(std::move(signs));
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto token = text.substr(start, comma - start);
    if (token == "1" || token == "+1" || token == "+") {
      signs.push_back(1);
    } else if (token == "-1" || token == "-") {
      signs.push_back(-1);
    } else {
      invalid("bad sign '" + std::string(token) + "'");
    }
    start = comma + 1;
  }
  return SignVector(std::move(signs));
}

std::vector<SignVector> SignVector::all(std::size_t k) {
  if (k == 0 || k > 20) invalid("sign vectors need 1 <= k <= 20");
  std::vector<SignVector> out;
  for (std::size_t bits = 0; bits < (std::size_t{1} << k); ++bits) {
    std::vector<int> s(k);
    for (std::size_t i = 0; i < k; ++i) s[i] = (bits >> (k - 1 - i)) & 1 ? 1 : -1;
    out.emplace_back(std::move(s));
  }
  return out;
}

std::string SignVector::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < signs_.size(); ++i) {
    if (i > 0) out += ',';
    out += signs_[i] > 0 ? "1" : "-1";
  }
  return out;
}

bool is_dotted(std::span<const Integer> values, const SignVector& signs, const Integer& target) {
  if (values.size() != signs.size()) invalid("tuple length differs from the sign vector");
  return dotted(std::vector<Integer>(values.begin(), values.end()), signs, target);
}

DottedSolutionSet dotted_solutions(const EquationQuery& query, const Budgets& budgets) {
  const auto& domain = query.domain.elements();
  check_budget(domain.size(), query.signs.size(), budgets);
  DottedSolutionSet out;
  out.source_bound = query.domain.bound();
  scan_domain(domain, query.signs, query.target, [&](const std::vector<std::size_t>& idx) {
    std::vector<Integer> t;
    for (auto i : idx) t.push_back(domain[i]);
    out.solutions.push_back(std::move(t));
  });
  return out;
}

WeightedSumProfile weighted_sum_profile(const Window& domain, unsigned k,
                                        std::int64_t max_target, const Budgets& budgets) {
  if (k < 1) invalid("profile needs k >= 1");
  if (max_target < 1) invalid("profile needs R >= 1");
  const auto& xs = domain.elements();
  check_budget(xs.size(), k + 1, budgets);
  auto small = narrow(xs, Integer(max_target), k);
  if (!small) throw Error(ErrorCode::UnsupportedBound, "profile domain is too large for 64-bit sums");
  const auto& d = *small;

  WeightedSumProfile out;
  out.k = k;
  out.max_target = max_target;
  out.totals.assign(static_cast<std::size_t>(max_target), 0);
  const auto signs_all = SignVector::all(k);
  for (const auto& signs : signs_all) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_target), 0);
    if (!d.empty()) {
      std::vector<std::size_t> idx(k, 0);
      std::vector<std::int64_t> values(k);
      while (true) {
        std::int64_t partial = 0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
          values[i] = d[idx[i]];
          partial += signs[i] * values[i];
        }
        // r = partial + c_k x in [1, R].
        const int ck = signs[k - 1];
        const std::int64_t lo = ck > 0 ? 1 - partial : partial - max_target;
        const std::int64_t hi = ck > 0 ? max_target - partial : partial - 1;
        for (auto it = std::lower_bound(d.begin(), d.end(), lo); it != d.end() && *it <= hi; ++it) {
          values[k - 1] = *it;
          const std::int64_t r = partial + ck * *it;
          if (dotted(values, signs, r)) ++counts[static_cast<std::size_t>(r - 1)];
        }
        if (k == 1) break;
        std::size_t pos = k - 1;
        while (pos > 0 && idx[pos - 1] + 1 == d.size()) idx[--pos] = 0;
        if (pos == 0) break;
        ++idx[pos - 1];
      }
    }
    for (std::size_t r = 0; r < counts.size(); ++r) out.totals[r] += counts[r];
    out.per_sign.push_back(std::move(counts));
  }
  out.argmax = 1;
  for (std::size_t r = 0; r < out.totals.size(); ++r) {
    if (out.totals[r] > out.max) {
      out.max = out.totals[r];
      out.argmax = static_cast<std::int64_t>(r) + 1;
    }
  }
  return out;
}

std::vector<ExponentTuple> box_solutions(Generators q, const SignVector& signs,
                                         const Integer& target, unsigned box,
                                         const Budgets& budgets) {
  require_independent(q);
  return solve_in_box(box_domain(q, box), signs, target, budgets);
}

ExponentTuple orbit_minimal(const ExponentTuple& tuple, std::size_t d) {
  if (d == 0 || tuple.size() % d != 0) invalid("tuple length is not a multiple of d");
  const std::size_t k = tuple.size() / d;
  ExponentTuple out = tuple;
  for (std::size_t j = 0; j < d; ++j) {
    std::uint32_t low = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t i = 0; i < k; ++i) low = std::min(low, tuple[i * d + j]);
    for (std::size_t i = 0; i < k; ++i) out[i * d + j] -= low;
  }
  return out;
}

std::vector<ExponentTuple> scalar_classes(Generators q, const SignVector& signs, unsigned box,
                                          const Budgets& budgets) {
  std::set<ExponentTuple> reps;
  for (const auto& t : box_solutions(q, signs, Integer(0), box, budgets)) {
    reps.insert(orbit_minimal(t, q.size()));
  }
  return {reps.begin(), reps.end()};
}

OrbitDecomposition orbit_decompose(Generators q, const SignVector& signs, unsigned box,
                                   unsigned margin, const Budgets& budgets) {
  if (margin < 1) invalid("margin must be >= 1");
  if (margin > box) invalid("margin exceeds the box");
  OrbitDecomposition out;
  out.d = q.size();
  out.k = signs.size();
  out.box = box;
  for (auto& rep : scalar_classes(q, signs, box, budgets)) {
    if (*std::max_element(rep.begin(), rep.end()) <= box - margin) {
      out.base_points.push_back(std::move(rep));
    }
  }
  return out;
}

OrbitVerification orbit_verify(const OrbitDecomposition& decomposition, Generators q,
                               const SignVector& signs, unsigned box, const Budgets& budgets) {
  if (box < decomposition.box) invalid("verification box is smaller than the decomposition box");
  if (q.size() != decomposition.d || signs.size() != decomposition.k) {
    invalid("decomposition shape differs from the query");
  }
  const std::size_t d = decomposition.d;
  const std::size_t k = decomposition.k;
  const auto solutions = box_solutions(q, signs, Integer(0), box, budgets);

  std::set<ExponentTuple> orbit_points;
  for (const auto& base : decomposition.base_points) {
    if (base.size() != d * k) invalid("base point has the wrong length");
    if (std::any_of(base.begin(), base.end(), [&](std::uint32_t v) { return v > box; })) continue;
    // Room along each axis before some block leaves the box.
    std::vector<std::uint32_t> room(d, box);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < d; ++j) room[j] = std::min(room[j], box - base[i * d + j]);
    }
    std::vector<std::uint32_t> m(d, 0);
    while (true) {
      ExponentTuple point = base;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < d; ++j) point[i * d + j] += m[j];
      }
      orbit_points.insert(std::move(point));
      std::size_t pos = 0;
      while (pos < d && m[pos] == room[pos]) m[pos++] = 0;
      if (pos == d) break;
      ++m[pos];
    }
  }

  OrbitVerification out;
  out.box = box;
  out.solutions = solutions.size();
  out.orbit_points = orbit_points.size();
  const std::set<ExponentTuple> solution_set(solutions.begin(), solutions.end());
  for (const auto& s : solutions) {
    if (!orbit_points.count(s)) {
      out.passed = false;
      out.discrepancy_kind = "missed";
      out.discrepancy = s;
      return out;
    }
  }
  for (const auto& p : orbit_points) {
    if (!solution_set.count(p)) {
      out.passed = false;
      out.discrepancy_kind = "spurious";
      out.discrepancy = p;
      return out;
    }
  }
  return out;
}

FinitenessReport inhomogeneous_finiteness(Generators q, const SignVector& signs,
                                          const Integer& target, unsigned box,
                                          const Budgets& budgets) {
  if (target == 0) invalid("inhomogeneous equations need r != 0");
  require_independent(q);
  FinitenessReport out;
  out.solutions = solve_in_box(box_domain(q, box), signs, target, budgets);
  out.half_box_count = solve_in_box(box_domain(q, box / 2), signs, target, budgets).size();
  out.stabilized = out.half_box_count == out.solutions.size();
  const std::size_t d = q.size();
  for (const auto& t : out.solutions) {
    std::vector<Integer> values;
    for (std::size_t i = 0; i < signs.size(); ++i) {
      values.push_back(exponent_encode(
          q, ExponentVector{std::vector<std::uint32_t>(t.begin() + static_cast<std::ptrdiff_t>(i * d),
                                                       t.begin() + static_cast<std::ptrdiff_t>((i + 1) * d))}));
    }
    out.values.push_back(std::move(values));
  }
  return out;
}

}  // namespace sparsez
