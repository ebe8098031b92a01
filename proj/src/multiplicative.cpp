#include "sparsez/multiplicative.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <type_traits>
#include <cmath>

#include "sparsez/error.hpp"

namespace sparsez {

namespace {

using Matrix = std::vector<std::vector<Rational>>;

// Reduced row echelon form in place; returns the pivot column of each
// nonzero row.
std::vector<std::size_t> rref(Matrix& m) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t cols = m[0].size();
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
    std::size_t pick = row;
    while (pick < m.size() && m[pick][col] == 0) ++pick;
    if (pick == m.size()) continue;
    std::swap(m[row], m[pick]);
    const Rational lead = m[row][col];
    for (auto& v : m[row]) v /= lead;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][col] == 0) continue;
      const Rational factor = m[r][col];
      for (std::size_t c = 0; c < cols; ++c) m[r][c] -= factor * m[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

struct Factored {
  std::vector<std::uint64_t> primes;
  std::vector<std::vector<long>> rows;
};

Factored factor_all(Generators q, const Budgets& budgets) {
  std::vector<std::vector<PrimePower>> parts;
  std::set<std::uint64_t> primes;
  for (auto g : q) {
    if (g < 2) throw Error(ErrorCode::InvalidSpec, "generators must be >= 2");
    parts.push_back(factorize(g, budgets));
    for (const auto& pp : parts.back()) primes.insert(pp.prime);
  }
  Factored out;
  out.primes.assign(primes.begin(), primes.end());
  for (const auto& part : parts) {
    std::vector<long> row(out.primes.size(), 0);
    for (const auto& pp : part) {
      auto it = std::lower_bound(out.primes.begin(), out.primes.end(), pp.prime);
      row[static_cast<std::size_t>(it - out.primes.begin())] = pp.exponent;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

bool parallel(const std::vector<long>& a, const std::vector<long>& b) {
  // Both vectors are nonzero with nonnegative entries, so parallel means
  // a_i b_j = a_j b_i for every pair of coordinates.
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (a[i] * b[j] != a[j] * b[i]) return false;
    }
    if ((a[i] == 0) != (b[i] == 0)) return false;
  }
  return true;
}

long vector_gcd(const std::vector<long>& v) {
  long g = 0;
  for (auto x : v) g = std::gcd(g, x);
  return g;
}

// Class data for a set of pairwise parallel exponent vectors: the minimal
// common base and each member's exponent over it.
struct CommonBase {
  std::int64_t base;
  std::vector<unsigned> exponents;
};

CommonBase common_base(const std::vector<std::uint64_t>& primes,
                       const std::vector<const std::vector<long>*>& rows) {
  const auto& first = *rows.front();
  const long g0 = vector_gcd(first);
  std::vector<long> direction(first.size());
  std::size_t anchor = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    direction[i] = first[i] / g0;
    if (direction[i] != 0 && direction[anchor] == 0) anchor = i;
  }
  std::vector<unsigned> e;
  unsigned g = 0;
  for (const auto* row : rows) {
    e.push_back(static_cast<unsigned>((*row)[anchor] / direction[anchor]));
    g = std::gcd(g, e.back());
  }
  Integer radical = 1;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    radical *= ipow(Integer(static_cast<unsigned long>(primes[i])),
                    static_cast<unsigned long>(direction[i]));
  }
  for (auto& x : e) x /= g;
  return {checked_int64(ipow(radical, g), "lacunary base"), std::move(e)};
}

template <class T>
bool is_power_of(T y, const T& c) {
  if (y < 1) return false;
  while (y % c == 0) y /= c;
  return y == 1;
}

}  // namespace

std::vector<PrimePower> factorize(std::int64_t n, const Budgets& budgets) {
  if (n < 1) throw Error(ErrorCode::InvalidSpec, "factorize needs n >= 1");
  std::vector<PrimePower> out;
  auto m = static_cast<std::uint64_t>(n);
  for (std::uint64_t p = 2; p <= budgets.prime_bound && p * p <= m; p += (p == 2 ? 1 : 2)) {
    if (m % p != 0) continue;
    unsigned e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    out.push_back({p, e});
  }
  if (m > 1) {
    const auto bound = static_cast<unsigned __int128>(budgets.prime_bound);
    if (static_cast<unsigned __int128>(m) >= bound * bound) {
      throw Error(ErrorCode::FactorizationIncomplete,
                  std::to_string(n) + " has a cofactor " + std::to_string(m) +
                      " beyond the trial-division bound");
    }
    out.push_back({m, 1});
  }
  return out;
}

Window enumerate_monoid(Generators q, const Integer& bound, const Budgets& budgets) {
  std::vector<std::int64_t> gens(q.begin(), q.end());
  validate(SetSpec::monoid(gens));
  if (bound < 1) throw Error(ErrorCode::InvalidSpec, "bound must be >= 1");
  std::vector<Integer> out;
  std::set<Integer> frontier{Integer(1)};
  while (!frontier.empty()) {
    Integer x = *frontier.begin();
    frontier.erase(frontier.begin());
    for (auto g : gens) {
      Integer y = x * g;
      if (y > bound) break;
      frontier.insert(std::move(y));
    }
    out.push_back(std::move(x));
    if (out.size() + frontier.size() > budgets.elements) {
      throw Error(ErrorCode::BudgetExceeded, "monoid enumeration passes the element budget");
    }
  }
  return Window(std::move(out), 1, bound, SetSpec::monoid(std::move(gens)));
}

Integer exponent_encode(Generators q, const ExponentVector& n) {
  if (n.coords.size() != q.size()) {
    throw Error(ErrorCode::InvalidSpec, "exponent vector length differs from generator count");
  }
  Integer out = 1;
  for (std::size_t i = 0; i < q.size(); ++i) out *= ipow(Integer(q[i]), n.coords[i]);
  return out;
}

ExponentVector exponent_decode(Generators q, const Integer& x, const Budgets& budgets) {
  const auto cert = is_mult_independent(q, budgets);
  if (!cert.independent) {
    throw Error(ErrorCode::NotIndependent, "generators are multiplicatively dependent");
  }
  auto not_in = [&] {
    return Error(ErrorCode::NotInMonoid, to_decimal(x) + " is not in the monoid");
  };
  if (x < 1) throw not_in();
  // Prime exponents of x over the primes of Q.
  Integer rest = x;
  std::vector<Rational> target;
  for (auto p : cert.primes) {
    long e = 0;
    const auto prime = static_cast<unsigned long>(p);
    while (mpz_divisible_ui_p(rest.get_mpz_t(), prime)) {
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), prime);
      ++e;
    }
    target.emplace_back(e);
  }
  if (rest != 1) throw not_in();
  // Solve sum_i n_i row_i = target; independence makes the solution unique.
  const std::size_t d = q.size();
  Matrix system(cert.primes.size(), std::vector<Rational>(d + 1));
  for (std::size_t p = 0; p < cert.primes.size(); ++p) {
    for (std::size_t i = 0; i < d; ++i) system[p][i] = cert.exponent_matrix[i][p];
    system[p][d] = target[p];
  }
  const auto pivots = rref(system);
  if (!pivots.empty() && pivots.back() == d) throw not_in();
  ExponentVector out;
  out.coords.assign(d, 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    const Rational& v = system[r][d];
    if (v.get_den() != 1 || v < 0) throw not_in();
    out.coords[pivots[r]] = static_cast<std::uint32_t>(v.get_num().get_ui());
  }
  return out;
}

IndependenceCertificate is_mult_independent(Generators q, const Budgets& budgets) {
  auto factored = factor_all(q, budgets);
  IndependenceCertificate cert;
  cert.primes = factored.primes;
  cert.exponent_matrix = factored.rows;
  const std::size_t d = q.size();
  // Columns are generators, so the nullspace gives the relation.
  Matrix m(cert.primes.size(), std::vector<Rational>(d));
  for (std::size_t p = 0; p < cert.primes.size(); ++p) {
    for (std::size_t i = 0; i < d; ++i) m[p][i] = factored.rows[i][p];
  }
  const auto pivots = rref(m);
  cert.rank = pivots.size();
  cert.independent = cert.rank == d;
  if (cert.independent) return cert;

  std::size_t free = 0;
  while (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) ++free;
  std::vector<Rational> relation(d, 0);
  relation[free] = 1;
  for (std::size_t r = 0; r < pivots.size(); ++r) relation[pivots[r]] = -m[r][free];
  Integer lcm = 1;
  for (const auto& v : relation) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), v.get_den().get_mpz_t());
  Integer g = 0;
  for (const auto& v : relation) {
    Integer n = v.get_num() * (lcm / v.get_den());
    cert.relation.push_back(n);
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  const bool flip = std::find_if(cert.relation.begin(), cert.relation.end(),
                                 [](const Integer& n) { return n != 0; })
                        ->get_si() < 0;
  for (auto& n : cert.relation) {
    n /= g;
    if (flip) n = -n;
  }
  return cert;
}

LacunarityVerdict classify_lacunary(Generators q, const Budgets& budgets) {
  if (q.empty()) throw Error(ErrorCode::InvalidSpec, "need at least one generator");
  auto factored = factor_all(q, budgets);
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      if (!parallel(factored.rows[i], factored.rows[j])) {
        return {LacunarityVerdict::NonLacunary{q[i], q[j]}};
      }
    }
  }
  std::vector<const std::vector<long>*> rows;
  for (const auto& r : factored.rows) rows.push_back(&r);
  auto base = common_base(factored.primes, rows);
  LacunarityVerdict::Lacunary out{base.base, {}};
  for (std::size_t i = 0; i < q.size(); ++i) out.exponents.emplace_back(q[i], base.exponents[i]);
  return {out};
}

RatioStatistics ratio_statistics(const Window& window, double tail_fraction) {
  if (window.size() < 3) {
    throw Error(ErrorCode::WindowTooSmall, "ratio statistics need at least 3 elements");
  }
  if (!(tail_fraction > 0 && tail_fraction <= 1)) {
    throw Error(ErrorCode::InvalidSpec, "tail fraction must lie in (0, 1]");
  }
  const auto& xs = window.elements();
  const std::size_t gaps = xs.size() - 1;
  auto count = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(gaps)));
  count = std::clamp<std::size_t>(count, 1, gaps);
  RatioStatistics out;
  for (std::size_t i = xs.size() - 1 - count; i + 1 < xs.size(); ++i) {
    if (xs[i] <= 0) throw Error(ErrorCode::InvalidSpec, "ratios need positive elements");
    Rational r(xs[i + 1], xs[i]);
    r.canonicalize();
    if (out.ratios_considered == 0 || r > out.max_tail_ratio) out.max_tail_ratio = r;
    if (out.ratios_considered == 0 || r < out.min_tail_ratio) out.min_tail_ratio = r;
    ++out.ratios_considered;
  }
  return out;
}

CommonBaseReduction common_base_reduction(Generators q, const Budgets& budgets) {
  if (q.empty()) throw Error(ErrorCode::InvalidSpec, "need at least one generator");
  auto factored = factor_all(q, budgets);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < q.size(); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return parallel(factored.rows[g.front()], factored.rows[i]);
    });
    if (it == groups.end()) {
      groups.push_back({i});
    } else {
      it->push_back(i);
    }
  }
  CommonBaseReduction out;
  out.placements.resize(q.size());
  for (std::size_t c = 0; c < groups.size(); ++c) {
    std::vector<const std::vector<long>*> rows;
    for (auto i : groups[c]) rows.push_back(&factored.rows[i]);
    auto base = common_base(factored.primes, rows);
    std::uint64_t lcm = 1;
    for (auto e : base.exponents) lcm = std::lcm(lcm, static_cast<std::uint64_t>(e));
    CommonBaseReduction::BaseClass cls{{}, base.base, lcm, ipow(Integer(base.base), lcm)};
    for (std::size_t m = 0; m < groups[c].size(); ++m) {
      const auto i = groups[c][m];
      cls.members.push_back(q[i]);
      out.placements[i] = {q[i], c, base.exponents[m], lcm / base.exponents[m]};
    }
    out.classes.push_back(std::move(cls));
  }
  return out;
}

SetSpec reduction_union_spec(const CommonBaseReduction& reduction) {
  std::vector<SetSpec> parts;
  for (const auto& cls : reduction.classes) {
    parts.push_back(SetSpec::power_set(checked_int64(cls.combined, "combined base")));
  }
  return SetSpec::union_of(std::move(parts));
}

namespace {

template <class T>
ReductionReport run_reduction_checks(const CommonBaseReduction& red, const Integer& bound,
                                     auto convert) {
  ReductionReport report;
  report.bound = bound;
  std::vector<T> c;
  for (const auto& cls : red.classes) c.push_back(convert(cls.combined));
  std::vector<T> gens;
  for (const auto& p : red.placements) gens.push_back(convert(Integer(p.generator)));
  const std::size_t t = c.size();
  auto in_a = [&](const T& y) {
    return std::any_of(c.begin(), c.end(), [&](const T& ci) { return is_power_of(y, ci); });
  };
  auto fail = [&](std::string claim, const Integer& x) {
    report.passed = false;
    report.failed_claim = std::move(claim);
    report.counterexample = x;
  };
  const std::uint64_t last = checked_int64(bound, "reduction bound");
  for (std::uint64_t xi = 1; xi <= last; ++xi) {
    T x;
    if constexpr (std::is_same_v<T, Integer>) {
      x = Integer(static_cast<unsigned long>(xi));
    } else {
      x = xi;
    }
    for (std::size_t i = 0; i < t; ++i) {
      const bool lhs = is_power_of(x, c[i]);
      bool rhs = true;
      T y = x;
      for (std::size_t m = 1; m <= t && rhs; ++m) {
        y *= c[i];
        rhs = in_a(y);
      }
      ++report.checks;
      if (lhs != rhs) {
        fail("x in c_" + std::to_string(i + 1) + "^N iff c^m x in A for all 1 <= m <= t",
             Integer(static_cast<unsigned long>(xi)));
        return report;
      }
    }
    for (std::size_t gi = 0; gi < red.placements.size(); ++gi) {
      const auto& p = red.placements[gi];
      const T& g = gens[gi];
      const T& ci = c[p.class_index];
      const bool lhs = is_power_of(x, g);
      bool rhs = false;
      T y = x;
      for (std::uint64_t m = 0; m < p.k && !rhs; ++m) {
        if (m > 0) y *= g;
        rhs = is_power_of(y, ci);
      }
      ++report.checks;
      if (lhs != rhs) {
        fail("x in " + std::to_string(p.generator) + "^N iff q^m x in c^N for some m < k",
             Integer(static_cast<unsigned long>(xi)));
        return report;
      }
    }
  }
  return report;
}

}  // namespace

ReductionReport verify_reduction_claims(const CommonBaseReduction& reduction,
                                        const Integer& bound) {
  if (bound < 1) throw Error(ErrorCode::InvalidSpec, "bound must be >= 1");
  // Largest product formed: bound times c^t or q^(k-1).
  Integer peak = 1;
  const auto t = static_cast<unsigned long>(reduction.classes.size());
  for (const auto& cls : reduction.classes) peak = std::max(peak, Integer(ipow(cls.combined, t)));
  for (const auto& p : reduction.placements) {
    peak = std::max(peak, Integer(ipow(Integer(p.generator), p.k)));
  }
  peak *= bound;
  if (mpz_sizeinbase(peak.get_mpz_t(), 2) < 127) {
    auto to_u128 = [](const Integer& v) {
      unsigned __int128 out = 0;
      for (char ch : v.get_str(16)) {
        out = out * 16 + static_cast<unsigned>(ch <= '9' ? ch - '0' : ch - 'a' + 10);
      }
      return out;
    };
    return run_reduction_checks<unsigned __int128>(reduction, bound, to_u128);
  }
  return run_reduction_checks<Integer>(reduction, bound, [](const Integer& v) { return v; });
}

}  // namespace sparsez
