#include <doctest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "sparsez/aq.hpp"
#include "sparsez/error.hpp"
#include "sparsez/multiplicative.hpp"
#include "sparsez/sumsets.hpp"

using namespace sparsez;

namespace {

using I64s = std::vector<std::int64_t>;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

Window window_of(const I64s& xs, std::int64_t bound) {
  std::vector<Integer> v(xs.begin(), xs.end());
  return Window(v, 0, bound);
}

I64s as_i64(const Window& w) {
  I64s out;
  for (const auto& x : w.elements()) out.push_back(x.get_si());
  return out;
}

}  // namespace

TEST_CASE("signed sumsets") {
  const auto small = signed_sumset(window_of({1, 2, 4}, 10), 1, 10);
  CHECK(small.values == I64s{-4, -2, -1, 0, 1, 2, 4});
  CHECK(small.contains(-2));
  CHECK_FALSE(small.contains(3));

  SUBCASE("Gamma({2,3}) pairs against brute force") {
    const auto w = enumerate_monoid(std::vector<std::int64_t>{2, 3}, 100);
    CHECK(signed_sumset(w, 2, 20).values == oracle::signed_sumset(as_i64(w), 2, 20));
  }
  SUBCASE("A_2 window covers [-100, 100] in six steps") {
    std::vector<Integer> a;
    for (int n = 0; n <= 12; ++n) a.push_back(aq::element(2, n));
    const auto s = signed_sumset(Window(a, 0, a.back()), 6, 100);
    CHECK(s.values.size() == 201);
  }
  SUBCASE("symmetric and monotone in n") {
    const auto w = enumerate_monoid(std::vector<std::int64_t>{3, 5}, 2000);
    std::vector<std::int64_t> prev;
    for (unsigned n = 0; n <= 4; ++n) {
      const auto s = signed_sumset(w, n, 300);
      for (auto v : s.values) CHECK(s.contains(-v));
      for (auto v : prev) CHECK(s.contains(v));
      CHECK(s.values == oracle::signed_sumset(as_i64(w), n, 300));
      prev = s.values;
    }
  }
  SUBCASE("budget") {
    Budgets tight;
    tight.elements = 50;
    const auto w = enumerate_monoid(std::vector<std::int64_t>{2, 3}, 100000);
    CHECK(code_of([&] { signed_sumset(w, 4, 1000, tight); }) == ErrorCode::BudgetExceeded);
  }
}

TEST_CASE("sumset probes and residue classes") {
  const auto probe = signed_sumset_probe(SetSpec::monoid({2, 3}), 1000, 2, 100);
  CHECK(probe.stabilized);
  CHECK(probe.at_bound.values == probe.at_double.values);

  const auto everything = signed_sumset(window_of({1}, 1), 30, 30);
  CHECK(full_residue_class(everything, 5) == 1);
  const auto evens = signed_sumset(window_of({2}, 2), 10, 20);
  CHECK(full_residue_class(evens, 5) == 2);
  CHECK(full_residue_class(signed_sumset(window_of({5}, 5), 1, 20), 3) == std::nullopt);

  SUBCASE("every fixed modulus falls away as the range grows") {
    // Σ_2(±Γ({2,3})) holds full classes mod d only on short ranges, and the
    // least such d grows with the range.
    const auto w = enumerate_monoid(std::vector<std::int64_t>{2, 3}, 1000000);
    const auto at100 = full_residue_class(signed_sumset(w, 2, 100), 200);
    const auto at1000 = full_residue_class(signed_sumset(w, 2, 1000), 2000);
    const auto at10000 = full_residue_class(signed_sumset(w, 2, 10000), 20000);
    REQUIRE(at100);
    REQUIRE(at1000);
    REQUIRE(at10000);
    CHECK(*at100 < *at1000);
    CHECK(*at1000 < *at10000);
    CHECK(full_residue_class(signed_sumset(w, 2, 10000), *at1000) == std::nullopt);
  }
}

TEST_CASE("longest arithmetic progressions") {
  CHECK(longest_ap(I64s{1, 2, 3, 4, 10}) == ArithmeticProgression{4, 1, 1});
  CHECK(longest_ap(I64s{1, 2, 4, 8, 16}) == ArithmeticProgression{2, 1, 1});
  CHECK(longest_ap(I64s{7}, 3) == ArithmeticProgression{1, 7, 3});
  CHECK(longest_ap(I64s{}).length == 0);
  CHECK(longest_ap(I64s{0, 5, 10, 11, 12}, 2) == ArithmeticProgression{3, 0, 5});
  CHECK(longest_ap(I64s{-6, -3, 0, 3}) == ArithmeticProgression{4, -6, 3});

  SUBCASE("Gamma({2,3}) pair sums do not grow with the source bound") {
    auto restrict_nonneg = [](const SignedSumsetWindow& s) {
      I64s out;
      for (auto v : s.values) {
        if (v >= 0) out.push_back(v);
      }
      return out;
    };
    const auto at1000 = signed_sumset(enumerate_monoid(std::vector<std::int64_t>{2, 3}, 1000), 2, 1000);
    const auto at2000 = signed_sumset(enumerate_monoid(std::vector<std::int64_t>{2, 3}, 2000), 2, 1000);
    const auto ap1 = longest_ap(restrict_nonneg(at1000));
    const auto ap2 = longest_ap(restrict_nonneg(at2000));
    CHECK(ap2.length <= ap1.length);
    CHECK(ap1 == oracle::longest_ap(restrict_nonneg(at1000), 1));
  }
}

TEST_CASE("density reports") {
  I64s evens;
  for (std::int64_t x = 2; x <= 100; x += 2) evens.push_back(x);
  const std::vector<Integer> marks{10, 100};
  const auto r = density_report(evens, 100, marks);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].ratio == Rational(1, 2));
  CHECK(r.rows[1].ratio == Rational(1, 2));
  CHECK(r.rows[1].count == 50);

  const std::vector<Integer> ten{10};
  CHECK(density_report(I64s{1}, 10, ten).rows[0].ratio == Rational(1, 10));
  CHECK(density_report(window_of({1}, 10), ten).rows[0].ratio == Rational(1, 10));
  const std::vector<Integer> too_far{11};
  CHECK(code_of([&] { density_report(I64s{1}, 10, too_far); }) == ErrorCode::BoundExceeded);

  SUBCASE("the A_2 exceptional set is thin") {
    const auto ctx = aq::build_context(2, 1000000);
    for (std::int64_t m : {1000, 1000000}) {
      const std::vector<Integer> at{m};
      const auto row = density_report(ctx.x, m, at).rows[0];
      const double lm = std::log2(static_cast<double>(m));
      CHECK(row.ratio.get_d() <= (std::log2(3.0) + lm) * lm / static_cast<double>(m));
    }
  }
}

TEST_CASE("additive basis witnesses") {
  I64s all;
  for (std::int64_t x = 1; x <= 50; ++x) all.push_back(x);
  CHECK(additive_basis_witness(all, 50, 50) == 1);
  CHECK(additive_basis_witness(I64s{2, 3}, 10, 10) == 4);
  CHECK(oracle::basis_witness({2, 3}, 10, 10) == 4);
  CHECK(additive_basis_witness(I64s{}, 10, 10) == 10);
  CHECK(code_of([] { additive_basis_witness(I64s{}, 10, 10, 5); }) == ErrorCode::NotFoundUpTo);
  CHECK(code_of([] { additive_basis_witness(I64s{2}, 5, 10); }) == ErrorCode::BoundExceeded);

  const auto ctx = aq::build_context(2, 1000);
  CHECK(additive_basis_witness(ctx.c, 1000, 1000) <= 5);

  SUBCASE("agrees with the closure oracle and is monotone in C") {
    for (std::int64_t m : {7, 20, 63}) {
      I64s c;
      unsigned prev = 1000;
      for (std::int64_t x = m; x >= 2; x -= 3) {
        c.insert(c.begin(), x);
        const unsigned n = additive_basis_witness(c, m, m);
        CHECK(n == oracle::basis_witness(c, m, 1000));
        CHECK(n <= prev);
        prev = n;
      }
    }
  }
}

TEST_CASE("unsupported bounds") {
  const auto huge = Window({Integer(1), ipow(2, 70)}, 0, ipow(2, 70));
  CHECK(code_of([&] { signed_sumset(huge, 1, 10); }) == ErrorCode::UnsupportedBound);
}
