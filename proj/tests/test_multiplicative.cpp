#include <doctest.h>

#include <functional>

#include "oracles.hpp"
#include "sparsez/error.hpp"
#include "sparsez/multiplicative.hpp"

using namespace sparsez;

namespace {

using Gens = std::vector<std::int64_t>;

std::vector<Integer> ints(std::initializer_list<long> xs) {
  std::vector<Integer> out;
  for (auto x : xs) out.emplace_back(x);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("monoid enumeration") {
  CHECK(enumerate_monoid(Gens{2}, 64).elements() == ints({1, 2, 4, 8, 16, 32, 64}));
  CHECK(enumerate_monoid(Gens{2, 3}, 20).elements() == ints({1, 2, 3, 4, 6, 8, 9, 12, 16, 18}));
  CHECK(enumerate_monoid(Gens{6, 10, 15}, 100).elements() ==
        ints({1, 6, 10, 15, 36, 60, 90, 100}));
  for (const auto& gens : {Gens{2, 3, 5}, Gens{4, 6}, Gens{7}, Gens{2, 4, 8}}) {
    CHECK(enumerate_monoid(gens, 5000).elements() == oracle::monoid(gens, 5000));
  }
  Budgets tight;
  tight.elements = 10;
  CHECK(code_of([&] { enumerate_monoid(Gens{2, 3}, 1000000, tight); }) ==
        ErrorCode::BudgetExceeded);
}

TEST_CASE("factorization") {
  CHECK(factorize(360) == std::vector<PrimePower>{{2, 3}, {3, 2}, {5, 1}});
  CHECK(factorize(1).empty());
  Budgets small;
  small.prime_bound = 100;
  CHECK(factorize(101, small) == std::vector<PrimePower>{{101, 1}});
  CHECK(code_of([&] { factorize(10403 * 3, small); }) == ErrorCode::FactorizationIncomplete);
  CHECK(code_of([&] { factorize(10403, small); }) == ErrorCode::FactorizationIncomplete);
  CHECK(factorize(9973, small) == std::vector<PrimePower>{{9973, 1}});
}

TEST_CASE("exponent encoding") {
  CHECK(exponent_encode(Gens{2, 3}, ExponentVector{{3, 1}}) == 24);
  CHECK(exponent_decode(Gens{2, 3}, 24) == ExponentVector{{3, 1}});
  CHECK(code_of([] { exponent_decode(Gens{2, 3}, 10); }) == ErrorCode::NotInMonoid);
  CHECK(code_of([] { exponent_decode(Gens{4, 8}, 64); }) == ErrorCode::NotIndependent);
  CHECK(exponent_decode(Gens{6, 10, 15}, 900) == ExponentVector{{1, 1, 1}});
  for (std::uint32_t a = 0; a < 6; ++a) {
    for (std::uint32_t b = 0; b < 6; ++b) {
      for (std::uint32_t c = 0; c < 4; ++c) {
        const ExponentVector n{{a, b, c}};
        CHECK(exponent_decode(Gens{6, 10, 15}, exponent_encode(Gens{6, 10, 15}, n)) == n);
      }
    }
  }
}

TEST_CASE("multiplicative independence") {
  CHECK(is_mult_independent(Gens{2, 3}).independent);
  CHECK(is_mult_independent(Gens{6, 10, 15}).independent);
  CHECK(is_mult_independent(Gens{6, 10, 15}).rank == 3);
  const auto dep = is_mult_independent(Gens{4, 8});
  CHECK_FALSE(dep.independent);
  CHECK(dep.relation == ints({3, -2}));
  for (std::int64_t q : {2, 6, 12, 30}) {
    CHECK(is_mult_independent(Gens{q}).independent);
    CHECK_FALSE(is_mult_independent(Gens{q, q * q}).independent);
  }
  const auto three = is_mult_independent(Gens{2, 3, 6});
  CHECK_FALSE(three.independent);
  CHECK(three.relation == ints({1, 1, -1}));
}

TEST_CASE("lacunarity classification") {
  const auto four_eight = classify_lacunary(Gens{4, 8});
  REQUIRE(four_eight.is_lacunary());
  const auto& lac = std::get<LacunarityVerdict::Lacunary>(four_eight.verdict);
  CHECK(lac.base == 2);
  CHECK(lac.exponents == std::vector<std::pair<std::int64_t, unsigned>>{{4, 2}, {8, 3}});

  const auto two_three = classify_lacunary(Gens{2, 3});
  REQUIRE_FALSE(two_three.is_lacunary());
  const auto& non = std::get<LacunarityVerdict::NonLacunary>(two_three.verdict);
  CHECK(non.a == 2);
  CHECK(non.b == 3);

  const auto nine = classify_lacunary(Gens{9, 27});
  REQUIRE(nine.is_lacunary());
  CHECK(std::get<LacunarityVerdict::Lacunary>(nine.verdict).base == 3);

  SUBCASE("a lacunary set's subsets stay lacunary with the same base") {
    for (const auto& gens : {Gens{4}, Gens{8}, Gens{4, 8, 16}}) {
      const auto v = classify_lacunary(gens);
      REQUIRE(v.is_lacunary());
      CHECK(std::get<LacunarityVerdict::Lacunary>(v.verdict).base % 2 == 0);
    }
  }
}

TEST_CASE("tail ratio statistics") {
  const auto powers = enumerate_monoid(Gens{2}, ipow(2, 20));
  const auto p = ratio_statistics(powers, 0.5);
  CHECK(p.max_tail_ratio == 2);
  CHECK(p.min_tail_ratio == 2);

  std::vector<Integer> a2;
  for (int n = 0; n <= 20; ++n) a2.push_back(ipow(2, n) + n);
  const auto aq = ratio_statistics(Window(a2, 0, a2.back()), 0.5);
  CHECK(aq.min_tail_ratio > Rational(19, 10));

  const auto gamma = enumerate_monoid(Gens{2, 3}, 1000000);
  CHECK(ratio_statistics(gamma, 0.1).max_tail_ratio <= Rational(11, 10));

  CHECK(code_of([] { ratio_statistics(Window(ints({1, 2}), 0, 2), 0.5); }) ==
        ErrorCode::WindowTooSmall);
}

TEST_CASE("common base reduction") {
  const auto r48 = common_base_reduction(Gens{4, 8});
  REQUIRE(r48.classes.size() == 1);
  CHECK(r48.classes[0].base == 2);
  CHECK(r48.classes[0].lcm == 6);
  CHECK(r48.classes[0].combined == 64);
  REQUIRE(r48.placements.size() == 2);
  CHECK(r48.placements[0].generator == 4);
  CHECK(r48.placements[0].v == 2);
  CHECK(r48.placements[0].k == 3);

  const auto r23 = common_base_reduction(Gens{2, 3});
  REQUIRE(r23.classes.size() == 2);
  CHECK(r23.classes[0].combined == 2);
  CHECK(r23.classes[0].lcm == 1);
  CHECK(r23.classes[1].combined == 3);

  const auto r243 = common_base_reduction(Gens{2, 4, 3});
  REQUIRE(r243.classes.size() == 2);
  CHECK(r243.classes[0].members == Gens{2, 4});
  CHECK(r243.classes[0].base == 2);
  CHECK(r243.classes[0].lcm == 2);
  CHECK(r243.classes[0].combined == 4);
  CHECK(r243.classes[1].combined == 3);

  SUBCASE("mixed bases within one class") {
    const auto r = common_base_reduction(Gens{8, 32});
    REQUIRE(r.classes.size() == 1);
    CHECK(r.classes[0].base == 2);
    CHECK(r.classes[0].lcm == 15);
  }
  SUBCASE("class members are pairwise parallel") {
    const auto r = common_base_reduction(Gens{2, 6, 36, 9, 27, 4});
    for (const auto& cls : r.classes) {
      for (auto m : cls.members) {
        Integer x = m;
        while (x % cls.base == 0) x /= cls.base;
        CHECK(x == 1);
      }
    }
  }
}

TEST_CASE("reduction claims verify") {
  const auto r48 = verify_reduction_claims(common_base_reduction(Gens{4, 8}), 1000000);
  CHECK(r48.passed);
  CHECK(r48.checks > 0);
  CHECK(verify_reduction_claims(common_base_reduction(Gens{2, 3}), 10000).passed);
  CHECK(verify_reduction_claims(common_base_reduction(Gens{2, 4, 3}), 10000).passed);
  CHECK(verify_reduction_claims(common_base_reduction(Gens{9, 27, 5}), 10000).passed);

  const auto union_spec = reduction_union_spec(common_base_reduction(Gens{2, 4, 3}));
  CHECK(materialize(union_spec, 30).elements() == ints({1, 3, 4, 9, 16, 27}));
}
