#include <doctest.h>

#include <functional>

#include "oracles.hpp"
#include "sparsez/error.hpp"
#include "sparsez/geometric.hpp"

using namespace sparsez;

namespace {

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

LambdaSpec pi_powers() { return LambdaSpec::power(CertifiedReal::pi(), true); }
LambdaSpec two_powers() { return LambdaSpec::power(CertifiedReal::rational(2)); }

LambdaSpec n_plus_one(std::size_t n) {
  LambdaSpec::ExplicitRationals v;
  for (std::size_t i = 0; i < n; ++i) v.values.emplace_back(static_cast<long>(i + 1));
  return LambdaSpec{v, false};
}

}  // namespace

TEST_CASE("certified reals") {
  CHECK(CertifiedReal::parse("pi") == CertifiedReal::pi());
  CHECK(CertifiedReal::parse("sqrt2") == CertifiedReal::sqrt(2));
  CHECK(CertifiedReal::parse("sqrt:9/4") == CertifiedReal::rational(Rational(3, 2)));
  CHECK(CertifiedReal::parse("-7/3").value() == Rational(-7, 3));
  for (const auto& r : {CertifiedReal::pi(), CertifiedReal::e(), CertifiedReal::sqrt(Rational(5, 3)),
                        CertifiedReal::rational(Rational(22, 7))}) {
    CHECK(CertifiedReal::parse(r.name()) == r);
  }
  CHECK(code_of([] { CertifiedReal::parse("tau"); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { CertifiedReal::sqrt(-2); }) == ErrorCode::InvalidSpec);

  const auto pi = CertifiedReal::pi().enclose(128);
  CHECK(mpfr_cmp_d(pi.lower(), 3.14159265358) > 0);
  CHECK(mpfr_cmp_d(pi.upper(), 3.14159265360) < 0);
}

TEST_CASE("lambda evaluation") {
  CHECK(lambda_floor(pi_powers(), 3) == 31);
  CHECK(lambda_floor(two_powers(), 10) == 1024);
  CHECK(lambda_floor(pi_powers(), 0) == 1);
  CHECK(lambda_floor(pi_powers(), 1) == 3);
  CHECK(eval_lambda(two_powers(), 10, LambdaPurpose::Floor).exact == Rational(1024));

  SUBCASE("floors agree across working precisions") {
    for (unsigned p : {32u, 64u, 200u}) {
      Budgets b;
      b.working_precision = p;
      for (std::size_t n : {5u, 17u, 40u}) {
        CHECK(lambda_floor(pi_powers(), n, b) == lambda_floor(pi_powers(), n));
      }
    }
  }
  SUBCASE("precision cap") {
    Budgets b;
    b.working_precision = 16;
    b.precision_cap = 32;
    CHECK(code_of([&] { lambda_floor(pi_powers(), 60, b); }) == ErrorCode::PrecisionExhausted);
  }
  SUBCASE("recursive sequences") {
    LambdaSpec rec{LambdaSpec::Recursive{{CertifiedReal::pi()}, {{2, 0}}}, false};
    CHECK(lambda_floor(rec, 0) == 3);
    CHECK(lambda_floor(rec, 1) == 19);
    CHECK(lambda_floor(rec, 2) == 124);
  }
  SUBCASE("validation") {
    CHECK(code_of([] { validate(LambdaSpec::power(CertifiedReal::rational(1))); }) ==
          ErrorCode::InvalidSpec);
    CHECK(code_of([] { validate(LambdaSpec{LambdaSpec::ExplicitRationals{{2, 1}}, false}); }) ==
          ErrorCode::InvalidSpec);
    CHECK(code_of([] { validate(LambdaSpec{LambdaSpec::Recursive{{CertifiedReal::pi()}, {{1, 3}}}, false}); }) ==
          ErrorCode::InvalidSpec);
    CHECK(lambda_length(n_plus_one(5)) == 5);
    CHECK_FALSE(lambda_length(pi_powers()));
  }
}

TEST_CASE("integer relations") {
  CHECK_FALSE(find_integer_relation(pi_powers()));
  const auto rel = find_integer_relation(two_powers());
  REQUIRE(rel);
  CHECK(rel->q * lambda_floor(two_powers(), rel->i) == rel->p * lambda_floor(two_powers(), rel->j));
}

TEST_CASE("ratio gaps") {
  const auto two = ratio_min_gap(two_powers(), 10);
  CHECK(two.min_gap.exact == Rational(1));
  CHECK(two.inf_consecutive_ratio.exact == Rational(2));
  const auto pi = ratio_min_gap(pi_powers(), 10);
  CHECK(mpfr_cmp_d(pi.inf_consecutive_ratio.enclosure.lower(), 3.14) > 0);
  CHECK_FALSE(pi.inf_consecutive_ratio.exact);
  // Prefix N covers indices 0..N, so lambda runs up to N + 1.
  const auto lin10 = ratio_min_gap(n_plus_one(11), 10);
  REQUIRE(lin10.min_gap.exact);
  CHECK(*lin10.min_gap.exact <= Rational(1, 90));
  const auto lin20 = ratio_min_gap(n_plus_one(21), 20);
  CHECK(*lin20.min_gap.exact < *lin10.min_gap.exact);
}

TEST_CASE("epsilon oracle") {
  const auto eps = epsilon_oracle(two_powers(), 3, 30);
  REQUIRE(eps.size() == 3);
  CHECK(eps[0].value.exact == Rational(1));
  CHECK(eps[1].value.exact == Rational(1, 2));
  CHECK(eps[2].value.exact == Rational(1, 4));
  for (const auto& e : eps) CHECK(e.stabilized);
  const auto short_prefix = epsilon_oracle(two_powers(), 3, 15);
  for (std::size_t i = 0; i < 3; ++i) CHECK(short_prefix[i].value.exact == eps[i].value.exact);

  const auto pi = epsilon_oracle(pi_powers(), 2, 12);
  CHECK(mpfr_cmp(pi[1].value.enclosure.upper(), pi[0].value.enclosure.lower()) <= 0);
}

TEST_CASE("sparse decompositions") {
  const auto same = perturbed_decomposition(pi_powers(), PerturbSpec{}, 40);
  CHECK(same.k_spread == 0);
  CHECK(same.size() == 40);
  CHECK(same.a_at(3) == 31);

  const auto inter = interleaved_decomposition(pi_powers(), ints({0, 1}), 20);
  CHECK(inter.k_spread == 1);
  CHECK(inter.size() == 40);
  CHECK(inter.a_at(1) == inter.a_at(0) + 1);
  CHECK(inter.f[5] == 2);

  const auto b = same.b;
  CHECK(code_of([&] {
          build_sparse_decomposition(b, pi_powers(), ints({0, 1}), {{1, 0}, {0, 0}});
        }) == ErrorCode::NotWeaklyIncreasing);
  CHECK(code_of([&] { build_sparse_decomposition(b, pi_powers(), ints({0}), {{0, 1}}); }) ==
        ErrorCode::InconsistentDecomposition);
  CHECK(build_sparse_decomposition(b, pi_powers(), ints({0, 1}), {{0, 0}, {0, 1}, {2, 1}}).k_spread == 1);

  const auto perturbed = perturbed_decomposition(pi_powers(), PerturbSpec{ints({0, 1})}, 10);
  CHECK(perturbed.a.elements()[5] == 311);
  CHECK(mpfr_cmp_d(relative_deviation(same, 0.5).enclosure.upper(), 1e-6) < 0);
}

TEST_CASE("solution sets") {
  const auto same = perturbed_decomposition(pi_powers(), PerturbSpec{}, 20);
  const auto diag = solutions_a(same, SignVector({1, -1}), 0, 20);
  REQUIRE(diag.size() == 20);
  for (const auto& t : diag) CHECK(t[0] == t[1]);
  CHECK(solutions_a0(same, SignVector({1, -1}), 0, 20).empty());

  const auto inter = interleaved_decomposition(pi_powers(), ints({0, 1}), 20);
  // b_0 = 1 and b_1 = 3 give a_2 - a_1 = 3 - 2 = 1 across two levels; every
  // other solution pairs b_n + 1 with b_n.
  const auto ones = solutions_a(inter, SignVector({1, -1}), 1, 40);
  REQUIRE(ones.size() == 21);
  for (const auto& t : ones) {
    if (t == IndexTuple{2, 1}) continue;
    CHECK(t[0] == t[1] + 1);
    CHECK(t[1] % 2 == 0);
  }
  CHECK(solutions_a0(inter, SignVector({1, -1}), 1, 40) == std::vector<IndexTuple>{{2, 1}});

  SUBCASE("A_0 is inside A and both match brute force") {
    const auto pert = perturbed_decomposition(pi_powers(), PerturbSpec{ints({0, 1})}, 30);
    for (const auto& dec : {pert, inter}) {
      for (std::size_t k = 1; k <= 3; ++k) {
        for (const auto& signs : SignVector::all(k)) {
          for (long r : {-9, 0, 1, 5, 14}) {
            const auto a = solutions_a(dec, signs, r, 30);
            const auto a0 = solutions_a0(dec, signs, r, 30);
            CHECK(a == oracle::solutions_a(dec, signs.signs(), r, 30));
            CHECK(a0 == oracle::solutions_a0(dec, signs.signs(), r, 30));
            CHECK(std::includes(a.begin(), a.end(), a0.begin(), a0.end()));
          }
        }
      }
    }
  }
}

TEST_CASE("finiteness probes") {
  const auto dec = perturbed_decomposition(pi_powers(), PerturbSpec{ints({0, 1})}, 60);
  CHECK(finiteness_probe(dec, SignVector({1, -1}), 7, 40, 60).stabilized);
  const auto single = finiteness_probe(dec, SignVector({1}), dec.a_at(5), 6, 12);
  CHECK(single.count1 == 1);
  CHECK(single.stabilized);
  const auto pair = finiteness_probe(dec, SignVector({1, 1}), dec.a_at(3) + dec.a_at(7), 40, 60);
  CHECK(pair.count2 == 2);
  CHECK(pair.stabilized);
}

TEST_CASE("set partitions") {
  const std::vector<std::size_t> bell{1, 1, 2, 5, 15, 52};
  for (std::size_t k = 0; k < bell.size(); ++k) CHECK(set_partitions(k).size() == bell[k]);
  const auto three = set_partitions(3);
  for (const auto& p : three) {
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i - 1].front() < p[i].front());
  }
}

TEST_CASE("union checks") {
  const auto inter = interleaved_decomposition(pi_powers(), ints({0, 1}), 20);
  const auto ones = lemma_union_check(inter, SignVector({1, -1}), 1, 40);
  CHECK(ones.passed);
  CHECK(ones.direct_count == 21);
  REQUIRE_FALSE(ones.covering_cells.empty());
  CHECK(ones.covering_cells.front().partition ==
        std::vector<std::vector<std::size_t>>{{0, 1}});

  const auto same = perturbed_decomposition(pi_powers(), PerturbSpec{}, 40);
  CHECK(lemma_union_check(same, SignVector({1, -1}), 0, 40).passed);
  const auto pert = perturbed_decomposition(pi_powers(), PerturbSpec{ints({0, 1})}, 40);
  CHECK(lemma_union_check(pert, SignVector({1, 1, -1}), 0, 40).passed);
  for (long r : {-3, 0, 2}) {
    CHECK(lemma_union_check(inter, SignVector({1, 1, -1}), r, 20).passed);
  }
}
