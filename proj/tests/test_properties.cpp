#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "sparsez/core.hpp"
#include "sparsez/multiplicative.hpp"

using namespace sparsez;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr int kInstances = 200;

std::vector<std::int64_t> random_set(std::mt19937_64& rng, std::size_t max_size, std::int64_t lo,
                                     std::int64_t hi) {
  std::uniform_int_distribution<std::size_t> size(1, max_size);
  std::uniform_int_distribution<std::int64_t> value(lo, hi);
  std::set<std::int64_t> s;
  const auto n = size(rng);
  while (s.size() < n) s.insert(value(rng));
  return {s.begin(), s.end()};
}

Window window_of(const std::vector<std::int64_t>& xs, std::int64_t lo, std::int64_t bound) {
  return Window(std::vector<Integer>(xs.begin(), xs.end()), lo, bound);
}

std::vector<int> random_signs(std::mt19937_64& rng, std::size_t k) {
  std::vector<int> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(rng() & 1 ? 1 : -1);
  return out;
}

}  // namespace

TEST_CASE("dotted solutions match brute force") {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t k = 1 + rng() % 4;
    const auto dom = random_set(rng, k == 4 ? 12 : 50, 1, 80);
    const auto signs = random_signs(rng, k);
    const std::int64_t target = static_cast<std::int64_t>(rng() % 81) - 40;
    const auto w = window_of(dom, 0, 80);
    const auto got = dotted_solutions({SignVector(signs), target, w}).solutions;
    CHECK(got == oracle::dotted(w.elements(), signs, target));
  }
}

TEST_CASE("signed sumsets match brute force") {
  std::mt19937_64 rng(kSeed + 1);
  for (int i = 0; i < kInstances; ++i) {
    const auto a = random_set(rng, 20, 1, 60);
    const unsigned n = 1 + rng() % 4;
    const std::int64_t range = 1 + rng() % 150;
    const auto got = signed_sumset(window_of(a, 0, 60), n, range).values;
    CHECK(got == oracle::signed_sumset(a, n, range));
  }
}

TEST_CASE("longest progressions match brute force") {
  std::mt19937_64 rng(kSeed + 2);
  for (int i = 0; i < kInstances; ++i) {
    const auto s = random_set(rng, 200, -300, 300);
    const std::int64_t min_diff = 1 + rng() % 5;
    CHECK(longest_ap(s, min_diff) == oracle::longest_ap(s, min_diff));
  }
}

TEST_CASE("decomposition solution sets match brute force") {
  std::mt19937_64 rng(kSeed + 3);
  const auto lambda = LambdaSpec::power(CertifiedReal::e(), true);
  const auto dec = perturbed_decomposition(lambda, PerturbSpec{{Integer(0), Integer(1)}}, 16);
  const auto inter = interleaved_decomposition(LambdaSpec::power(CertifiedReal::pi(), true),
                                               {Integer(0), Integer(1)}, 8);
  for (int i = 0; i < 60; ++i) {
    const std::size_t k = 1 + rng() % 3;
    const auto signs = random_signs(rng, k);
    const auto& d = rng() & 1 ? dec : inter;
    const Integer r = d.a_at(rng() % d.size()) - d.a_at(rng() % d.size()) + (rng() % 5);
    CHECK(solutions_a(d, SignVector(signs), r, 16) == oracle::solutions_a(d, signs, r, 16));
    CHECK(solutions_a0(d, SignVector(signs), r, 16) == oracle::solutions_a0(d, signs, r, 16));
  }
}

TEST_CASE("monoid windows are monotone and decode") {
  std::mt19937_64 rng(kSeed + 4);
  const std::vector<std::vector<std::int64_t>> gens{{2, 3}, {2, 5, 7}, {3, 10}, {6, 35}};
  for (int i = 0; i < 40; ++i) {
    const auto& q = gens[rng() % gens.size()];
    const std::int64_t b1 = 1 + rng() % 5000;
    const std::int64_t b2 = b1 + rng() % 5000;
    const auto small = enumerate_monoid(q, b1);
    CHECK(enumerate_monoid(q, b2).restrict(1, b1).elements() == small.elements());
    CHECK(small.elements() == oracle::monoid(q, b1));
    for (const auto& x : small.elements()) {
      CHECK(exponent_encode(q, exponent_decode(q, x)) == x);
    }
  }
}

TEST_CASE("basis witnesses shrink as C grows") {
  std::mt19937_64 rng(kSeed + 5);
  for (int i = 0; i < 40; ++i) {
    const std::int64_t m = 10 + rng() % 60;
    auto c = random_set(rng, 6, 2, m);
    const unsigned before = additive_basis_witness(c, m, m, 200);
    CHECK(before == oracle::basis_witness(c, m, 200));
    auto more = random_set(rng, 6, 2, m);
    std::set<std::int64_t> merged(c.begin(), c.end());
    merged.insert(more.begin(), more.end());
    const std::vector<std::int64_t> bigger(merged.begin(), merged.end());
    CHECK(additive_basis_witness(bigger, m, m, 200) <= before);
  }
}

TEST_CASE("residue classes partition windows") {
  std::mt19937_64 rng(kSeed + 6);
  for (int i = 0; i < 40; ++i) {
    const auto xs = random_set(rng, 40, -100, 100);
    const auto w = window_of(xs, -100, 100);
    const std::int64_t n = 1 + rng() % 9;
    std::size_t total = 0;
    for (std::int64_t r = 0; r < n; ++r) {
      const auto part = residue_filter(w, ResidueClass(n, r));
      for (const auto& x : part.elements()) CHECK(floor_mod(x, n) == r);
      total += part.size();
    }
    CHECK(total == w.size());
  }
}
