#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sparsez/core.hpp"
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

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("sparsez-core-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("integers parse, print and divide with floor semantics") {
  CHECK(parse_integer("-123456789012345678901234567890") < 0);
  CHECK(to_decimal(parse_integer("+42")) == "42");
  CHECK(code_of([] { parse_integer("12a"); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { parse_integer(""); }) == ErrorCode::InvalidSpec);
  CHECK(to_decimal(parse_rational("6/-4")) == "-3/2");
  CHECK(floor_div(-7, 2) == -4);
  CHECK(floor_mod(-7, 3) == 2);
  CHECK(floor_log(1000, 10) == 3);
  CHECK(floor_log(999, 10) == 2);
  CHECK(floor_log(1, 2) == 0);
  CHECK(ipow(3, 4) == 81);
  CHECK(!to_int64(ipow(2, 64)));
  CHECK(code_of([] { checked_int64(ipow(2, 63), "x"); }) == ErrorCode::UnsupportedBound);
}

TEST_CASE("materialize gives exact windows") {
  SUBCASE("A_2 up to 40 is 2^n + n") {
    CHECK(materialize(SetSpec::aq(2), 40).elements() == ints({1, 3, 6, 11, 20, 37}));
  }
  SUBCASE("Gamma({2,3}) up to 20") {
    CHECK(materialize(SetSpec::monoid({2, 3}), 20).elements() ==
          ints({1, 2, 3, 4, 6, 8, 9, 12, 16, 18}));
  }
  SUBCASE("explicit sets pass through") {
    CHECK(materialize(SetSpec::explicit_set(ints({5, 7})), 100).elements() == ints({5, 7}));
  }
  SUBCASE("power sets") {
    CHECK(materialize(SetSpec::power_set(3), 100).elements() == ints({1, 3, 9, 27, 81}));
  }
  SUBCASE("shifted sets") {
    const auto spec = SetSpec::shifted(SetSpec::power_set(2), ints({0, 1}));
    CHECK(materialize(spec, 20).elements() == ints({1, 2, 3, 4, 5, 8, 9, 16, 17}));
  }
  SUBCASE("unions") {
    const auto spec = SetSpec::union_of({SetSpec::power_set(2), SetSpec::power_set(3)});
    CHECK(materialize(spec, 30).elements() == ints({1, 2, 3, 4, 8, 9, 16, 27}));
  }
  SUBCASE("perturbed geometric floor(pi^n) + n") {
    const auto spec = SetSpec::perturbed(LambdaSpec::power(CertifiedReal::pi()),
                                         PerturbSpec{ints({0, 1})});
    CHECK(materialize(spec, 400).elements() == ints({1, 4, 11, 34, 101, 311}));
  }
  SUBCASE("default lower ends") {
    CHECK(materialize(SetSpec::aq(2), 40).lo() == 0);
    const auto signed_set = SetSpec::explicit_set(ints({-5, 2}));
    CHECK(!signed_set.natural_valued());
    const auto w = materialize(signed_set, 10);
    CHECK(w.lo() == -10);
    CHECK(w.elements() == ints({-5, 2}));
  }
}

TEST_CASE("windows refuse questions outside their range") {
  const auto w = materialize(SetSpec::monoid({2, 3}), 20);
  CHECK(w.contains(18));
  CHECK_FALSE(w.contains(5));
  CHECK(code_of([&] { w.contains(21); }) == ErrorCode::BoundExceeded);
  CHECK(code_of([&] { w.restrict(0, 40); }) == ErrorCode::BoundExceeded);
  CHECK(code_of([] { Window(ints({3, 2}), 0, 5); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { Window(ints({1, 9}), 0, 5); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("invalid specs are rejected") {
  CHECK(code_of([] { validate(SetSpec::monoid({3, 2})); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { validate(SetSpec::monoid({1, 2})); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { validate(SetSpec::monoid({})); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { validate(SetSpec::explicit_set(ints({2, 2}))); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { validate(SetSpec::shifted(SetSpec::aq(2), {})); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { validate(SetSpec::aq(1)); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { materialize(SetSpec::aq(2), 0); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("residue filters") {
  const auto small = materialize(SetSpec::explicit_set(ints({1, 2, 3, 4, 6, 8})), 8);
  CHECK(residue_filter(small, ResidueClass(2, 0)).elements() == ints({2, 4, 6, 8}));
  const auto aq = materialize(SetSpec::explicit_set(ints({2, 3, 6, 11, 20, 37})), 40);
  CHECK(residue_filter(aq, ResidueClass(3, 2)).elements() == ints({2, 11, 20}));
  CHECK(residue_filter(aq, ResidueClass(1, 0)) == aq);
  CHECK(code_of([] { ResidueClass(3, 3); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { ResidueClass(0, 0); }) == ErrorCode::InvalidSpec);

  SUBCASE("classes partition the window") {
    const auto w = materialize(SetSpec::explicit_set(ints({-7, -2, 0, 3, 5, 11})), 20);
    for (long n = 1; n <= 6; ++n) {
      std::vector<Integer> merged;
      for (long r = 0; r < n; ++r) {
        const auto part = residue_filter(w, ResidueClass(n, r));
        merged.insert(merged.end(), part.elements().begin(), part.elements().end());
      }
      std::sort(merged.begin(), merged.end());
      CHECK(merged == w.elements());
    }
  }
}

TEST_CASE("canonical JSON is stable and round-trips") {
  CHECK(canonical_json(SetSpec::monoid({2, 3})) == R"({"generators":["2","3"],"kind":"monoid"})");
  const std::vector<SetSpec> specs{
      SetSpec::monoid({6, 10, 15}),
      SetSpec::power_set(5),
      SetSpec::aq(3),
      SetSpec::perturbed(LambdaSpec::power(CertifiedReal::sqrt(2), true), PerturbSpec{ints({1, 0, 2})}),
      SetSpec::explicit_set(ints({-4, 9})),
      SetSpec::shifted(SetSpec::aq(2), ints({0, 1})),
      SetSpec::union_of({SetSpec::power_set(2), SetSpec::monoid({3, 5})}),
  };
  for (const auto& s : specs) {
    CHECK(canonical_json(setspec_from_json(to_json(s))) == canonical_json(s));
  }
  LambdaSpec recursive{LambdaSpec::Recursive{{CertifiedReal::pi(), CertifiedReal::e()},
                                             {{2, 0}, {1, 1}}},
                       false};
  CHECK(to_json(lambda_from_json(to_json(recursive))) == to_json(recursive));
  CHECK(code_of([] { setspec_from_json(nlohmann::json{{"kind", "nope"}}); }) ==
        ErrorCode::InvalidSpec);
  CHECK(code_of([] { setspec_from_json(nlohmann::json{{"kind", "monoid"}}); }) ==
        ErrorCode::InvalidSpec);
}

TEST_CASE("lambda JSON resolves named constants") {
  const auto j = nlohmann::json::parse(
      R"({"kind": "recursive", "constants": {"tau": "3/2", "r": "sqrt:5"},
          "taus": ["tau", "r", "pi"], "steps": [{"multiplier": "1", "tau": "1"}]})");
  const auto spec = lambda_from_json(j);
  const auto& r = std::get<LambdaSpec::Recursive>(spec.kind);
  CHECK(r.taus[0] == CertifiedReal::rational(Rational(3, 2)));
  CHECK(r.taus[1] == CertifiedReal::sqrt(5));
  CHECK(r.taus[2] == CertifiedReal::pi());
}

TEST_CASE("window files round-trip and detect damage") {
  const auto w = materialize(SetSpec::monoid({2, 3}), 20);
  CHECK(parse_window(serialize_window(w)) == w);
  std::string text = serialize_window(w);
  text.back() == '\n' ? text.insert(text.size() - 1, "0") : text.append("0");
  CHECK(code_of([&] { parse_window(text); }) == ErrorCode::CorruptCache);
  CHECK(code_of([] { parse_window("not a header\n1\n"); }) == ErrorCode::CorruptCache);
}

TEST_CASE("cache store and load") {
  TempDir dir;
  const auto spec = SetSpec::monoid({2, 3});
  const auto w = materialize(spec, 20);
  CHECK(code_of([&] { cache_load(spec, 20, dir.path); }) == ErrorCode::CacheMiss);
  cache_store(w, dir.path);
  CHECK(cache_load(spec, 20, dir.path) == w);
  CHECK(cache_load(spec, 10, dir.path) == materialize(spec, 10));
  CHECK(code_of([&] { cache_load(spec, 21, dir.path); }) == ErrorCode::CacheMiss);
  CHECK(code_of([&] { cache_load(SetSpec::aq(2), 20, dir.path); }) == ErrorCode::CacheMiss);

  SUBCASE("truncated files are corrupt") {
    const auto path = cache_path(spec, dir.path);
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 3);
    CHECK(code_of([&] { cache_load(spec, 20, dir.path); }) == ErrorCode::CorruptCache);
  }
  SUBCASE("a file stored under another spec's name is corrupt") {
    const auto other = materialize(SetSpec::aq(2), 20);
    std::ofstream(cache_path(spec, dir.path), std::ios::trunc) << serialize_window(other);
    CHECK(code_of([&] { cache_load(spec, 20, dir.path); }) == ErrorCode::CorruptCache);
  }
}

TEST_CASE("monotone exactness") {
  const std::vector<SetSpec> specs{
      SetSpec::monoid({2, 3, 7}),
      SetSpec::power_set(3),
      SetSpec::aq(2),
      SetSpec::perturbed(LambdaSpec::power(CertifiedReal::pi()), PerturbSpec{ints({0, 1})}),
      SetSpec::shifted(SetSpec::monoid({2, 5}), ints({-3, 0, 4})),
      SetSpec::union_of({SetSpec::aq(3), SetSpec::power_set(5)}),
      SetSpec::explicit_set(ints({-9, -1, 4, 50, 51})),
  };
  for (const auto& s : specs) {
    for (long b1 : {1L, 7L, 60L, 999L}) {
      for (long b2 : {b1, 2 * b1 + 3, 5000L}) {
        const auto big = materialize(s, b2);
        const auto small = materialize(s, b1);
        CHECK(big.restrict(small.lo(), b1).elements() == small.elements());
      }
    }
  }
}
