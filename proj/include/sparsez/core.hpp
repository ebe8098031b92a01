#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sparsez/budgets.hpp"
#include "sparsez/integer.hpp"
#include "sparsez/lambda.hpp"

namespace sparsez {

struct SetSpec;

namespace family {

// Gamma(Q): the multiplicative monoid generated by Q, including 1.
struct Monoid {
  std::vector<std::int64_t> generators;
};
// q^N = {1, q, q^2, ...}.
struct PowerSet {
  std::int64_t base;
};
// A_q = {q^n + n : n in N}.
struct Aq {
  std::int64_t q;
};
// {floor(lambda_n) + g(n)}.
struct PerturbedGeometric {
  LambdaSpec lambda;
  PerturbSpec perturbation;
};
struct Explicit {
  std::vector<Integer> elements;
};
// base + F.
struct Shifted {
  std::shared_ptr<const SetSpec> base;
  std::vector<Integer> shifts;
};
struct Union {
  std::vector<SetSpec> parts;
};

}  // namespace family

struct SetSpec {
  using Kind = std::variant<family::Monoid, family::PowerSet, family::Aq,
                            family::PerturbedGeometric, family::Explicit,
                            family::Shifted, family::Union>;
  Kind kind;

  static SetSpec monoid(std::vector<std::int64_t> generators);
  static SetSpec power_set(std::int64_t base);
  static SetSpec aq(std::int64_t q);
  static SetSpec perturbed(LambdaSpec lambda, PerturbSpec perturbation = {});
  static SetSpec explicit_set(std::vector<Integer> elements);
  static SetSpec shifted(SetSpec base, std::vector<Integer> shifts);
  static SetSpec union_of(std::vector<SetSpec> parts);

  // True when every member is provably >= 0 from the parameters alone.
  bool natural_valued() const;
};

/// Throws Error(InvalidSpec) on malformed parameters.
void validate(const SetSpec& spec);

/// Exact slice spec ∩ [lo, bound]; both ends inclusive.
class Window {
 public:
  // Throws Error(InvalidSpec) unless elements are strictly increasing and
  // inside [lo, bound].
  Window(std::vector<Integer> elements, Integer lo, Integer bound,
         std::optional<SetSpec> source = std::nullopt);

  const std::vector<Integer>& elements() const { return elements_; }
  const Integer& lo() const { return lo_; }
  const Integer& bound() const { return bound_; }
  const std::optional<SetSpec>& source() const { return source_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }

  // Throws Error(BoundExceeded) for x outside [lo, bound].
  bool contains(const Integer& x) const;

  // Sub-window over [lo, bound]; the new range must lie inside this one.
  Window restrict(const Integer& lo, const Integer& bound) const;

  friend bool operator==(const Window& a, const Window& b);

 private:
  std::vector<Integer> elements_;
  Integer lo_;
  Integer bound_;
  std::optional<SetSpec> source_;
};

struct ResidueClass {
  Integer modulus;
  Integer residue;

  // Throws Error(InvalidSpec) unless 0 <= residue < modulus.
  ResidueClass(Integer modulus, Integer residue);
};

/// lo defaults to 0 for natural-valued families and -bound otherwise.
Window materialize(const SetSpec& spec, const Integer& bound,
                   std::optional<Integer> lo = std::nullopt,
                   const Budgets& budgets = {});

Window residue_filter(const Window& window, const ResidueClass& rc);

// Canonical JSON. Integers are decimal strings and object keys are sorted,
// so dump() is a stable byte representation.
nlohmann::json to_json(const SetSpec& spec);
nlohmann::json to_json(const LambdaSpec& spec);
nlohmann::json to_json(const PerturbSpec& spec);
SetSpec setspec_from_json(const nlohmann::json& json);
LambdaSpec lambda_from_json(const nlohmann::json& json);
PerturbSpec perturb_from_json(const nlohmann::json& json);
std::string canonical_json(const SetSpec& spec);

/// Window file: one JSON header line {spec, lo, bound, count, checksum}
/// followed by one decimal element per line. The checksum is the SHA-256
/// of the body.
std::string serialize_window(const Window& window);
// Throws Error(CorruptCache) on any inconsistency.
Window parse_window(const std::string& text);

void cache_store(const Window& window, const std::filesystem::path& dir);
// Throws Error(CacheMiss) when nothing stored covers [lo, bound] and
// Error(CorruptCache) when the stored file fails validation.
Window cache_load(const SetSpec& spec, const Integer& bound,
                  const std::filesystem::path& dir,
                  std::optional<Integer> lo = std::nullopt);
std::filesystem::path cache_path(const SetSpec& spec,
                                 const std::filesystem::path& dir);

}  // namespace sparsez
