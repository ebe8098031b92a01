#include "sparsez/core.hpp"

#include <algorithm>

#include "sparsez/aq.hpp"
#include "sparsez/error.hpp"
#include "sparsez/geometric.hpp"
#include "sparsez/multiplicative.hpp"

namespace sparsez {

Integer PerturbSpec::at(std::size_t n) const {
  Integer out = 0;
  Integer power = 1;
  for (const auto& c : coefficients) {
    out += c * power;
    power *= static_cast<unsigned long>(n);
  }
  return out;
}

bool PerturbSpec::is_zero() const {
  return std::all_of(coefficients.begin(), coefficients.end(),
                     [](const Integer& c) { return c == 0; });
}

SetSpec SetSpec::monoid(std::vector<std::int64_t> generators) {
  return SetSpec{family::Monoid{std::move(generators)}};
}
SetSpec SetSpec::power_set(std::int64_t base) { return SetSpec{family::PowerSet{base}}; }
SetSpec SetSpec::aq(std::int64_t q) { return SetSpec{family::Aq{q}}; }
SetSpec SetSpec::perturbed(LambdaSpec lambda, PerturbSpec perturbation) {
  return SetSpec{family::PerturbedGeometric{std::move(lambda), std::move(perturbation)}};
}
SetSpec SetSpec::explicit_set(std::vector<Integer> elements) {
  return SetSpec{family::Explicit{std::move(elements)}};
}
SetSpec SetSpec::shifted(SetSpec base, std::vector<Integer> shifts) {
  return SetSpec{family::Shifted{std::make_shared<const SetSpec>(std::move(base)),
                                 std::move(shifts)}};
}
SetSpec SetSpec::union_of(std::vector<SetSpec> parts) {
  return SetSpec{family::Union{std::move(parts)}};
}

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

bool strictly_increasing(const std::vector<Integer>& xs) {
  return std::adjacent_find(xs.begin(), xs.end(),
                            [](const Integer& a, const Integer& b) { return a >= b; }) ==
         xs.end();
}

}  // namespace

bool SetSpec::natural_valued() const {
  return std::visit(
      overloaded{
          [](const family::Monoid&) { return true; },
          [](const family::PowerSet&) { return true; },
          [](const family::Aq&) { return true; },
          [](const family::PerturbedGeometric& p) {
            return std::all_of(p.perturbation.coefficients.begin(),
                               p.perturbation.coefficients.end(),
                               [](const Integer& c) { return c >= 0; });
          },
          [](const family::Explicit& e) {
            return e.elements.empty() || e.elements.front() >= 0;
          },
          [](const family::Shifted& s) {
            return s.base->natural_valued() &&
                   std::all_of(s.shifts.begin(), s.shifts.end(),
                               [](const Integer& f) { return f >= 0; });
          },
          [](const family::Union& u) {
            return std::all_of(u.parts.begin(), u.parts.end(),
                               [](const SetSpec& p) { return p.natural_valued(); });
          },
      },
      kind);
}

void validate(const SetSpec& spec) {
  std::visit(
      overloaded{
          [](const family::Monoid& m) {
            if (m.generators.empty()) invalid("monoid needs at least one generator");
            for (std::size_t i = 0; i < m.generators.size(); ++i) {
              if (m.generators[i] < 2) invalid("monoid generators must be >= 2");
              if (i > 0 && m.generators[i] <= m.generators[i - 1]) {
                invalid("monoid generators must be strictly increasing");
              }
            }
          },
          [](const family::PowerSet& p) {
            if (p.base < 2) invalid("power set base must be >= 2");
          },
          [](const family::Aq& a) {
            if (a.q < 2) invalid("A_q needs q >= 2");
          },
          [](const family::PerturbedGeometric& p) { validate(p.lambda); },
          [](const family::Explicit& e) {
            if (!strictly_increasing(e.elements)) {
              invalid("explicit elements must be strictly increasing");
            }
          },
          [](const family::Shifted& s) {
            if (!s.base) invalid("shifted set without a base");
            if (s.shifts.empty()) invalid("shift set F must be nonempty");
            validate(*s.base);
          },
          [](const family::Union& u) {
            if (u.parts.empty()) invalid("union needs at least one part");
            for (const auto& p : u.parts) validate(p);
          },
      },
      spec.kind);
}

Window::Window(std::vector<Integer> elements, Integer lo, Integer bound,
               std::optional<SetSpec> source)
    : elements_(std::move(elements)),
      lo_(std::move(lo)),
      bound_(std::move(bound)),
      source_(std::move(source)) {
  if (lo_ > bound_) invalid("window lo exceeds bound");
  if (!strictly_increasing(elements_)) invalid("window elements must be strictly increasing");
  if (!elements_.empty() && (elements_.front() < lo_ || elements_.back() > bound_)) {
    invalid("window element outside [lo, bound]");
  }
}

bool Window::contains(const Integer& x) const {
  if (x < lo_ || x > bound_) {
    throw Error(ErrorCode::BoundExceeded, "membership query " + to_decimal(x) +
                                              " outside window [" + to_decimal(lo_) +
                                              ", " + to_decimal(bound_) + "]");
  }
  return std::binary_search(elements_.begin(), elements_.end(), x);
}

Window Window::restrict(const Integer& lo, const Integer& bound) const {
  if (lo < lo_ || bound > bound_) {
    throw Error(ErrorCode::BoundExceeded, "restriction leaves the window range");
  }
  auto first = std::lower_bound(elements_.begin(), elements_.end(), lo);
  auto last = std::upper_bound(elements_.begin(), elements_.end(), bound);
  return Window(std::vector<Integer>(first, last), lo, bound, source_);
}

bool operator==(const Window& a, const Window& b) {
  if (a.elements_ != b.elements_ || a.lo_ != b.lo_ || a.bound_ != b.bound_) return false;
  if (a.source_.has_value() != b.source_.has_value()) return false;
  return !a.source_ || canonical_json(*a.source_) == canonical_json(*b.source_);
}

ResidueClass::ResidueClass(Integer m, Integer r) : modulus(std::move(m)), residue(std::move(r)) {
  if (modulus < 1) invalid("residue modulus must be >= 1");
  if (residue < 0 || residue >= modulus) invalid("residue must satisfy 0 <= r < n");
}

namespace {

std::vector<Integer> slice(std::vector<Integer> xs, const Integer& lo, const Integer& bound) {
  std::erase_if(xs, [&](const Integer& x) { return x < lo || x > bound; });
  return xs;
}

std::vector<Integer> generate(const SetSpec& spec, const Integer& lo, const Integer& bound,
                              const Budgets& budgets);

std::vector<Integer> generate_perturbed(const family::PerturbedGeometric& p, const Integer& lo,
                                        const Integer& bound, const Budgets& budgets) {
  std::vector<Integer> out;
  const auto length = lambda_length(p.lambda);
  std::optional<Integer> previous;
  for (std::size_t n = 0;; ++n) {
    if (length && n >= *length) break;
    if (n >= budgets.elements) {
      throw Error(ErrorCode::BudgetExceeded, "perturbed sequence did not pass the bound");
    }
    Integer value = lambda_floor(p.lambda, n, budgets) + p.perturbation.at(n);
    if (previous && value <= *previous) {
      invalid("perturbed sequence is not strictly increasing at n = " + std::to_string(n));
    }
    if (value > bound) break;
    if (value >= lo) out.push_back(value);
    previous = value;
  }
  return out;
}

std::vector<Integer> generate(const SetSpec& spec, const Integer& lo, const Integer& bound,
                              const Budgets& budgets) {
  return std::visit(
      overloaded{
          [&](const family::Monoid& m) {
            if (bound < 1) return std::vector<Integer>{};
            return slice(enumerate_monoid(m.generators, bound, budgets).elements(), lo, bound);
          },
          [&](const family::PowerSet& p) {
            std::vector<Integer> out;
            for (Integer x = 1; x <= bound; x *= p.base) {
              if (x >= lo) out.push_back(x);
            }
            return out;
          },
          [&](const family::Aq& a) {
            std::vector<Integer> out;
            for (unsigned long n = 0;; ++n) {
              Integer x = aq::element(a.q, n);
              if (x > bound) break;
              if (x >= lo) out.push_back(x);
            }
            return out;
          },
          [&](const family::PerturbedGeometric& p) {
            return generate_perturbed(p, lo, bound, budgets);
          },
          [&](const family::Explicit& e) { return slice(e.elements, lo, bound); },
          [&](const family::Shifted& s) {
            const auto [fmin, fmax] = std::minmax_element(s.shifts.begin(), s.shifts.end());
            std::vector<Integer> base = generate(*s.base, lo - *fmax, bound - *fmin, budgets);
            std::vector<Integer> out;
            for (const auto& b : base) {
              for (const auto& f : s.shifts) {
                Integer x = b + f;
                if (x >= lo && x <= bound) out.push_back(std::move(x));
              }
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
          },
          [&](const family::Union& u) {
            std::vector<Integer> out;
            for (const auto& part : u.parts) {
              auto xs = generate(part, lo, bound, budgets);
              out.insert(out.end(), xs.begin(), xs.end());
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
          },
      },
      spec.kind);
}

}  // namespace

Window materialize(const SetSpec& spec, const Integer& bound, std::optional<Integer> lo,
                   const Budgets& budgets) {
  validate(spec);
  if (bound < 1) invalid("bound must be >= 1");
  Integer low = lo ? *lo : (spec.natural_valued() ? Integer(0) : Integer(-bound));
  if (low > bound) invalid("lo exceeds bound");
  return Window(generate(spec, low, bound, budgets), low, bound, spec);
}

Window residue_filter(const Window& window, const ResidueClass& rc) {
  std::vector<Integer> out;
  for (const auto& x : window.elements()) {
    if (floor_mod(x, rc.modulus) == rc.residue) out.push_back(x);
  }
  return Window(std::move(out), window.lo(), window.bound(), window.source());
}

}  // namespace sparsez
