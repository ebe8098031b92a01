#include "sparsez/cli.hpp"

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sparsez/aq.hpp"
#include "sparsez/core.hpp"
#include "sparsez/equations.hpp"
#include "sparsez/error.hpp"
#include "sparsez/geometric.hpp"
#include "sparsez/multiplicative.hpp"
#include "sparsez/sumsets.hpp"

namespace sparsez::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidSpec, message);
}

std::string str(const Integer& x) { return to_decimal(x); }
std::string str(const Rational& x) { return to_decimal(x); }
template <std::integral T>
std::string str(T x) {
  return std::to_string(x);
}

template <class T>
json strings(const std::vector<T>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(str(x));
  return out;
}

template <class T>
json nested(const std::vector<std::vector<T>>& rows) {
  json out = json::array();
  for (const auto& row : rows) out.push_back(strings(row));
  return out;
}

std::string approx(double x, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

json rational(const Rational& x) { return {{"exact", str(x)}, {"decimal", approx(x.get_d())}}; }

json certified(const CertifiedValue& v) {
  json out{{"lower", v.enclosure.lower_string()}, {"upper", v.enclosure.upper_string()}};
  out["exact"] = v.exact ? json(str(*v.exact)) : json(nullptr);
  return out;
}

// Integers on the command line, with "1e6" accepted as shorthand.
Integer integer_arg(const std::string& text) {
  const auto e = text.find_first_of("eE");
  if (e == std::string::npos) return parse_integer(text);
  const Integer mantissa = parse_integer(text.substr(0, e));
  const Integer exponent = parse_integer(text.substr(e + 1));
  if (exponent < 0 || exponent > 10000) invalid("bad exponent in '" + text + "'");
  return mantissa * ipow(10, exponent.get_ui());
}

std::int64_t int64_arg(const std::string& text, std::string_view what) {
  return checked_int64(integer_arg(text), what);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

std::vector<Integer> integer_list(const std::string& text) {
  std::vector<Integer> out;
  for (const auto& item : split(text, ',')) out.push_back(integer_arg(item));
  return out;
}

std::vector<std::int64_t> int64_list(const std::string& text, std::string_view what) {
  std::vector<std::int64_t> out;
  for (const auto& x : integer_list(text)) out.push_back(checked_int64(x, what));
  return out;
}

std::vector<std::int64_t> to_int64s(const Window& w) {
  std::vector<std::int64_t> out;
  out.reserve(w.size());
  for (const auto& x : w.elements()) out.push_back(checked_int64(x, "window element"));
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    invalid(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Configuration

struct Globals {
  std::string format = "json";
  std::string cache_dir;
  std::uint64_t max_elements = Budgets{}.elements;
  std::uint64_t prime_bound = Budgets{}.prime_bound;
  unsigned working_precision = Budgets{}.working_precision;
  unsigned precision_cap = Budgets{}.precision_cap;

  Budgets budgets() const {
    if (max_elements == 0 || prime_bound < 2 || working_precision < 2) {
      invalid("budgets must be positive");
    }
    if (precision_cap < working_precision) invalid("precision cap is below working precision");
    return {max_elements, prime_bound, working_precision, precision_cap};
  }

  json budgets_json() const {
    return {{"elements", str(max_elements)},
            {"prime_bound", str(prime_bound)},
            {"working_precision", str(working_precision)},
            {"precision_cap", str(precision_cap)}};
  }
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  json input = json::object();
  json result = json::object();
  std::optional<Table> table;
  json timings = json::object();
  // Set by verification commands; false maps to kExitCheckFailed.
  std::optional<bool> passed;
};

using Handler = std::function<Report(const Globals&)>;

// Looks up the cache before materializing and stores fresh windows.
struct WindowSource {
  const Globals& globals;
  std::string cache_status = "off";

  Window get(const SetSpec& spec, const Integer& bound,
             std::optional<Integer> lo = std::nullopt) {
    const Budgets budgets = globals.budgets();
    if (globals.cache_dir.empty()) return materialize(spec, bound, lo, budgets);
    try {
      Window w = cache_load(spec, bound, globals.cache_dir, lo);
      cache_status = "hit";
      return w;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CacheMiss) throw;
    }
    const Integer default_lo = spec.natural_valued() ? Integer(0) : Integer(-bound);
    Window w = materialize(spec, bound, lo, budgets);
    // Only windows from the default lower end are worth keeping.
    if (w.lo() == default_lo) {
      cache_store(w, globals.cache_dir);
      cache_status = "stored";
    }
    return w;
  }
};

// ---------------------------------------------------------------------------
// Set, lambda and decomposition inputs

std::string lambda_help() {
  return "pow:<real>, values:<r1>,<r2>,..., or rec:<tau>,...;<mult>@<tau index>,... "
         "where a real is pi, e, sqrt2, sqrt:<rational> or a rational";
}

LambdaSpec parse_lambda(const std::string& text, bool independent) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) invalid("lambda must look like " + lambda_help());
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  LambdaSpec out{LambdaSpec::ExplicitRationals{}, independent};
  if (kind == "pow") {
    out.kind = LambdaSpec::PowerOfReal{CertifiedReal::parse(body)};
  } else if (kind == "values") {
    LambdaSpec::ExplicitRationals e;
    for (const auto& v : split(body, ',')) e.values.push_back(parse_rational(v));
    out.kind = std::move(e);
  } else if (kind == "rec") {
    const auto semi = body.find(';');
    if (semi == std::string::npos) invalid("recursive lambda needs '<taus>;<steps>'");
    LambdaSpec::Recursive r;
    for (const auto& t : split(body.substr(0, semi), ',')) r.taus.push_back(CertifiedReal::parse(t));
    for (const auto& s : split(body.substr(semi + 1), ',')) {
      const auto at = s.find('@');
      if (at == std::string::npos) invalid("recursive step must be <mult>@<tau index>");
      const auto index = integer_arg(s.substr(at + 1));
      if (index < 0) invalid("negative tau index");
      r.steps.push_back({integer_arg(s.substr(0, at)), index.get_ui()});
    }
    out.kind = std::move(r);
  } else {
    invalid("unknown lambda kind '" + kind + "'; expected " + lambda_help());
  }
  validate(out);
  return out;
}

struct LambdaInput {
  std::string spec_file;
  std::string lambda;
  std::string perturb;
  bool independent = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--spec", spec_file,
                    "JSON file holding a LambdaSpec or a perturbed SetSpec");
    cmd->add_option("--lambda", lambda, "Inline lambda: " + lambda_help());
    cmd->add_option("--perturb", perturb,
                    "Perturbation polynomial coefficients g_0,g_1,... (g(n) = sum g_j n^j)");
    cmd->add_flag("--independent", independent,
                  "Declare the lambda values linearly independent over Q");
  }

  std::pair<LambdaSpec, PerturbSpec> resolve() const {
    if (spec_file.empty() == lambda.empty()) invalid("give exactly one of --spec and --lambda");
    if (!spec_file.empty()) {
      const json j = read_json_file(spec_file);
      if (j.is_object() && j.value("kind", "") == "perturbed") {
        const SetSpec spec = setspec_from_json(j);
        const auto& p = std::get<family::PerturbedGeometric>(spec.kind);
        return {p.lambda, p.perturbation};
      }
      LambdaSpec l = lambda_from_json(j);
      validate(l);
      PerturbSpec g;
      if (!perturb.empty()) g.coefficients = integer_list(perturb);
      return {l, g};
    }
    PerturbSpec g;
    if (!perturb.empty()) g.coefficients = integer_list(perturb);
    return {parse_lambda(lambda, independent), g};
  }
};

struct SetInput {
  std::string spec_file;
  std::string gens;
  std::string elements;
  std::int64_t power = 0;
  std::int64_t aq = 0;
  LambdaInput lambda;

  void add(CLI::App* cmd) {
    cmd->add_option("--gens", gens, "Monoid generators, e.g. 2,3");
    cmd->add_option("--power", power, "Power set q^N");
    cmd->add_option("--aq", aq, "A_q = {q^n + n}");
    cmd->add_option("--elements", elements, "Explicit finite set");
    lambda.add(cmd);
  }

  SetSpec resolve() const {
    const int given = !gens.empty() + (power != 0) + (aq != 0) + !elements.empty() +
                      !lambda.lambda.empty() + !lambda.spec_file.empty();
    if (given != 1) {
      invalid("give exactly one of --spec, --gens, --power, --aq, --elements, --lambda");
    }
    SetSpec spec = SetSpec::explicit_set({});
    if (!lambda.spec_file.empty()) {
      const json j = read_json_file(lambda.spec_file);
      // A bare LambdaSpec (tau, taus or values) stands for the perturbed
      // family with the --perturb polynomial.
      const bool bare_lambda =
          j.is_object() && (j.contains("tau") || j.contains("taus") || j.contains("values"));
      if (bare_lambda) {
        const auto [l, g] = lambda.resolve();
        spec = SetSpec::perturbed(l, g);
      } else {
        spec = setspec_from_json(j);
      }
    } else if (!gens.empty()) {
      spec = SetSpec::monoid(int64_list(gens, "generator"));
    } else if (power != 0) {
      spec = SetSpec::power_set(power);
    } else if (aq != 0) {
      spec = SetSpec::aq(aq);
    } else if (!elements.empty()) {
      auto xs = integer_list(elements);
      std::sort(xs.begin(), xs.end());
      xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
      spec = SetSpec::explicit_set(std::move(xs));
    } else {
      const auto [l, g] = lambda.resolve();
      spec = SetSpec::perturbed(l, g);
    }
    validate(spec);
    return spec;
  }
};

struct DecInput {
  LambdaInput lambda;
  std::string shifts;
  std::size_t n = 60;

  void add(CLI::App* cmd) {
    lambda.add(cmd);
    cmd->add_option("--shifts", shifts,
                    "Interleave B with these shifts (F); without it A = B is the perturbed "
                    "sequence");
    cmd->add_option("--n", n, "Number of B terms")->capture_default_str();
  }

  SparseDecomposition resolve(const Budgets& budgets) const {
    const auto [l, g] = lambda.resolve();
    if (!shifts.empty()) {
      if (!g.is_zero()) invalid("--perturb and --shifts cannot be combined");
      return interleaved_decomposition(l, integer_list(shifts), n, budgets);
    }
    return perturbed_decomposition(l, g, n, budgets);
  }

  json to_json() const {
    const auto [l, g] = lambda.resolve();
    json out{{"lambda", sparsez::to_json(l)}, {"perturbation", sparsez::to_json(g)}, {"n", str(n)}};
    out["shifts"] = shifts.empty() ? json(nullptr) : strings(integer_list(shifts));
    return out;
  }
};

std::optional<Integer> optional_integer(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return integer_arg(text);
}

json window_json(const Window& w) {
  return {{"lo", str(w.lo())},
          {"bound", str(w.bound())},
          {"count", str(w.size())},
          {"elements", strings(w.elements())}};
}

Table value_table(const Window& w) {
  Table t{{"value"}, {}};
  for (const auto& x : w.elements()) t.rows.push_back({str(x)});
  return t;
}

std::vector<Integer> default_checkpoints(const Integer& bound) {
  std::vector<Integer> out;
  for (Integer m = 10; m <= bound; m *= 10) out.push_back(m);
  if (out.empty() || out.back() != bound) out.push_back(bound);
  return out;
}

Table density_table(const DensityReport& report) {
  Table t{{"m", "count", "ratio", "ratio_decimal"}, {}};
  for (const auto& row : report.rows) {
    t.rows.push_back({str(row.m), str(row.count), str(row.ratio), approx(row.ratio.get_d())});
  }
  return t;
}

json density_json(const DensityReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"m", str(row.m)}, {"count", str(row.count)}, {"ratio", rational(row.ratio)}});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Result builders shared by commands and dossiers

json lacunarity_json(const LacunarityVerdict& v) {
  if (const auto* l = std::get_if<LacunarityVerdict::Lacunary>(&v.verdict)) {
    json exps = json::array();
    for (const auto& [g, e] : l->exponents) exps.push_back({{"generator", str(g)}, {"e", str(e)}});
    return {{"lacunary", true}, {"base", str(l->base)}, {"exponents", exps}};
  }
  const auto& n = std::get<LacunarityVerdict::NonLacunary>(v.verdict);
  return {{"lacunary", false}, {"witness", {str(n.a), str(n.b)}}};
}

json independence_json(const IndependenceCertificate& c) {
  return {{"independent", c.independent},
          {"primes", strings(c.primes)},
          {"exponent_matrix", nested(c.exponent_matrix)},
          {"rank", str(c.rank)},
          {"relation", strings(c.relation)}};
}

json reduction_json(const CommonBaseReduction& r) {
  json classes = json::array();
  for (const auto& c : r.classes) {
    classes.push_back({{"members", strings(c.members)},
                       {"base", str(c.base)},
                       {"lcm", str(c.lcm)},
                       {"combined", str(c.combined)}});
  }
  json placements = json::array();
  for (const auto& p : r.placements) {
    placements.push_back({{"generator", str(p.generator)},
                          {"class", str(p.class_index)},
                          {"v", str(p.v)},
                          {"k", str(p.k)}});
  }
  return {{"classes", classes},
          {"placements", placements},
          {"union_spec", to_json(reduction_union_spec(r))}};
}

json reduction_report_json(const ReductionReport& r) {
  json out{{"passed", r.passed}, {"bound", str(r.bound)}, {"checks", str(r.checks)}};
  out["failed_claim"] = r.failed_claim ? json(*r.failed_claim) : json(nullptr);
  out["counterexample"] = r.counterexample ? json(str(*r.counterexample)) : json(nullptr);
  return out;
}

json sumset_json(const SumsetProbe& p, std::optional<std::int64_t> d) {
  return {{"n", str(p.at_bound.n)},
          {"range", str(p.at_bound.range)},
          {"source_bound", str(p.at_bound.source_bound)},
          {"count", str(p.at_bound.values.size())},
          {"count_at_double", str(p.at_double.values.size())},
          {"stabilized", p.stabilized},
          {"full_residue_class", d ? json(str(*d)) : json(nullptr)},
          {"values", strings(p.at_bound.values)}};
}

json ap_json(const ArithmeticProgression& ap) {
  return {{"length", str(ap.length)}, {"start", str(ap.start)}, {"diff", str(ap.diff)}};
}

json profile_json(const WeightedSumProfile& p) {
  json per_sign = json::object();
  const auto signs = SignVector::all(p.k);
  for (std::size_t s = 0; s < signs.size(); ++s) per_sign[signs[s].to_string()] = strings(p.per_sign[s]);
  return {{"k", str(p.k)},
          {"max_target", str(p.max_target)},
          {"totals", strings(p.totals)},
          {"per_sign", per_sign},
          {"max", str(p.max)},
          {"argmax", str(p.argmax)}};
}

Table profile_table(const WeightedSumProfile& p) {
  Table t{{"r", "total"}, {}};
  const auto signs = SignVector::all(p.k);
  for (const auto& s : signs) t.header.push_back("c=" + s.to_string());
  for (std::size_t r = 0; r < p.totals.size(); ++r) {
    std::vector<std::string> row{str(r + 1), str(p.totals[r])};
    for (std::size_t s = 0; s < signs.size(); ++s) row.push_back(str(p.per_sign[s][r]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

json orbit_json(const OrbitDecomposition& d) {
  return {{"d", str(d.d)},
          {"k", str(d.k)},
          {"box", str(d.box)},
          {"count", str(d.base_points.size())},
          {"base_points", nested(d.base_points)}};
}

json orbit_verification_json(const OrbitVerification& v) {
  json out{{"passed", v.passed},
           {"box", str(v.box)},
           {"solutions", str(v.solutions)},
           {"orbit_points", str(v.orbit_points)}};
  out["discrepancy_kind"] = v.discrepancy_kind ? json(*v.discrepancy_kind) : json(nullptr);
  out["discrepancy"] = v.discrepancy ? strings(*v.discrepancy) : json(nullptr);
  return out;
}

json ratio_gap_json(const RatioGapReport& r) {
  return {{"prefix", str(r.prefix)},
          {"distinct_ratios", str(r.distinct_ratios)},
          {"min_gap", certified(r.min_gap)},
          {"min_distance_above_one", certified(r.min_distance_above_one)},
          {"inf_consecutive_ratio", certified(r.inf_consecutive_ratio)}};
}

json epsilon_json(const std::vector<EpsilonEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    out.push_back({{"k", str(e.k)},
                   {"value", certified(e.value)},
                   {"signs", strings(e.signs)},
                   {"indices", strings(e.indices)},
                   {"stabilized", e.stabilized}});
  }
  return out;
}

json decomposition_json(const SparseDecomposition& d) {
  return {{"a", strings(d.a.elements())},
          {"b", strings(d.b.elements())},
          {"shifts", strings(d.shifts)},
          {"f", strings(d.f)},
          {"r", strings(d.r)},
          {"k_spread", str(d.k_spread)},
          {"lambda", to_json(d.lambda)}};
}

json finiteness_json(const FinitenessProbe& p) {
  return {{"window1", str(p.window1)},
          {"window2", str(p.window2)},
          {"count1", str(p.count1)},
          {"count2", str(p.count2)},
          {"stabilized", p.stabilized}};
}

json union_json(const UnionCheckReport& r) {
  json cells = json::array();
  for (const auto& c : r.covering_cells) {
    cells.push_back({{"partition", nested(c.partition)},
                     {"cell_sums", strings(c.cell_sums)},
                     {"zero_cells", strings(c.zero_cells)},
                     {"covered", strings(c.covered)},
                     {"sigma", strings(c.sigma)},
                     {"zero_cell_shift_sums", strings(c.zero_cell_shift_sums)},
                     {"reduced_target", str(c.reduced_target)}});
  }
  json out{{"passed", r.passed},
           {"cells", str(r.cells)},
           {"direct_count", str(r.direct_count)},
           {"assembled_count", str(r.assembled_count)},
           {"covering_cells", cells}};
  out["discrepancy_kind"] = r.discrepancy_kind ? json(*r.discrepancy_kind) : json(nullptr);
  out["discrepancy"] = r.discrepancy ? strings(*r.discrepancy) : json(nullptr);
  return out;
}

json identity_json(const aq::IdentityReport& r) {
  json out{{"passed", r.passed}, {"checked", str(r.checked)}};
  out["first_failure"] = r.first_failure ? json(str(*r.first_failure)) : json(nullptr);
  return out;
}

json coverage_json(const aq::CoverageReport& r) {
  json out{{"passed", r.passed},
           {"certified", str(r.certified)},
           {"max_summands", str(r.max_summands)}};
  out["first_failure"] = r.first_failure ? json(str(*r.first_failure)) : json(nullptr);
  return out;
}

json context_json(const aq::Context& c, bool with_c) {
  json out{{"q", str(c.q)},
           {"range", str(c.range)},
           {"source_bound", str(c.window.bound())},
           {"v", strings(c.v)},
           {"x", strings(c.x)},
           {"b_count", str(c.b.size())},
           {"c_count", str(c.c.size())},
           {"stabilized", c.stabilized},
           {"cross_check", c.cross_check}};
  if (with_c) out["c"] = strings(c.c);
  return out;
}

json g_json(const aq::GCount& g) {
  return {{"n", str(g.n)}, {"g", str(g.g)}, {"bound", approx(g.bound)}, {"holds", g.holds}};
}

json witnesses_json(const aq::WitnessReport& w) {
  json out{{"passed", w.passed()},
           {"successor_identity", w.successor_identity},
           {"exponent_graph", w.exponent_graph},
           {"pairs_checked", str(w.pairs_checked)}};
  out["failure"] = w.failure ? json(*w.failure) : json(nullptr);
  return out;
}

// ---------------------------------------------------------------------------
// Dossiers

struct StepOutcome {
  json output;
  // Null for steps without a probe.
  std::optional<bool> stabilized;
  bool passed = true;
};

struct Dossier {
  json steps = json::array();
  json timings = json::object();
  bool passed = true;

  void step(const std::string& name, json input, const std::function<StepOutcome()>& body) {
    const auto start = Clock::now();
    StepOutcome outcome = body();
    timings[name] = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    json entry{{"step", name},
               {"input", std::move(input)},
               {"output", std::move(outcome.output)},
               {"passed", outcome.passed}};
    entry["stabilized"] = outcome.stabilized ? json(*outcome.stabilized) : json(nullptr);
    passed = passed && outcome.passed && outcome.stabilized.value_or(true);
    steps.push_back(std::move(entry));
  }

  Report report() const {
    Report r;
    r.result = {{"steps", steps}, {"passed", passed}};
    r.timings = {{"steps_ms", timings}};
    r.passed = passed;
    return r;
  }
};

struct DossierParams {
  SetInput set;
  std::string profile;
  std::string bound;
  std::int64_t range = 0;
  unsigned n = 2;
  std::int64_t max_target = 1000;
  unsigned box = 8;
  unsigned verify_box = 12;
  std::size_t terms = 60;
  unsigned k_max = 3;
};

Report sparsity_dossier(const SetSpec& spec, const DossierParams& p, const Globals& g) {
  const Budgets budgets = g.budgets();
  const Integer bound = p.bound.empty() ? Integer(1'000'000) : integer_arg(p.bound);
  const std::int64_t range = p.range > 0 ? p.range : 100;
  WindowSource source{g};
  const Window w = source.get(spec, bound);
  const Window w2 = source.get(spec, 2 * bound);
  Dossier d;
  d.step("sumset", {{"n", str(p.n)}, {"range", str(range)}, {"source_bound", str(bound)}}, [&] {
    SumsetProbe probe{signed_sumset(w, p.n, range, budgets),
                      signed_sumset(w2, p.n, range, budgets), false};
    probe.stabilized = probe.at_bound.values == probe.at_double.values;
    const auto full = full_residue_class(probe.at_bound, range);
    return StepOutcome{sumset_json(probe, full), probe.stabilized};
  });
  const auto positive = [](const Window& x) {
    return to_int64s(x.restrict(std::max(x.lo(), Integer(1)), x.bound()));
  };
  d.step("ap", {{"min_diff", "1"}, {"source_bound", str(bound)}}, [&] {
    const auto a = longest_ap(positive(w), 1);
    const auto b = longest_ap(positive(w2), 1);
    json out = ap_json(a);
    out["at_double"] = ap_json(b);
    return StepOutcome{out, a == b};
  });
  d.step("density", {{"checkpoints", strings(default_checkpoints(bound))}}, [&] {
    return StepOutcome{density_json(density_report(w, default_checkpoints(bound))), {}};
  });
  d.step("profile",
         {{"k", "2"}, {"max_target", str(p.max_target)}, {"source_bound", str(bound)}}, [&] {
           const auto a = weighted_sum_profile(w, 2, p.max_target, budgets);
           const auto b = weighted_sum_profile(w2, 2, p.max_target, budgets);
           json out{{"max", str(a.max)},
                    {"argmax", str(a.argmax)},
                    {"max_at_double", str(b.max)},
                    {"argmax_at_double", str(b.argmax)}};
           return StepOutcome{out, a.max == b.max};
         });
  Report r = d.report();
  r.timings["cache"] = source.cache_status;
  return r;
}

Report interdef_dossier(const SetSpec& spec, const DossierParams& p, const Globals& g) {
  const auto* monoid = std::get_if<family::Monoid>(&spec.kind);
  if (!monoid) invalid("the interdef dossier needs a monoid spec");
  const Budgets budgets = g.budgets();
  const auto& gens = monoid->generators;
  const Integer bound = p.bound.empty() ? Integer(100'000) : integer_arg(p.bound);
  Dossier d;
  bool independent = false;
  d.step("independence", json::object(), [&] {
    const auto c = is_mult_independent(gens, budgets);
    independent = c.independent;
    return StepOutcome{independence_json(c), {}};
  });
  d.step("lacunarity", {{"source_bound", str(bound)}, {"tail_fraction", "0.5"}}, [&] {
    json out = lacunarity_json(classify_lacunary(gens, budgets));
    const auto w = enumerate_monoid(gens, bound, budgets);
    if (w.size() >= 3) {
      const auto s = ratio_statistics(w, 0.5);
      out["tail"] = {{"max_ratio", rational(s.max_tail_ratio)},
                     {"min_ratio", rational(s.min_tail_ratio)},
                     {"ratios_considered", str(s.ratios_considered)}};
    }
    return StepOutcome{out, {}};
  });
  std::optional<CommonBaseReduction> reduction;
  d.step("reduction", json::object(), [&] {
    reduction = common_base_reduction(gens, budgets);
    return StepOutcome{reduction_json(*reduction), {}};
  });
  d.step("verify_reduction", {{"bound", str(bound)}}, [&] {
    const auto check = verify_reduction_claims(*reduction, bound);
    return StepOutcome{reduction_report_json(check), {}, check.passed};
  });
  if (independent) {
    const SignVector signs({1, 1, -1});
    std::optional<OrbitDecomposition> dec;
    d.step("orbits", {{"signs", signs.to_string()}, {"box", str(p.box)}, {"margin", "2"}}, [&] {
      dec = orbit_decompose(gens, signs, p.box, 2, budgets);
      return StepOutcome{orbit_json(*dec), {}};
    });
    d.step("verify_orbits", {{"box", str(p.verify_box)}}, [&] {
      const auto v = orbit_verify(*dec, gens, signs, p.verify_box, budgets);
      const auto again = orbit_decompose(gens, signs, p.verify_box, 2, budgets);
      json out = orbit_verification_json(v);
      out["base_count_at_box"] = str(again.base_points.size());
      return StepOutcome{out, again.base_points == dec->base_points, v.passed};
    });
  }
  return d.report();
}

Report aq_dossier(const SetSpec& spec, const DossierParams& p, const Globals& g) {
  const auto* a = std::get_if<family::Aq>(&spec.kind);
  if (!a) invalid("the aq dossier needs an A_q spec");
  const std::int64_t q = a->q;
  const std::int64_t range = p.range > 0 ? p.range : 100'000;
  const Budgets budgets = g.budgets();
  Dossier d;
  d.step("identity", {{"n", "2000"}}, [&] {
    const auto identity = aq::verify_linear_identity(q, 2000);
    return StepOutcome{identity_json(identity), {}, identity.passed};
  });
  d.step("coverage", {{"range", "100"}}, [&] {
    const auto coverage = aq::certify_sumset_coverage(q, 100);
    return StepOutcome{coverage_json(coverage), {}, coverage.passed};
  });
  std::optional<aq::Context> ctx;
  d.step("context", {{"range", str(range)}}, [&] {
    ctx = aq::build_context(q, range, budgets);
    return StepOutcome{context_json(*ctx, false), ctx->stabilized, ctx->cross_check};
  });
  std::vector<Integer> ns = default_checkpoints(Integer(1'000'000));
  ns.erase(ns.begin());
  d.step("g_bound", {{"n", strings(ns)}}, [&] {
    json rows = json::array();
    bool holds = true;
    for (const auto& n : ns) {
      const auto gc = aq::count_g(q, n);
      holds = holds && gc.holds;
      rows.push_back(g_json(gc));
    }
    return StepOutcome{rows, {}, holds};
  });
  const std::int64_t basis_range = std::min<std::int64_t>(1000, range);
  d.step("density", {{"basis_range", str(basis_range)}}, [&] {
    const auto db = aq::density_and_basis(*ctx, basis_range, 64);
    return StepOutcome{json{{"density", rational(db.density)}, {"basis_n", str(db.basis_n)}}, {}};
  });
  d.step("witnesses", {{"n", "10"}}, [&] {
    const auto w = aq::definability_witnesses(q, 10);
    return StepOutcome{witnesses_json(w), {}, w.passed()};
  });
  return d.report();
}

Report independent_dossier(const SetSpec& spec, const DossierParams& p, const Globals& g) {
  const auto* pg = std::get_if<family::PerturbedGeometric>(&spec.kind);
  if (!pg) invalid("the independent dossier needs a perturbed geometric spec");
  const Budgets budgets = g.budgets();
  const std::int64_t range = p.range > 0 ? p.range : 20;
  Dossier d;
  d.step("ratio_gap", {{"n", "30"}}, [&] {
    return StepOutcome{ratio_gap_json(ratio_min_gap(pg->lambda, 30, budgets)), {}};
  });
  d.step("epsilon", {{"k_max", str(p.k_max)}, {"n", "30"}}, [&] {
    const auto entries = epsilon_oracle(pg->lambda, p.k_max, 30, budgets);
    const bool stable = std::all_of(entries.begin(), entries.end(),
                                    [](const EpsilonEntry& e) { return e.stabilized; });
    return StepOutcome{epsilon_json(entries), stable};
  });
  const auto dec = perturbed_decomposition(pg->lambda, pg->perturbation, p.terms, budgets);
  const std::size_t w1 = p.terms * 2 / 3;
  d.step("finiteness",
         {{"k_max", str(p.k_max)}, {"target_range", str(range)}, {"window1", str(w1)},
          {"window2", str(p.terms)}},
         [&] {
           std::size_t probes = 0;
           json unstable = json::array();
           for (unsigned k = 1; k <= p.k_max; ++k) {
             for (const auto& s : SignVector::all(k)) {
               for (std::int64_t r = -range; r <= range; ++r) {
                 if (r == 0) continue;
                 const auto f = finiteness_probe(dec, s, r, w1, p.terms, budgets);
                 ++probes;
                 if (!f.stabilized) unstable.push_back({{"signs", s.to_string()}, {"r", str(r)}});
               }
             }
           }
           const bool stable = unstable.empty();
           return StepOutcome{json{{"probes", str(probes)}, {"unstabilized", unstable}}, stable};
         });
  const std::size_t union_window = std::min<std::size_t>(p.terms, 40);
  d.step("union_check",
         {{"k", "2,3"}, {"target_range", str(range)}, {"window", str(union_window)}}, [&] {
           std::size_t checks = 0;
           json failures = json::array();
           for (unsigned k = 2; k <= std::min(3u, p.k_max); ++k) {
             for (const auto& s : SignVector::all(k)) {
               for (std::int64_t r = -range; r <= range; ++r) {
                 const auto u = lemma_union_check(dec, s, r, union_window, budgets);
                 ++checks;
                 if (!u.passed) {
                   failures.push_back(
                       {{"signs", s.to_string()}, {"r", str(r)}, {"report", union_json(u)}});
                 }
               }
             }
           }
           const bool ok = failures.empty();
           return StepOutcome{json{{"checks", str(checks)}, {"failures", failures}}, {}, ok};
         });
  return d.report();
}

// ---------------------------------------------------------------------------
// Command registration

struct Registry {
  std::map<const CLI::App*, Handler> handlers;

  template <class Params>
  std::shared_ptr<Params> add(CLI::App* cmd,
                              std::function<Report(const Params&, const Globals&)> body) {
    auto params = std::make_shared<Params>();
    handlers[cmd] = [params, body](const Globals& g) { return body(*params, g); };
    return params;
  }
};

void multiplicative_commands(CLI::App& app, Registry& reg) {
  {
    struct P {
      std::string gens, bound, decode;
    };
    auto* cmd = app.add_subcommand("monoid", "Enumerate Gamma(Q) up to a bound");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto gens = int64_list(p.gens, "generator");
      WindowSource source{g};
      const auto spec = SetSpec::monoid(gens);
      validate(spec);
      const Window w = source.get(spec, integer_arg(p.bound), Integer(1));
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(integer_arg(p.bound))}};
      r.result = {{"count", str(w.size())}, {"elements", strings(w.elements())}};
      if (!p.decode.empty()) {
        const auto x = integer_arg(p.decode);
        r.input["decode"] = str(x);
        r.result["decode"] = strings(exponent_decode(gens, x, g.budgets()).coords);
      }
      r.table = value_table(w);
      r.timings["cache"] = source.cache_status;
      return r;
    });
    cmd->add_option("--gens", p->gens, "Generators, e.g. 2,3")->required();
    cmd->add_option("--bound", p->bound, "Inclusive upper bound")->required();
    cmd->add_option("--decode", p->decode, "Also give the exponent vector of this element");
  }
  {
    struct P {
      std::string gens;
    };
    auto* cmd = app.add_subcommand("independent", "Multiplicative independence certificate");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto gens = int64_list(p.gens, "generator");
      Report r;
      r.input = {{"generators", strings(gens)}};
      r.result = independence_json(is_mult_independent(gens, g.budgets()));
      return r;
    });
    cmd->add_option("--gens", p->gens, "Generators")->required();
  }
  {
    struct P {
      std::string gens, bound;
      double tail = 0.5;
    };
    auto* cmd = app.add_subcommand("lacunary", "Lacunarity verdict and tail ratios");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto gens = int64_list(p.gens, "generator");
      Report r;
      r.input = {{"generators", strings(gens)}};
      r.result = lacunarity_json(classify_lacunary(gens, g.budgets()));
      if (!p.bound.empty()) {
        if (!(p.tail > 0 && p.tail <= 1)) invalid("--tail must lie in (0, 1]");
        const auto s = ratio_statistics(enumerate_monoid(gens, integer_arg(p.bound), g.budgets()), p.tail);
        r.input["bound"] = str(integer_arg(p.bound));
        r.input["tail_fraction"] = approx(p.tail, 3);
        r.result["tail"] = {{"max_ratio", rational(s.max_tail_ratio)},
                            {"min_ratio", rational(s.min_tail_ratio)},
                            {"ratios_considered", str(s.ratios_considered)}};
      }
      return r;
    });
    cmd->add_option("--gens", p->gens, "Generators")->required();
    cmd->add_option("--bound", p->bound, "Also report tail ratios of Gamma(Q) up to this bound");
    cmd->add_option("--tail", p->tail, "Tail fraction of the gaps")->capture_default_str();
  }
  {
    struct P {
      std::string gens;
    };
    auto* cmd = app.add_subcommand("reduce", "Common-base reduction of the generators");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto gens = int64_list(p.gens, "generator");
      Report r;
      r.input = {{"generators", strings(gens)}};
      r.result = reduction_json(common_base_reduction(gens, g.budgets()));
      return r;
    });
    cmd->add_option("--gens", p->gens, "Generators")->required();
  }
  {
    struct P {
      std::string gens, bound;
    };
    auto* cmd = app.add_subcommand("verify-reduction",
                                   "Exhaustively check the reduction equivalences on [1, bound]");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto gens = int64_list(p.gens, "generator");
      const auto reduction = common_base_reduction(gens, g.budgets());
      const auto report = verify_reduction_claims(reduction, integer_arg(p.bound));
      Report r;
      r.input = {{"generators", strings(gens)}, {"bound", str(integer_arg(p.bound))}};
      r.result = reduction_report_json(report);
      r.result["reduction"] = reduction_json(reduction);
      r.passed = report.passed;
      return r;
    });
    cmd->add_option("--gens", p->gens, "Generators")->required();
    cmd->add_option("--bound", p->bound, "Inclusive bound")->required();
  }
}

void set_commands(CLI::App& app, Registry& reg) {
  {
    struct P {
      SetInput set;
      std::string bound, lo, write;
    };
    auto* cmd = app.add_subcommand("materialize", "Exact window of a set family");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      WindowSource source{g};
      const Window w = source.get(spec, integer_arg(p.bound), optional_integer(p.lo));
      if (!p.write.empty()) {
        std::ofstream out(p.write, std::ios::binary);
        out << serialize_window(w);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.write);
      }
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(integer_arg(p.bound))}};
      if (!p.lo.empty()) r.input["lo"] = str(integer_arg(p.lo));
      r.result = window_json(w);
      r.table = value_table(w);
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--bound", p->bound, "Inclusive upper bound")->required();
    cmd->add_option("--lo", p->lo, "Inclusive lower bound");
    cmd->add_option("--write", p->write, "Also write the window file here");
  }
  {
    struct P {
      SetInput set;
      std::string bound, lo, modulus, residue;
    };
    auto* cmd = app.add_subcommand("residue", "Window elements in a residue class");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      WindowSource source{g};
      const Window w = source.get(spec, integer_arg(p.bound), optional_integer(p.lo));
      const Window f = residue_filter(w, ResidueClass(integer_arg(p.modulus), integer_arg(p.residue)));
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(integer_arg(p.bound))}, {"modulus", str(integer_arg(p.modulus))},
                 {"residue", str(integer_arg(p.residue))}};
      r.result = window_json(f);
      r.table = value_table(f);
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--bound", p->bound, "Inclusive upper bound")->required();
    cmd->add_option("--lo", p->lo, "Inclusive lower bound");
    cmd->add_option("--modulus", p->modulus, "Modulus")->required();
    cmd->add_option("--residue", p->residue, "Residue in [0, modulus)")->required();
  }
}

void sumset_commands(CLI::App& app, Registry& reg) {
  {
    struct P {
      SetInput set;
      std::string source_bound;
      unsigned n = 2;
      std::int64_t range = 100;
      std::int64_t d_max = 0;
    };
    auto* cmd = app.add_subcommand("sumset", "Signed sumset window with a doubling probe");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      const Budgets budgets = g.budgets();
      WindowSource source{g};
      const Integer b = integer_arg(p.source_bound);
      SumsetProbe probe{signed_sumset(source.get(spec, b), p.n, p.range, budgets),
                        signed_sumset(source.get(spec, 2 * b), p.n, p.range, budgets), false};
      probe.stabilized = probe.at_bound.values == probe.at_double.values;
      const auto d = full_residue_class(probe.at_bound, p.d_max > 0 ? p.d_max : p.range);
      Report r;
      r.input = {{"spec", to_json(spec)}, {"source_bound", str(b)}, {"n", str(p.n)},
                 {"range", str(p.range)}};
      r.result = sumset_json(probe, d);
      r.table = Table{{"value"}, {}};
      for (auto v : probe.at_bound.values) r.table->rows.push_back({str(v)});
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--source-bound", p->source_bound, "Bound B of the summand window")->required();
    cmd->add_option("--n", p->n, "Number of summands")->capture_default_str();
    cmd->add_option("--range", p->range, "Report values in [-range, range]")->capture_default_str();
    cmd->add_option("--d-max", p->d_max, "Largest modulus tried for a full residue class "
                                         "(default: range)");
  }
  {
    struct P {
      SetInput set;
      std::string bound, lo;
      std::int64_t min_diff = 1;
    };
    auto* cmd = app.add_subcommand("ap", "Longest arithmetic progression in a window");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      WindowSource source{g};
      const Window w = source.get(spec, integer_arg(p.bound), optional_integer(p.lo));
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(integer_arg(p.bound))}, {"min_diff", str(p.min_diff)}};
      r.result = ap_json(longest_ap(to_int64s(w), p.min_diff));
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--bound", p->bound, "Inclusive upper bound")->required();
    cmd->add_option("--lo", p->lo, "Inclusive lower bound");
    cmd->add_option("--min-diff", p->min_diff, "Smallest allowed difference")->capture_default_str();
  }
  {
    struct P {
      SetInput set;
      std::string bound, checkpoints;
    };
    auto* cmd = app.add_subcommand("density", "Counting-function table |S ∩ [1, m]| / m");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      WindowSource source{g};
      const Integer bound = integer_arg(p.bound);
      const auto checkpoints =
          p.checkpoints.empty() ? default_checkpoints(bound) : integer_list(p.checkpoints);
      const auto report = density_report(source.get(spec, bound), checkpoints);
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(bound)}, {"checkpoints", strings(checkpoints)}};
      r.result = {{"rows", density_json(report)}};
      r.table = density_table(report);
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--bound", p->bound, "Exactness bound of the window")->required();
    cmd->add_option("--checkpoints", p->checkpoints, "Checkpoints m (default: powers of ten)");
  }
  {
    struct P {
      SetInput set;
      std::string bound, m;
      unsigned n_cap = 64;
    };
    auto* cmd = app.add_subcommand("basis-witness",
                                   "Least n with n-fold sums of C ∪ {0, 1} covering [0, m]");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      WindowSource source{g};
      const std::int64_t m = int64_arg(p.m, "m");
      const Integer bound = p.bound.empty() ? Integer(m) : integer_arg(p.bound);
      const unsigned n = additive_basis_witness(source.get(spec, bound), m, p.n_cap);
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(bound)}, {"m", str(m)}, {"n_cap", str(p.n_cap)}};
      r.result = {{"n", str(n)}};
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--m", p->m, "Cover [0, m]")->required();
    cmd->add_option("--bound", p->bound, "Exactness bound of C (default: m)");
    cmd->add_option("--n-cap", p->n_cap, "Give up past this n")->capture_default_str();
  }
}

void equation_commands(CLI::App& app, Registry& reg) {
  {
    struct P {
      SetInput set;
      std::string bound, signs, target;
    };
    auto* cmd = app.add_subcommand("solve", "Non-degenerate solutions of c·x = r in a window");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      WindowSource source{g};
      const SignVector signs = SignVector::parse(p.signs);
      const Integer target = integer_arg(p.target);
      const auto result = dotted_solutions({signs, target, source.get(spec, integer_arg(p.bound))},
                                           g.budgets());
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(integer_arg(p.bound))}, {"signs", signs.to_string()},
                 {"target", str(target)}};
      r.result = {{"count", str(result.solutions.size())}, {"solutions", nested(result.solutions)}};
      r.table = Table{{}, {}};
      for (std::size_t i = 0; i < signs.size(); ++i) r.table->header.push_back("x" + str(i + 1));
      for (const auto& s : result.solutions) {
        std::vector<std::string> row;
        for (const auto& x : s) row.push_back(str(x));
        r.table->rows.push_back(std::move(row));
      }
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--bound", p->bound, "Domain window bound")->required();
    cmd->add_option("--signs", p->signs, "Coefficients, e.g. +- or 1,-1")->required();
    cmd->add_option("--target", p->target, "Target r")->required();
  }
  {
    struct P {
      SetInput set;
      std::string bound, probe_bound;
      unsigned k = 2;
      std::int64_t max_target = 1000;
    };
    auto* cmd = app.add_subcommand("profile", "Solution counts over all sign vectors and r <= R");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const SetSpec spec = p.set.resolve();
      WindowSource source{g};
      const auto budgets = g.budgets();
      const auto profile =
          weighted_sum_profile(source.get(spec, integer_arg(p.bound)), p.k, p.max_target, budgets);
      Report r;
      r.input = {{"spec", to_json(spec)}, {"bound", str(integer_arg(p.bound))}, {"k", str(p.k)},
                 {"max_target", str(p.max_target)}};
      r.result = profile_json(profile);
      if (!p.probe_bound.empty()) {
        const auto other = weighted_sum_profile(source.get(spec, integer_arg(p.probe_bound)), p.k,
                                                p.max_target, budgets);
        r.input["probe_bound"] = str(integer_arg(p.probe_bound));
        r.result["max_at_probe"] = str(other.max);
        r.result["stabilized"] = other.max == profile.max;
      }
      r.table = profile_table(profile);
      r.timings["cache"] = source.cache_status;
      return r;
    });
    p->set.add(cmd);
    cmd->add_option("--bound", p->bound, "Domain window bound")->required();
    cmd->add_option("--k", p->k, "Number of variables")->capture_default_str();
    cmd->add_option("--max-target", p->max_target, "Largest r")->capture_default_str();
    cmd->add_option("--probe-bound", p->probe_bound,
                    "Second domain bound; stabilized when both maxima agree");
  }
  struct OrbitP {
    std::string gens, signs;
    unsigned box = 8;
    unsigned margin = 2;
    unsigned verify_box = 12;
  };
  const auto orbit_options = [](CLI::App* cmd, OrbitP& p) {
    cmd->add_option("--gens", p.gens, "Multiplicatively independent generators")->required();
    cmd->add_option("--signs", p.signs, "Coefficients, e.g. ++- or 1,1,-1")->required();
    cmd->add_option("--box", p.box, "Exponent box")->capture_default_str();
    cmd->add_option("--margin", p.margin, "Keep base points at most box - margin")
        ->capture_default_str();
  };
  {
    auto* cmd = app.add_subcommand("orbits", "Orbit decomposition of c·x = 0 over Gamma(Q)");
    auto p = reg.add<OrbitP>(cmd, [](const OrbitP& p, const Globals& g) {
      const auto gens = int64_list(p.gens, "generator");
      const SignVector signs = SignVector::parse(p.signs);
      Report r;
      r.input = {{"generators", strings(gens)}, {"signs", signs.to_string()}, {"box", str(p.box)},
                 {"margin", str(p.margin)}};
      r.result = orbit_json(orbit_decompose(gens, signs, p.box, p.margin, g.budgets()));
      return r;
    });
    orbit_options(cmd, *p);
  }
  {
    auto* cmd = app.add_subcommand("verify-orbits", "Check an orbit decomposition in a larger box");
    auto p = reg.add<OrbitP>(cmd, [](const OrbitP& p, const Globals& g) {
      const auto gens = int64_list(p.gens, "generator");
      const SignVector signs = SignVector::parse(p.signs);
      const auto budgets = g.budgets();
      const auto dec = orbit_decompose(gens, signs, p.box, p.margin, budgets);
      const auto v = orbit_verify(dec, gens, signs, p.verify_box, budgets);
      const auto again = orbit_decompose(gens, signs, p.verify_box, p.margin, budgets);
      Report r;
      r.input = {{"generators", strings(gens)}, {"signs", signs.to_string()}, {"box", str(p.box)},
                 {"margin", str(p.margin)}, {"verify_box", str(p.verify_box)}};
      r.result = orbit_verification_json(v);
      r.result["base_points"] = orbit_json(dec);
      r.result["base_count_at_verify_box"] = str(again.base_points.size());
      r.result["base_count_unchanged"] = again.base_points.size() == dec.base_points.size();
      r.passed = v.passed;
      return r;
    });
    orbit_options(cmd, *p);
    cmd->add_option("--verify-box", p->verify_box, "Verification box")->capture_default_str();
  }
}

void geometric_commands(CLI::App& app, Registry& reg) {
  {
    struct P {
      LambdaInput lambda;
      std::size_t n = 0;
      std::size_t count = 1;
      std::string purpose = "floor";
    };
    auto* cmd = app.add_subcommand("lambda-eval", "Certified values of lambda_n");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto [l, perturbation] = p.lambda.resolve();
      const auto purpose = p.purpose == "ratio" ? LambdaPurpose::Ratio : LambdaPurpose::Floor;
      json terms = json::array();
      for (std::size_t i = p.n; i < p.n + p.count; ++i) {
        const auto v = eval_lambda(l, i, purpose, g.budgets());
        json t{{"n", str(i)}, {"lower", v.enclosure.lower_string()},
               {"upper", v.enclosure.upper_string()}};
        t["floor"] = v.floor ? json(str(*v.floor)) : json(nullptr);
        t["exact"] = v.exact ? json(str(*v.exact)) : json(nullptr);
        terms.push_back(std::move(t));
      }
      Report r;
      r.input = {{"lambda", to_json(l)}, {"n", str(p.n)}, {"count", str(p.count)},
                 {"purpose", p.purpose}};
      r.result = {{"terms", terms}};
      return r;
    });
    p->lambda.add(cmd);
    cmd->add_option("--n", p->n, "First index")->capture_default_str();
    cmd->add_option("--count", p->count, "Number of indices")->capture_default_str();
    cmd->add_option("--purpose", p->purpose, "floor or ratio")
        ->check(CLI::IsMember({"floor", "ratio"}))
        ->capture_default_str();
  }
  {
    struct P {
      LambdaInput lambda;
      std::size_t n = 30;
    };
    auto* cmd = app.add_subcommand("ratio-gap", "Separation of the ratio set over a prefix");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto [l, perturbation] = p.lambda.resolve();
      Report r;
      r.input = {{"lambda", to_json(l)}, {"n", str(p.n)}};
      r.result = ratio_gap_json(ratio_min_gap(l, p.n, g.budgets()));
      return r;
    });
    p->lambda.add(cmd);
    cmd->add_option("--n", p->n, "Prefix length")->capture_default_str();
  }
  {
    struct P {
      LambdaInput lambda;
      unsigned k = 3;
      std::size_t n = 30;
    };
    auto* cmd = app.add_subcommand("epsilon", "epsilon_k constants over a prefix");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto [l, perturbation] = p.lambda.resolve();
      Report r;
      r.input = {{"lambda", to_json(l)}, {"k", str(p.k)}, {"n", str(p.n)}};
      r.result = {{"entries", epsilon_json(epsilon_oracle(l, p.k, p.n, g.budgets()))}};
      return r;
    });
    p->lambda.add(cmd);
    cmd->add_option("--k", p->k, "Largest k")->capture_default_str();
    cmd->add_option("--n", p->n, "Prefix length")->capture_default_str();
  }
  {
    struct P {
      DecInput dec;
      double tail = 0.5;
    };
    auto* cmd = app.add_subcommand("sparse-build", "Sparse decomposition A ⊆ B + F");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto budgets = g.budgets();
      const auto dec = p.dec.resolve(budgets);
      Report r;
      r.input = p.dec.to_json();
      r.result = decomposition_json(dec);
      r.result["relative_deviation"] = certified(relative_deviation(dec, p.tail, budgets));
      return r;
    });
    p->dec.add(cmd);
    cmd->add_option("--tail", p->tail, "Tail fraction for the relative deviation")
        ->capture_default_str();
  }
  struct SolveP {
    DecInput dec;
    std::string signs, target;
    std::size_t window = 0;
    bool reduced = false;
  };
  {
    auto* cmd = app.add_subcommand("solve-a", "Index tuples of sum c_i a_(n_i) = r");
    auto p = reg.add<SolveP>(cmd, [](const SolveP& p, const Globals& g) {
      const auto budgets = g.budgets();
      const auto dec = p.dec.resolve(budgets);
      const SignVector signs = SignVector::parse(p.signs);
      const Integer target = integer_arg(p.target);
      const std::optional<std::size_t> window =
          p.window > 0 ? std::optional<std::size_t>(p.window) : std::nullopt;
      const auto tuples = p.reduced ? solutions_a0(dec, signs, target, window, budgets)
                                    : solutions_a(dec, signs, target, window, budgets);
      Report r;
      r.input = p.dec.to_json();
      r.input["signs"] = signs.to_string();
      r.input["target"] = str(target);
      r.input["window"] = str(window.value_or(dec.size()));
      r.input["reduced"] = p.reduced;
      r.result = {{"count", str(tuples.size())}, {"tuples", nested(tuples)}};
      return r;
    });
    p->dec.add(cmd);
    cmd->add_option("--signs", p->signs, "Coefficients")->required();
    cmd->add_option("--target", p->target, "Target r")->required();
    cmd->add_option("--window", p->window, "Index window (default: all of A)");
    cmd->add_flag("--reduced", p->reduced, "Drop tuples with a zero-sum level cell (A_0)");
  }
  {
    struct P {
      DecInput dec;
      std::string signs, target;
      std::size_t window1 = 40;
      std::size_t window2 = 60;
    };
    auto* cmd = app.add_subcommand("probe-finite", "Compare solution counts in two windows");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto budgets = g.budgets();
      const auto dec = p.dec.resolve(budgets);
      const SignVector signs = SignVector::parse(p.signs);
      const Integer target = integer_arg(p.target);
      Report r;
      r.input = p.dec.to_json();
      r.input["signs"] = signs.to_string();
      r.input["target"] = str(target);
      r.result = finiteness_json(finiteness_probe(dec, signs, target, p.window1, p.window2, budgets));
      return r;
    });
    p->dec.add(cmd);
    cmd->add_option("--signs", p->signs, "Coefficients")->required();
    cmd->add_option("--target", p->target, "Target r")->required();
    cmd->add_option("--window1", p->window1, "Smaller window")->capture_default_str();
    cmd->add_option("--window2", p->window2, "Larger window")->capture_default_str();
  }
  {
    auto* cmd = app.add_subcommand("check-union",
                                   "Rebuild A(c, r) from partition pieces and compare");
    auto p = reg.add<SolveP>(cmd, [](const SolveP& p, const Globals& g) {
      const auto budgets = g.budgets();
      const auto dec = p.dec.resolve(budgets);
      const SignVector signs = SignVector::parse(p.signs);
      const Integer target = integer_arg(p.target);
      const std::size_t window = p.window > 0 ? p.window : dec.size();
      const auto report = lemma_union_check(dec, signs, target, window, budgets);
      Report r;
      r.input = p.dec.to_json();
      r.input["signs"] = signs.to_string();
      r.input["target"] = str(target);
      r.input["window"] = str(window);
      r.result = union_json(report);
      r.passed = report.passed;
      return r;
    });
    p->dec.add(cmd);
    cmd->add_option("--signs", p->signs, "Coefficients")->required();
    cmd->add_option("--target", p->target, "Target r")->required();
    cmd->add_option("--window", p->window, "Index window (default: all of A)");
  }
}

void aq_commands(CLI::App& app, Registry& reg) {
  auto* aq = app.add_subcommand("aq", "Certificates for A_q = {q^n + n}");
  aq->require_subcommand(1);
  {
    struct P {
      std::int64_t q = 2;
      std::size_t n = 2000;
      std::int64_t range = 0;
    };
    auto* cmd = aq->add_subcommand("verify", "Linear identities, and sumset coverage with --range");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals&) {
      const auto identity = aq::verify_linear_identity(p.q, p.n);
      Report r;
      r.input = {{"q", str(p.q)}, {"n", str(p.n)}};
      r.result = {{"identity", identity_json(identity)}};
      bool passed = identity.passed;
      if (p.range > 0) {
        const auto coverage = aq::certify_sumset_coverage(p.q, p.range);
        r.input["range"] = str(p.range);
        r.result["coverage"] = coverage_json(coverage);
        passed = passed && coverage.passed;
      }
      r.result["passed"] = passed;
      r.passed = passed;
      return r;
    });
    cmd->add_option("--q", p->q, "q >= 2")->capture_default_str();
    cmd->add_option("--n", p->n, "Check n = 0..N")->capture_default_str();
    cmd->add_option("--range", p->range, "Also certify coverage of (q-1)Z on [-range, range]");
  }
  {
    struct P {
      std::int64_t q = 2;
      std::string range = "1000";
      bool values = false;
    };
    auto* cmd = aq->add_subcommand("context", "The sets V, X, B and C on [-M, M]");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto range = int64_arg(p.range, "range");
      const auto ctx = aq::build_context(p.q, range, g.budgets());
      Report r;
      r.input = {{"q", str(p.q)}, {"range", str(range)}};
      r.result = context_json(ctx, p.values);
      r.passed = ctx.stabilized && ctx.cross_check;
      return r;
    });
    cmd->add_option("--q", p->q, "q >= 2")->capture_default_str();
    cmd->add_option("--range", p->range, "M")->capture_default_str();
    cmd->add_flag("--values", p->values, "Include the full list C");
  }
  {
    struct P {
      std::int64_t q = 2;
      std::string n = "100,1000,10000,100000,1000000";
    };
    auto* cmd = aq->add_subcommand("g", "Exact g(n) against its logarithmic bound");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals&) {
      const auto ns = integer_list(p.n);
      json rows = json::array();
      Table t{{"n", "g", "bound", "holds"}, {}};
      bool holds = true;
      for (const auto& n : ns) {
        const auto gc = aq::count_g(p.q, n);
        holds = holds && gc.holds;
        rows.push_back(g_json(gc));
        t.rows.push_back({str(gc.n), str(gc.g), approx(gc.bound), gc.holds ? "true" : "false"});
      }
      Report r;
      r.input = {{"q", str(p.q)}, {"n", strings(ns)}};
      r.result = {{"rows", rows}, {"passed", holds}};
      r.table = std::move(t);
      r.passed = holds;
      return r;
    });
    cmd->add_option("--q", p->q, "q >= 2")->capture_default_str();
    cmd->add_option("--n", p->n, "Values of n")->capture_default_str();
  }
  {
    struct P {
      std::int64_t q = 2;
      std::string range = "1000000";
      std::int64_t basis_range = 1000;
      unsigned n_cap = 64;
      std::string checkpoints;
    };
    auto* cmd = aq->add_subcommand("density", "Density of C and an additive basis witness");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals& g) {
      const auto range = int64_arg(p.range, "range");
      const auto ctx = aq::build_context(p.q, range, g.budgets());
      const auto db = aq::density_and_basis(ctx, p.basis_range, p.n_cap);
      const auto checkpoints = p.checkpoints.empty() ? default_checkpoints(Integer(range))
                                                     : integer_list(p.checkpoints);
      const auto table = density_report(ctx.c, range, checkpoints);
      Report r;
      r.input = {{"q", str(p.q)}, {"range", str(range)}, {"basis_range", str(p.basis_range)},
                 {"n_cap", str(p.n_cap)}, {"checkpoints", strings(checkpoints)}};
      r.result = {{"density", rational(db.density)},
                  {"basis_n", str(db.basis_n)},
                  {"rows", density_json(table)}};
      r.table = density_table(table);
      return r;
    });
    cmd->add_option("--q", p->q, "q >= 2")->capture_default_str();
    cmd->add_option("--range", p->range, "M")->capture_default_str();
    cmd->add_option("--basis-range", p->basis_range, "Cover [0, m] for the basis witness")
        ->capture_default_str();
    cmd->add_option("--n-cap", p->n_cap, "Give up past this n")->capture_default_str();
    cmd->add_option("--checkpoints", p->checkpoints, "Checkpoints m (default: powers of ten)");
  }
  {
    struct P {
      std::int64_t q = 2;
      unsigned n = 10;
    };
    auto* cmd = aq->add_subcommand("witnesses", "Successor and exponent-graph witnesses");
    auto p = reg.add<P>(cmd, [](const P& p, const Globals&) {
      const auto w = aq::definability_witnesses(p.q, p.n);
      Report r;
      r.input = {{"q", str(p.q)}, {"n", str(p.n)}};
      r.result = witnesses_json(w);
      r.passed = w.passed();
      return r;
    });
    cmd->add_option("--q", p->q, "q >= 2")->capture_default_str();
    cmd->add_option("--n", p->n, "Check up to q^N")->capture_default_str();
  }
}

void dossier_command(CLI::App& app, Registry& reg) {
  auto* cmd = app.add_subcommand("dossier", "Run the certificate pipeline for one family");
  auto p = reg.add<DossierParams>(cmd, [](const DossierParams& p, const Globals& g) {
    const SetSpec spec = p.set.resolve();
    Report r;
    if (p.profile == "sparsity") {
      r = sparsity_dossier(spec, p, g);
    } else if (p.profile == "interdef") {
      r = interdef_dossier(spec, p, g);
    } else if (p.profile == "aq") {
      r = aq_dossier(spec, p, g);
    } else {
      r = independent_dossier(spec, p, g);
    }
    r.input = {{"spec", to_json(spec)}, {"profile", p.profile}};
    if (!p.bound.empty()) r.input["bound"] = str(integer_arg(p.bound));
    if (p.range > 0) r.input["range"] = str(p.range);
    r.result["profile"] = p.profile;
    return r;
  });
  p->set.add(cmd);
  cmd->add_option("--profile", p->profile, "sparsity, interdef, aq or independent")
      ->required()
      ->check(CLI::IsMember({"sparsity", "interdef", "aq", "independent"}));
  cmd->add_option("--bound", p->bound,
                  "Source bound (sparsity: 10^6, interdef: 10^5 for the reduction check)");
  cmd->add_option("--range", p->range,
                  "Sumset range (sparsity: 100), M (aq: 10^5) or target range (independent: 20)");
  cmd->add_option("--n", p->n, "Summands in the sparsity sumset")->capture_default_str();
  cmd->add_option("--max-target", p->max_target, "Profile targets in the sparsity dossier")
      ->capture_default_str();
  cmd->add_option("--terms", p->terms, "Terms of the independent decomposition")
      ->capture_default_str();
  cmd->add_option("--k-max", p->k_max, "Largest k in the independent dossier")
      ->capture_default_str();
}

const char* kFooter = R"(CSV output (--format csv) is available for:
  monoid, materialize, residue, sumset   value
  solve                                  x1,...,xk
  profile                                r,total,c=<signs>...
  density, aq density                    m,count,ratio,ratio_decimal
  aq g                                   n,g,bound,holds
Integers in JSON reports are decimal strings. The cache directory defaults
to $SPARSE_Z_CACHE. Exit codes: 0 success, 1 a certificate check failed,
2 contract error, 3 budget or precision exhausted.)";

void write_csv(const Table& t, std::ostream& out) {
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
}

int report_error(std::ostream& err, const std::string& code, const std::string& message,
                 int exit_code) {
  json e{{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}};
  err << e.dump() << '\n';
  return exit_code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact certificates for sparse integer sets", "sparse-z"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  if (const char* env = std::getenv("SPARSE_Z_CACHE")) globals.cache_dir = env;
  app.add_option("--format", globals.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--cache-dir", globals.cache_dir, "Window cache directory");
  app.add_option("--max-elements", globals.max_elements, "Element budget")->capture_default_str();
  app.add_option("--prime-bound", globals.prime_bound, "Trial division limit")
      ->capture_default_str();
  app.add_option("--working-precision", globals.working_precision, "Starting precision in bits")
      ->capture_default_str();
  app.add_option("--precision-cap", globals.precision_cap, "Precision cap in bits")
      ->capture_default_str();

  Registry reg;
  multiplicative_commands(app, reg);
  set_commands(app, reg);
  sumset_commands(app, reg);
  equation_commands(app, reg);
  geometric_commands(app, reg);
  aq_commands(app, reg);
  dossier_command(app, reg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, "Usage", e.what(), kExitContract);
  }

  const CLI::App* leaf = &app;
  std::string command;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
  }
  const auto handler = reg.handlers.find(leaf);
  if (handler == reg.handlers.end()) {
    return report_error(err, "Usage", "no command given", kExitContract);
  }

  try {
    const auto start = Clock::now();
    Report report = handler->second(globals);
    const double elapsed = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (globals.format == "csv") {
      if (!report.table) invalid("'" + command + "' has no CSV form");
      write_csv(*report.table, out);
    } else {
      json envelope = report.timings;
      envelope["elapsed_ms"] = elapsed;
      json doc{{"command", command},
               {"input", report.input},
               {"budgets", globals.budgets_json()},
               {"result", report.result},
               {"envelope", envelope}};
      out << doc.dump(2) << '\n';
    }
    return report.passed.value_or(true) ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    return report_error(err, std::string(to_string(e.code())), e.what(),
                        is_resource_error(e.code()) ? kExitResource : kExitContract);
  } catch (const std::bad_alloc&) {
    return report_error(err, "BudgetExceeded", "out of memory", kExitResource);
  }
}

}  // namespace sparsez::cli
