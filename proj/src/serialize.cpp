#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "sparsez/core.hpp"
#include "sparsez/error.hpp"

namespace sparsez {

namespace fs = std::filesystem;
using nlohmann::json;

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

json integers(const std::vector<Integer>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(to_decimal(x));
  return out;
}

// Accepts decimal strings and JSON integers.
Integer read_integer(const json& j) {
  if (j.is_string()) return parse_integer(j.get<std::string>());
  if (j.is_number_integer()) return Integer(std::to_string(j.get<long long>()));
  invalid("expected an integer, got " + j.dump());
}

std::vector<Integer> read_integers(const json& j) {
  if (!j.is_array()) invalid("expected an array of integers");
  std::vector<Integer> out;
  for (const auto& x : j) out.push_back(read_integer(x));
  return out;
}

std::int64_t read_int64(const json& j, std::string_view what) {
  return checked_int64(read_integer(j), what);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    invalid(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

std::string read_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  invalid("expected a string, got " + j.dump());
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

}  // namespace

json to_json(const PerturbSpec& spec) { return integers(spec.coefficients); }

PerturbSpec perturb_from_json(const json& j) { return PerturbSpec{read_integers(j)}; }

json to_json(const LambdaSpec& spec) {
  json out = std::visit(
      overloaded{
          [](const LambdaSpec::PowerOfReal& p) {
            return json{{"kind", "power"}, {"tau", p.tau.name()}};
          },
          [](const LambdaSpec::Recursive& r) {
            json taus = json::array();
            for (const auto& t : r.taus) taus.push_back(t.name());
            json steps = json::array();
            for (const auto& s : r.steps) {
              steps.push_back({{"multiplier", to_decimal(s.multiplier)},
                               {"tau", std::to_string(s.tau_index)}});
            }
            return json{{"kind", "recursive"}, {"taus", taus}, {"steps", steps}};
          },
          [](const LambdaSpec::ExplicitRationals& e) {
            json values = json::array();
            for (const auto& v : e.values) values.push_back(to_decimal(v));
            return json{{"kind", "explicit"}, {"values", values}};
          },
      },
      spec.kind);
  out["independent"] = spec.independence_declared;
  return out;
}

LambdaSpec lambda_from_json(const json& j) {
  const std::string kind = read_string(field(j, "kind"));
  LambdaSpec out{LambdaSpec::ExplicitRationals{}, false};
  if (j.contains("independent")) {
    if (!j.at("independent").is_boolean()) invalid("'independent' must be a boolean");
    out.independence_declared = j.at("independent").get<bool>();
  }
  // Optional table of named constants, e.g. {"phi": "sqrt:5"}; tau tokens
  // are looked up there before being parsed.
  std::map<std::string, std::string> constants;
  if (j.contains("constants")) {
    if (!j.at("constants").is_object()) invalid("'constants' must be an object");
    for (const auto& [name, value] : j.at("constants").items()) constants[name] = read_string(value);
  }
  const auto real = [&](const json& token) {
    const std::string text = read_string(token);
    const auto named = constants.find(text);
    return CertifiedReal::parse(named == constants.end() ? text : named->second);
  };
  if (kind == "power") {
    out.kind = LambdaSpec::PowerOfReal{real(field(j, "tau"))};
  } else if (kind == "recursive") {
    LambdaSpec::Recursive r;
    for (const auto& t : field(j, "taus")) r.taus.push_back(real(t));
    for (const auto& s : field(j, "steps")) {
      const Integer index = read_integer(field(s, "tau"));
      if (index < 0) invalid("negative tau index");
      r.steps.push_back({read_integer(field(s, "multiplier")),
                         static_cast<std::size_t>(read_int64(field(s, "tau"), "tau index"))});
    }
    out.kind = std::move(r);
  } else if (kind == "explicit") {
    LambdaSpec::ExplicitRationals e;
    for (const auto& v : field(j, "values")) e.values.push_back(parse_rational(read_string(v)));
    out.kind = std::move(e);
  } else {
    invalid("unknown lambda kind '" + kind + "'");
  }
  return out;
}

json to_json(const SetSpec& spec) {
  return std::visit(
      overloaded{
          [](const family::Monoid& m) {
            json gens = json::array();
            for (auto g : m.generators) gens.push_back(std::to_string(g));
            return json{{"kind", "monoid"}, {"generators", gens}};
          },
          [](const family::PowerSet& p) {
            return json{{"kind", "power"}, {"base", std::to_string(p.base)}};
          },
          [](const family::Aq& a) { return json{{"kind", "aq"}, {"q", std::to_string(a.q)}}; },
          [](const family::PerturbedGeometric& p) {
            return json{{"kind", "perturbed"},
                        {"lambda", to_json(p.lambda)},
                        {"perturbation", to_json(p.perturbation)}};
          },
          [](const family::Explicit& e) {
            return json{{"kind", "explicit"}, {"elements", integers(e.elements)}};
          },
          [](const family::Shifted& s) {
            return json{{"kind", "shifted"}, {"base", to_json(*s.base)}, {"shifts", integers(s.shifts)}};
          },
          [](const family::Union& u) {
            json parts = json::array();
            for (const auto& p : u.parts) parts.push_back(to_json(p));
            return json{{"kind", "union"}, {"parts", parts}};
          },
      },
      spec.kind);
}

SetSpec setspec_from_json(const json& j) {
  const std::string kind = read_string(field(j, "kind"));
  SetSpec out = [&] {
    if (kind == "monoid") {
      std::vector<std::int64_t> gens;
      for (const auto& g : field(j, "generators")) gens.push_back(read_int64(g, "generator"));
      return SetSpec::monoid(std::move(gens));
    }
    if (kind == "power") return SetSpec::power_set(read_int64(field(j, "base"), "base"));
    if (kind == "aq") return SetSpec::aq(read_int64(field(j, "q"), "q"));
    if (kind == "perturbed") {
      PerturbSpec g;
      if (j.contains("perturbation")) g = perturb_from_json(j.at("perturbation"));
      return SetSpec::perturbed(lambda_from_json(field(j, "lambda")), std::move(g));
    }
    if (kind == "explicit") return SetSpec::explicit_set(read_integers(field(j, "elements")));
    if (kind == "shifted") {
      return SetSpec::shifted(setspec_from_json(field(j, "base")),
                              read_integers(field(j, "shifts")));
    }
    if (kind == "union") {
      std::vector<SetSpec> parts;
      for (const auto& p : field(j, "parts")) parts.push_back(setspec_from_json(p));
      return SetSpec::union_of(std::move(parts));
    }
    invalid("unknown set kind '" + kind + "'");
  }();
  validate(out);
  return out;
}

std::string canonical_json(const SetSpec& spec) { return to_json(spec).dump(); }

std::string serialize_window(const Window& window) {
  std::string body;
  for (const auto& x : window.elements()) {
    body += to_decimal(x);
    body += '\n';
  }
  json header{{"lo", to_decimal(window.lo())},
              {"bound", to_decimal(window.bound())},
              {"count", std::to_string(window.size())},
              {"checksum", sha256_hex(body)},
              {"spec", window.source() ? to_json(*window.source()) : json(nullptr)}};
  return header.dump() + "\n" + body;
}

Window parse_window(const std::string& text) {
  auto corrupt = [](const std::string& why) -> Error {
    return Error(ErrorCode::CorruptCache, "window file: " + why);
  };
  const auto newline = text.find('\n');
  if (newline == std::string::npos) throw corrupt("missing header line");
  const std::string body = text.substr(newline + 1);
  json header;
  try {
    header = json::parse(text.substr(0, newline));
  } catch (const json::exception&) {
    throw corrupt("unreadable header");
  }
  try {
    if (sha256_hex(body) != header.at("checksum").get<std::string>()) {
      throw corrupt("checksum mismatch");
    }
    std::vector<Integer> elements;
    std::istringstream lines(body);
    for (std::string line; std::getline(lines, line);) elements.push_back(parse_integer(line));
    if (std::to_string(elements.size()) != header.at("count").get<std::string>()) {
      throw corrupt("element count mismatch");
    }
    std::optional<SetSpec> source;
    if (!header.at("spec").is_null()) source = setspec_from_json(header.at("spec"));
    return Window(std::move(elements), parse_integer(header.at("lo").get<std::string>()),
                  parse_integer(header.at("bound").get<std::string>()), std::move(source));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptCache) throw;
    throw corrupt(e.what());
  } catch (const json::exception& e) {
    throw corrupt(e.what());
  }
}

namespace {

// flock on <dir>/.lock, released on destruction.
class DirectoryLock {
 public:
  DirectoryLock(const fs::path& dir, bool exclusive) {
    const auto path = dir / ".lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open lock file " + path.string());
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::IoError, "cannot lock " + path.string());
    }
  }
  ~DirectoryLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

fs::path cache_path(const SetSpec& spec, const fs::path& dir) {
  return dir / (sha256_hex(canonical_json(spec)) + ".window");
}

void cache_store(const Window& window, const fs::path& dir) {
  if (!window.source()) invalid("cannot cache a window without a source spec");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create cache dir " + dir.string());
  DirectoryLock lock(dir, true);
  const auto target = cache_path(*window.source(), dir);
  auto temp = target;
  temp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out << serialize_window(window);
    if (!out.flush()) throw Error(ErrorCode::IoError, "cannot write " + temp.string());
  }
  fs::rename(temp, target, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename into " + target.string());
}

Window cache_load(const SetSpec& spec, const Integer& bound, const fs::path& dir,
                  std::optional<Integer> lo) {
  const auto path = cache_path(spec, dir);
  std::string text;
  {
    if (!fs::exists(dir)) throw Error(ErrorCode::CacheMiss, "no cache directory " + dir.string());
    DirectoryLock lock(dir, false);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::CacheMiss, "no cached window for spec");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  Window stored = parse_window(text);
  if (!stored.source() || canonical_json(*stored.source()) != canonical_json(spec)) {
    throw Error(ErrorCode::CorruptCache, "cached spec does not match its file name");
  }
  const Integer low = lo ? *lo : (spec.natural_valued() ? Integer(0) : Integer(-bound));
  if (bound > stored.bound() || low < stored.lo()) {
    throw Error(ErrorCode::CacheMiss, "cached window [" + to_decimal(stored.lo()) + ", " +
                                          to_decimal(stored.bound()) + "] does not cover the request");
  }
  if (bound == stored.bound() && low == stored.lo()) return stored;
  return stored.restrict(low, bound);
}

}  // namespace sparsez
