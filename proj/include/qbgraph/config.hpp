#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qbgraph/errors.hpp"
#include "qbgraph/text.hpp"

namespace qbg {

enum class ValueKind { Int, U64, Double, IntList, DoubleList, String, StringList, Bool };

struct ConfigKey {
  const char* name;
  ValueKind kind;
  const char* help;
};

/// Every key a run config may carry. CLI long flags use the same names.
inline const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = {
      {"seed", ValueKind::U64, "base seed for random ensembles"},
      {"out", ValueKind::String, "output directory"},
      {"format", ValueKind::String, "csv or json"},
      {"jobs", ValueKind::Int, "worker threads"},
      {"n", ValueKind::IntList, "vertex counts; comma list or a..b range"},
      {"h", ValueKind::DoubleList, "local field values"},
      {"kappa", ValueKind::DoubleList, "battery-charger coupling values"},
      {"omega", ValueKind::DoubleList, "charger mode energies"},
      {"charger-modes", ValueKind::String, "number of charger modes, or N for one per battery site"},
      {"dt", ValueKind::Double, "time step"},
      {"t-max", ValueKind::Double, "time horizon"},
      {"samples", ValueKind::Int, "samples per ensemble and size"},
      {"model", ValueKind::StringList, "ensembles: er:p, tree, ba:m, sbm, sbm:pin:pout"},
      {"preset", ValueKind::String, "dynamics preset: topologies, omega, kappa, single, all"},
      {"topology", ValueKind::String, "dynamics single-run graph: star, path, cycle, complete, perturbed-star, er:p"},
      {"all", ValueKind::Bool, "enumerate: include disconnected graphs"},
      {"check", ValueKind::Bool, "exit with status 3 when the checked property fails"},
      {"spot-samples", ValueKind::Int, "conjecture: random spot-check samples"},
      {"spot-n", ValueKind::Int, "conjecture: spot-check vertex count"},
      {"spot-model", ValueKind::String, "conjecture: spot-check ensemble"},
  };
  return keys;
}

inline const ConfigKey& schema_key(const std::string& name) {
  const auto& keys = config_schema();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return name == k.name; });
  if (it == keys.end()) throw InputError("unknown config key '" + name + "'");
  return *it;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

inline long long parse_ll(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) throw InputError(key + ": '" + v + "' is not an integer");
  return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  std::uint64_t x = 0;
  try {
    if (!v.empty() && v[0] != '-') x = std::stoull(v, &pos, 0);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) throw InputError(key + ": '" + v + "' is not an unsigned integer");
  return x;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) throw InputError(key + ": '" + v + "' is not a number");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError(key + ": '" + v + "' is not a boolean");
}

inline std::vector<long long> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<long long> out;
  for (const auto& item : split(v, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_ll(key, item));
      continue;
    }
    const long long a = parse_ll(key, trim(item.substr(0, dots)));
    const long long b = parse_ll(key, trim(item.substr(dots + 2)));
    if (b < a) throw InputError(key + ": empty range '" + item + "'");
    for (long long x = a; x <= b; ++x) out.push_back(x);
  }
  if (out.empty()) throw InputError(key + ": empty list");
  return out;
}

inline void validate(const ConfigKey& k, const std::string& v) {
  switch (k.kind) {
    case ValueKind::Int: parse_ll(k.name, v); break;
    case ValueKind::U64: parse_u64(k.name, v); break;
    case ValueKind::Double: parse_double(k.name, v); break;
    case ValueKind::IntList: parse_int_list(k.name, v); break;
    case ValueKind::DoubleList:
      for (const auto& item : split(v, ',')) parse_double(k.name, item);
      break;
    case ValueKind::Bool: parse_bool(k.name, v); break;
    case ValueKind::String:
    case ValueKind::StringList:
      if (v.empty()) throw InputError(std::string(k.name) + ": empty value");
      break;
  }
}

}  // namespace detail

/// Flat key = value run configuration.
///
/// Text form: one `key = value` per line, `#` starts a comment, lists are
/// comma separated and integer lists accept `a..b`. Values are kept as
/// validated text, so serialising and parsing again is lossless. The
/// `*_or` getters record the default they fall back to, so after a run the
/// config holds every parameter that was actually used.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
      cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return parse(in);
  }

  void set(const std::string& key, const std::string& value) {
    detail::validate(schema_key(key), value);
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Keys from `other` replace ours.
  void merge(const RunConfig& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  long long int_or(const std::string& key, long long def) {
    if (!has(key)) values_[key] = std::to_string(def);
    return detail::parse_ll(key, values_.at(key));
  }

  std::uint64_t u64_or(const std::string& key, std::uint64_t def) {
    if (!has(key)) values_[key] = std::to_string(def);
    return detail::parse_u64(key, values_.at(key));
  }

  double double_or(const std::string& key, double def) {
    if (!has(key)) values_[key] = fmt_num(def);
    return detail::parse_double(key, values_.at(key));
  }

  bool bool_or(const std::string& key, bool def) {
    if (!has(key)) values_[key] = def ? "true" : "false";
    return detail::parse_bool(key, values_.at(key));
  }

  std::string string_or(const std::string& key, const std::string& def) {
    if (!has(key)) values_[key] = def;
    return values_.at(key);
  }

  std::vector<int> ints_or(const std::string& key, const std::vector<int>& def) {
    if (!has(key)) values_[key] = join(def, ",", [](int x) { return std::to_string(x); });
    std::vector<int> out;
    for (long long x : detail::parse_int_list(key, values_.at(key))) out.push_back(static_cast<int>(x));
    return out;
  }

  std::vector<double> doubles_or(const std::string& key, const std::vector<double>& def) {
    if (!has(key)) values_[key] = join(def, ",", [](double x) { return fmt_num(x); });
    std::vector<double> out;
    for (const auto& item : detail::split(values_.at(key), ',')) out.push_back(detail::parse_double(key, item));
    return out;
  }

  std::vector<std::string> strings_or(const std::string& key, const std::vector<std::string>& def) {
    if (!has(key)) values_[key] = join(def, ",", [](const std::string& s) { return s; });
    return detail::split(values_.at(key), ',');
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

 private:
  std::map<std::string, std::string> values_;
};

/// Charger mode count for a battery of n sites: an integer, or "N" for n.
inline int resolve_charger_modes(const std::string& text, int n) {
  if (text == "N" || text == "n") return n;
  const long long l = detail::parse_ll("charger-modes", text);
  if (l < 1) throw InputError("charger-modes must be >= 1 or N");
  return static_cast<int>(l);
}

}  // namespace qbg
