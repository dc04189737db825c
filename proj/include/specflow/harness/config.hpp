#pragma once

// INI experiment configuration: a [run] section (experiment, seed, out,
// format) and a [params] section checked against the experiment's schema.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "specflow/core/csv.hpp"
#include "specflow/core/error.hpp"

namespace specflow::harness {

enum class ParamType { real, integer, text, boolean, real_list };

inline const char* to_string(ParamType t) {
  switch (t) {
    case ParamType::real: return "real";
    case ParamType::integer: return "integer";
    case ParamType::text: return "string";
    case ParamType::boolean: return "boolean";
    case ParamType::real_list: return "list of reals";
  }
  return "unknown";
}

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::real;
  std::optional<std::string> default_value;  // empty: required
  std::vector<std::string> choices = {};     // text parameters only; empty: free text
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_integer(std::string_view s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<std::vector<double>> parse_real_list(std::string_view s) {
  std::vector<double> out;
  for (const auto& piece : split(s, ',')) {
    const auto v = parse_real(piece);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

/// Canonical text of a validated value so that the echoed config is stable.
inline std::string canonical(const ParamSpec& spec, const std::string& raw) {
  const auto bad = [&] {
    return Error(ErrorCode::TypeMismatch,
                 "parameter '" + spec.name + "' expects " + to_string(spec.type) + ", got '" + raw + "'");
  };
  switch (spec.type) {
    case ParamType::real: {
      const auto v = parse_real(raw);
      if (!v) throw bad();
      return format_double(*v);
    }
    case ParamType::integer: {
      const auto v = parse_integer(raw);
      if (!v) throw bad();
      return std::to_string(*v);
    }
    case ParamType::boolean: {
      const auto v = parse_bool(raw);
      if (!v) throw bad();
      return *v ? "true" : "false";
    }
    case ParamType::real_list: {
      const auto v = parse_real_list(raw);
      if (!v) throw bad();
      std::string out;
      for (std::size_t i = 0; i < v->size(); ++i) out += (i ? "," : "") + format_double((*v)[i]);
      return out;
    }
    case ParamType::text:
      if (!spec.choices.empty() && std::find(spec.choices.begin(), spec.choices.end(), raw) == spec.choices.end()) {
        std::string list;
        for (const auto& c : spec.choices) list += (list.empty() ? "" : "|") + c;
        throw Error(ErrorCode::TypeMismatch, "parameter '" + spec.name + "' must be one of " + list + ", got '" + raw + "'");
      }
      return raw;
  }
  throw bad();
}

}  // namespace detail

/// Fully resolved configuration: every schema parameter has a value.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv", "json", "svg"};

  const std::string& raw(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw Error(ErrorCode::MissingRequired, "parameter '" + key + "' is not set");
    return it->second;
  }
  double real(const std::string& key) const { return *detail::parse_real(raw(key)); }
  long long integer(const std::string& key) const { return *detail::parse_integer(raw(key)); }
  std::size_t count(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw Error(ErrorCode::TypeMismatch, "parameter '" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
  }
  const std::string& text(const std::string& key) const { return raw(key); }
  bool flag(const std::string& key) const { return *detail::parse_bool(raw(key)); }
  std::vector<double> reals(const std::string& key) const { return *detail::parse_real_list(raw(key)); }
  bool wants(std::string_view format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
  }
};

/// Raw key/value pairs from an INI file, before schema checks.
struct RawConfig {
  std::map<std::string, std::string> run;
  std::map<std::string, std::string> params;
};

inline RawConfig read_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::Io, e.what());
  }
  RawConfig raw;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(ErrorCode::UnknownKey, "key '" + section + "' outside a section");
    std::map<std::string, std::string>* target = nullptr;
    if (section == "run") target = &raw.run;
    else if (section == "params") target = &raw.params;
    else throw Error(ErrorCode::UnknownKey, "unknown section [" + section + "]");
    for (const auto& [key, value] : body) (*target)[key] = detail::trim(value.data());
  }
  return raw;
}

inline std::vector<std::string> parse_formats(const std::string& text) {
  auto list = detail::split(text, ',');
  for (const auto& f : list)
    if (f != "csv" && f != "json" && f != "svg")
      throw Error(ErrorCode::TypeMismatch, "unknown output format '" + f + "' (csv, json, svg)");
  return list;
}

/// Checks every key against the schema, fills defaults and canonicalizes values.
inline ExperimentConfig resolve_config(const RawConfig& raw, const std::string& experiment,
                                       const std::vector<ParamSpec>& schema) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  for (const auto& [key, value] : raw.run) {
    if (key == "experiment") {
      if (value != experiment)
        throw Error(ErrorCode::TypeMismatch, "config is for experiment '" + value + "', not '" + experiment + "'");
    } else if (key == "seed") {
      const auto v = detail::parse_integer(value);
      if (!v || *v < 0) throw Error(ErrorCode::TypeMismatch, "seed expects a nonnegative integer, got '" + value + "'");
      cfg.seed = static_cast<std::uint64_t>(*v);
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "format") {
      cfg.formats = parse_formats(value);
    } else {
      throw Error(ErrorCode::UnknownKey, "unknown key '" + key + "' in [run]");
    }
  }
  for (const auto& [key, value] : raw.params) {
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const ParamSpec& p) { return p.name == key; });
    if (it == schema.end()) throw Error(ErrorCode::UnknownKey, "unknown key '" + key + "' for experiment " + experiment);
    cfg.params[key] = detail::canonical(*it, value);
  }
  for (const auto& spec : schema) {
    if (cfg.params.count(spec.name)) continue;
    if (!spec.default_value) throw Error(ErrorCode::MissingRequired, "parameter '" + spec.name + "' is required");
    cfg.params[spec.name] = detail::canonical(spec, *spec.default_value);
  }
  return cfg;
}

/// INI text of a resolved config, suitable for re-running.
inline std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[run]\nexperiment = " << cfg.experiment << "\nseed = " << cfg.seed << "\nout = " << cfg.out_dir
      << "\nformat = ";
  for (std::size_t i = 0; i < cfg.formats.size(); ++i) out << (i ? "," : "") << cfg.formats[i];
  out << "\n\n[params]\n";
  for (const auto& [k, v] : cfg.params) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace specflow::harness
