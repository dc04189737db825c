#pragma once

// Experiment summaries: named checks, artifacts and diagnostic metrics,
// persisted as summary.json.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specflow/core/error.hpp"
#include "specflow/harness/config.hpp"

namespace specflow::harness {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;

  /// value <= tolerance (non-finite values fail).
  static Check at_most(std::string name, double value, double tolerance) {
    return {std::move(name), std::isfinite(value) && value <= tolerance, value, tolerance};
  }
  /// value >= floor.
  static Check at_least(std::string name, double value, double floor) {
    return {std::move(name), std::isfinite(value) && value >= floor, value, floor};
  }
  /// |value - target| / |target| <= tolerance; `value` records the relative error.
  static Check relative(std::string name, double value, double target, double tolerance) {
    return at_most(std::move(name), std::abs(value - target) / std::abs(target), tolerance);
  }
};

struct Report {
  std::string experiment;
  ExperimentConfig config;
  std::vector<Check> checks;
  std::vector<std::string> artifacts;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["experiment"] = r.experiment;
  nlohmann::ordered_json cfg;
  cfg["seed"] = r.config.seed;
  cfg["out"] = r.config.out_dir;
  cfg["format"] = r.config.formats;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.config.params) params[k] = v;
  cfg["params"] = params;
  j["resolved_config"] = cfg;
  j["passed"] = r.passed();
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"value", detail::number(c.value)},
                           {"tolerance", detail::number(c.tolerance)}});
  j["artifacts"] = r.artifacts;
  j["metrics"] = r.metrics;
  return j;
}

/// Output directory plus the list of files written into it.
class Output {
 public:
  explicit Output(const ExperimentConfig& cfg) : dir_(cfg.out_dir), cfg_(&cfg) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir_.string());
  }

  bool csv() const { return cfg_->wants("csv"); }
  bool json() const { return cfg_->wants("json"); }
  bool svg() const { return cfg_->wants("svg"); }

  /// Path for `name` inside the output directory, recorded as an artifact.
  std::string file(const std::string& name) {
    const auto p = dir_ / name;
    std::filesystem::create_directories(p.parent_path());
    artifacts_.push_back(name);
    return p.string();
  }

  const std::vector<std::string>& artifacts() const { return artifacts_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  const ExperimentConfig* cfg_;
  std::vector<std::string> artifacts_;
};

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace specflow::harness
