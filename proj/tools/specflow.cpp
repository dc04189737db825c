// specflow: run one experiment per config, or a sweep of configs in worker processes.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specflow/harness/experiments.hpp"

namespace {

namespace h = specflow::harness;

constexpr int exit_pass = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

struct Overrides {
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
};

int run_one(const std::string& experiment, const std::string& path, const Overrides& ov, const std::string& out_suffix) {
  try {
    auto cfg = h::parse_config(path, experiment);
    if (!ov.out.empty()) cfg.out_dir = ov.out;
    if (!ov.format.empty()) cfg.formats = h::parse_formats(ov.format);
    if (ov.seed) cfg.seed = *ov.seed;
    if (!out_suffix.empty()) cfg.out_dir = (std::filesystem::path(cfg.out_dir) / out_suffix).string();
    const auto rep = h::run_experiment(cfg);
    for (const auto& c : rep.checks)
      std::printf("%-4s %-32s value=%.6g tolerance=%.6g\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.value, c.tolerance);
    std::printf("%s: %s (%s/summary.json)\n", cfg.experiment.c_str(), rep.passed() ? "passed" : "failed", cfg.out_dir.c_str());
    return rep.passed() ? exit_pass : exit_check_failed;
  } catch (const specflow::Error& e) {
    std::fprintf(stderr, "specflow %s [%s]: %s\n", experiment.c_str(), path.c_str(), e.what());
    return specflow::is_config_error(e.code()) ? exit_usage : exit_numerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "specflow %s [%s]: %s\n", experiment.c_str(), path.c_str(), e.what());
    return exit_numerical;
  }
}

// Runs configs in at most `jobs` child processes; the worst exit code wins.
int run_sweep(const std::string& experiment, const std::vector<std::string>& configs, const Overrides& ov, unsigned jobs) {
  int worst = exit_pass;
  std::size_t next = 0, running = 0;
  auto reap = [&] {
    int status = 0;
    if (::wait(&status) < 0) return;
    --running;
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : exit_numerical;
    worst = std::max(worst, code);
  };
  while (next < configs.size() || running > 0) {
    if (next < configs.size() && running < jobs) {
      const std::string path = configs[next];
      const std::string stem = std::filesystem::path(path).stem().string();
      ++next;
      std::fflush(nullptr);
      const pid_t pid = ::fork();
      if (pid < 0) {
        std::fprintf(stderr, "specflow: fork failed\n");
        worst = std::max(worst, exit_numerical);
        continue;
      }
      if (pid == 0) {
        const int code = run_one(experiment, path, ov, stem);
        std::fflush(nullptr);
        ::_exit(code);
      }
      ++running;
    } else {
      reap();
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral entropy and geometric flow experiments"};
  std::string experiment;
  std::vector<std::string> configs;
  Overrides ov;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool list = false;

  std::vector<std::string> names;
  for (const auto& e : h::registry()) names.push_back(e.name);
  app.add_option("experiment", experiment, "experiment name")->check(CLI::IsMember(names));
  app.add_option("-c,--config", configs, "INI config file (repeat for a sweep)")->check(CLI::ExistingFile);
  app.add_option("-o,--out", ov.out, "output directory (overrides [run] out)");
  app.add_option("-f,--format", ov.format, "comma-separated subset of csv,json,svg");
  auto* seed_opt = app.add_option("-s,--seed", seed, "64-bit seed (overrides [run] seed)");
  app.add_option("-j,--jobs", jobs, "worker processes for a sweep")->check(CLI::PositiveNumber);
  app.add_flag("--list", list, "list experiments and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_usage;
  }
  if (list) {
    for (const auto& e : h::registry()) std::printf("%-14s %s\n", e.name.c_str(), e.summary.c_str());
    return exit_pass;
  }
  if (experiment.empty() || configs.empty()) {
    std::fprintf(stderr, "usage: specflow <experiment> --config <path> [--out dir] [--format csv,json,svg] [--seed u64] [--jobs k]\n");
    return exit_usage;
  }
  if (*seed_opt) ov.seed = seed;
  if (configs.size() == 1 && jobs <= 1) return run_one(experiment, configs.front(), ov, "");
  return run_sweep(experiment, configs, ov, std::max(1u, jobs));
}
