#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>

#include "erglab/experiments.hpp"

namespace {

constexpr int kRan = 0;
constexpr int kCheckFailed = 10;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 1;

int run(const std::string& experiment, const std::string& config_path, std::optional<erglab::u64> seed,
        std::optional<std::string> out) {
  using namespace erglab;
  Config raw = Config::from_file(config_path);
  if (seed) raw.set("ensemble.seed", std::to_string(*seed));
  if (out) raw.set("output.dir", *out);
  ExperimentConfig cfg = ExperimentConfig::from(raw, experiment);
  ResultRecord rec = run_experiment(cfg);
  write_outputs(rec, cfg, cfg.out);
  for (const auto& c : rec.checks) {
    std::printf("%-6s %-34s %s value=%.6g threshold=%.6g  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.assertion ? "[assert]" : "[report]", c.value, c.threshold, c.detail.c_str());
  }
  std::printf("outputs written to %s\n", cfg.out.c_str());
  return rec.passed() ? kRan : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"erglab: numerical experiments on infinite-measure dynamical systems"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  std::string experiment, config_path;
  std::optional<erglab::u64> seed;
  std::optional<std::string> out;
  run_cmd->add_option("experiment", experiment, "experiment id (see 'erglab list')")->required();
  run_cmd->add_option("--config", config_path, "key-value config file")->required();
  run_cmd->add_option("--seed", seed, "master seed, overrides ensemble.seed");
  run_cmd->add_option("--out", out, "output directory, overrides output.dir");

  auto* list_cmd = app.add_subcommand("list", "list experiment ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  if (list_cmd->parsed()) {
    for (const auto& id : erglab::experiment_ids()) std::cout << id << "\n";
    return kRan;
  }
  try {
    return run(experiment, config_path, seed, out);
  } catch (const erglab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const erglab::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
