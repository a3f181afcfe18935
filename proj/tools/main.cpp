// Command line front end: list-systems, train, analyze, report, run.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <string>

#include "blueprint/pipeline.hpp"

namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace blueprint;

  CLI::App app{"Recover decision boundaries of black-box systems with PPO exploration, "
               "K-Means and decision-tree rules"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string system;
  std::string seed;
  std::string out_dir;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Flat key = value configuration file");
  app.add_option("--system", system, "Built-in system name, or 'external'");
  app.add_option("--seed", seed, "Master seed (u64)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--set", sets, "Override any configuration key: --set key=value");

  std::map<std::string, std::string> overrides;
  for (const auto& key : config_keys()) {
    if (key == "system" || key == "seed" || key == "out_dir") continue;
    app.add_option("--" + dashed(key), overrides[key], "Override '" + key + "'");
  }

  auto* list_cmd = app.add_subcommand("list-systems", "List the built-in systems");
  auto* train_cmd = app.add_subcommand("train", "Train the exploration agent and save a checkpoint");
  auto* analyze_cmd = app.add_subcommand(
      "analyze", "Collect counterfactuals with the trained agent, cluster them and extract rules");
  auto* report_cmd = app.add_subcommand("report", "Validate collected counterfactuals and rules");
  auto* run_cmd = app.add_subcommand("run", "train + analyze + report");
  auto* show_cmd = app.add_subcommand("show-config", "Print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kSuccess : kPipelineError;
  }

  try {
    PipelineConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) apply_setting(config, key, value);
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!system.empty()) apply_setting(config, "system", system);
    if (!seed.empty()) apply_setting(config, "seed", seed);
    if (!out_dir.empty()) apply_setting(config, "out_dir", out_dir);

    if (*list_cmd) return cmd_list_systems(std::cout);
    if (*show_cmd) {
      std::cout << serialize_config(config);
      return kSuccess;
    }
    if (*train_cmd) return cmd_train(config, std::cout);
    if (*analyze_cmd) return cmd_analyze(config, std::cout);
    if (*report_cmd) return cmd_report(config, std::cout);
    if (*run_cmd) return cmd_run(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPipelineError;
  }
  return kPipelineError;
}
