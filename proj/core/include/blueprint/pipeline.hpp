#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blueprint/blackbox.hpp"
#include "blueprint/harness.hpp"
#include "blueprint/kmeans.hpp"
#include "blueprint/ppo.hpp"
#include "blueprint/rules.hpp"
#include "blueprint/trajectory.hpp"
#include "blueprint/tree.hpp"

namespace blueprint {

/// Everything one pipeline run needs. Defaults: 20,000 timesteps over 4 envs
/// with 2048-step rollouts at lr 3e-4, 100-step training episodes, action
/// scale 1.0, 100 analysis episodes of 200 steps, k = 4 with 10 restarts and
/// tree depth max(3, d + 1).
struct PipelineConfig {
  std::string system = "system_1_threshold";  // built-in name or "external"

  // Used when system == "external".
  std::string external_name = "external";
  std::string external_command;
  std::string external_args;
  std::string external_parse = "label";  // label | score
  std::vector<double> external_low;
  std::vector<double> external_high;

  TrainConfig train;  // train.seed is the master seed

  int analysis_episodes = 100;
  int analysis_max_steps = 200;
  std::size_t n_clusters = 4;
  int n_init = 10;
  int kmeans_max_iter = 300;
  std::size_t max_depth = 0;  // 0: max(3, input_dim + 1)

  std::filesystem::path out_dir = "out";
};

/// Sets one `key = value` setting; throws ConfigError for an unknown key or
/// bad value.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// Every settable key, in serialization order.
const std::vector<std::string>& config_keys();
std::string get_setting(const PipelineConfig& config, const std::string& key);

/// Flat `key = value` text; `#` starts a comment.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
std::string serialize_config(const PipelineConfig& config);

/// Instantiates the configured system.
SystemPtr make_system(const PipelineConfig& config);

/// Name used for artifact files.
std::string system_name(const PipelineConfig& config);

struct ArtifactPaths {
  std::filesystem::path model;
  std::filesystem::path metrics;
  std::filesystem::path config;
  std::filesystem::path trajectories;
  std::filesystem::path rules_text;
  std::filesystem::path rules_tsv;
  std::filesystem::path clusters;
  std::filesystem::path report;
};

ArtifactPaths artifact_paths(const PipelineConfig& config);

/// Clusters and rules derived from a set of counterfactual records.
struct AnalysisResult {
  std::optional<KMeansModel> kmeans;  // nullopt when there are fewer records than clusters
  std::vector<std::size_t> labels;
  std::optional<DecisionTree> tree;
  RuleSet rules;
};

AnalysisResult analyze_records(const std::vector<CounterfactualRecord>& records, std::size_t dim,
                               const PipelineConfig& config);

ValidationReport build_report(const SystemUnderTest& system,
                              const std::vector<CounterfactualRecord>& records,
                              const AnalysisResult& analysis,
                              const std::optional<std::filesystem::path>& plot_data);

enum ExitCode : int {
  kSuccess = 0,
  kPipelineError = 1,
  kValidationFailure = 2,
};

// Subcommands. Each writes its artifacts under config.out_dir and progress to
// `log`, returns an ExitCode, and throws on pipeline errors.
int cmd_list_systems(std::ostream& out);
int cmd_train(const PipelineConfig& config, std::ostream& log);
int cmd_analyze(const PipelineConfig& config, std::ostream& log);
int cmd_report(const PipelineConfig& config, std::ostream& log);
int cmd_run(const PipelineConfig& config, std::ostream& log);

}  // namespace blueprint
