#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blueprint/blackbox.hpp"
#include "blueprint/kmeans.hpp"
#include "blueprint/trajectory.hpp"
#include "blueprint/tree.hpp"

namespace blueprint {

/// Axis-aligned boundary x[feature] = value.
struct ThresholdBoundary {
  std::size_t feature = 0;
  double value = 0.0;
};

/// Known decision logic of a built-in system.
struct GroundTruth {
  std::string system_name;
  std::vector<ThresholdBoundary> boundaries;
  /// Whether split locations are a pass/fail signal. The two-axis system's
  /// cluster tree splits on cluster geometry rather than on the axes.
  bool gate_threshold_recovery = true;
  /// True iff the step state -> next_state crosses a boundary.
  std::function<bool(std::span<const double>, std::span<const double>)> crosses;
};

/// Ground truth for a built-in system name; nullopt for anything else.
std::optional<GroundTruth> ground_truth_for(const std::string& system_name);

struct StraddleReport {
  std::size_t checked = 0;
  std::vector<std::size_t> violations;  // record indices
};

StraddleReport validate_counterfactuals(std::span<const CounterfactualRecord> records,
                                        const GroundTruth& truth);

/// Records whose logged outputs disagree with a fresh evaluation of their
/// endpoints.
std::vector<std::size_t> reevaluation_mismatches(std::span<const CounterfactualRecord> records,
                                                 const SystemUnderTest& system);

/// At least one coordinate changes sign or touches zero between the endpoints.
bool sign_change_or_touch(std::span<const double> a, std::span<const double> b);

/// Fraction of records whose endpoints both lie within `radius` of a
/// coordinate axis (empty input counts as 1).
double axis_concentration(std::span<const CounterfactualRecord> records, double radius);

struct ThresholdRecovery {
  ThresholdBoundary truth;
  std::optional<double> best_split;  // nearest split on the same feature
  double abs_error = 0.0;
  bool pass = false;
  std::string diagnostic;
};

/// For each true boundary, the nearest tree split on its feature; passes iff
/// within `tolerance`.
std::vector<ThresholdRecovery> recover_thresholds(const DecisionTree& tree, const GroundTruth& truth,
                                                  double tolerance);

/// Default tolerance for threshold recovery.
inline constexpr double kThresholdTolerance = 0.25;

/// Writes `x0,x1,cluster` rows followed by a `centroid,cx0,cx1,cluster`
/// section. Returns false without touching the file for non-2-D data.
/// A null model writes the header only.
bool emit_cluster_plot_data(std::span<const CounterfactualRecord> records, const KMeansModel* model,
                            std::size_t dim, const std::filesystem::path& path);

struct ReportCheck {
  std::string description;
  bool pass = false;
};

struct ValidationReport {
  std::string system_name;
  bool has_ground_truth = false;
  std::size_t counterfactuals = 0;
  std::size_t straddle_violations = 0;
  std::size_t reevaluation_mismatches = 0;
  std::vector<ThresholdRecovery> thresholds;
  std::optional<std::filesystem::path> plot_data;  // nullopt: skipped
  std::vector<ReportCheck> checks;
  std::vector<std::string> rule_lines;

  bool passed() const;
  std::string render() const;
};

}  // namespace blueprint
