#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blueprint/tree.hpp"

namespace blueprint {

/// `input_0 .. input_{d-1}`.
std::vector<std::string> default_feature_names(std::size_t dim);

/// Indented text rendering of a tree:
///
///   |--- input_0 <= 4.96
///   |   |--- class: Cluster_3
///   |--- input_0 >  4.96
///   |   |--- class: Cluster_0
///
/// Thresholds are shown with two decimals; a lone leaf renders as a single
/// `|--- class: Cluster_<label>` line.
std::string export_text(const DecisionTree& tree, std::span<const std::string> feature_names);

/// Interval constraint on one feature: lower < x <= upper.
struct FeatureInterval {
  std::size_t feature = 0;
  std::optional<double> lower;  // exclusive
  std::optional<double> upper;  // inclusive
};

/// Conjunction of per-feature intervals reaching one leaf.
struct Rule {
  std::vector<FeatureInterval> conditions;  // sorted by feature, one per feature
  std::size_t label = 0;
  std::size_t support = 0;  // training samples in the leaf

  bool matches(std::span<const double> x) const;
  /// e.g. `input_0 > 4.89 AND input_0 <= 4.92`; `TRUE` when unconditional.
  std::string condition_text(std::span<const std::string> feature_names, bool full_precision) const;
};

struct RuleSet {
  std::vector<std::string> lines;  // export_text, one entry per line
  std::vector<Rule> rules;         // one per leaf, in pre-order

  /// Tab-separated sidecar: `rule<TAB>class<TAB>support<TAB>conditions`
  /// with full-precision thresholds.
  std::string to_tsv(std::span<const std::string> feature_names) const;
};

/// One rule per root-to-leaf path, with repeated conditions on a feature
/// folded to the tightest interval.
RuleSet extract_rules(const DecisionTree& tree, std::span<const std::string> feature_names);

/// Rebuilds the structure of an export_text rendering (thresholds at the
/// printed precision, empty class counts). Throws std::invalid_argument on
/// malformed text.
DecisionTree parse_export_text(const std::string& text, std::span<const std::string> feature_names);

}  // namespace blueprint
