#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "blueprint/kmeans.hpp"

namespace blueprint {

/// Node of a fitted tree. Children are indices into DecisionTree::nodes.
struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;  // left iff x[feature] <= threshold
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t label = 0;  // argmax of class_counts, ties to the lowest label
  std::vector<std::size_t> class_counts;
  std::size_t depth = 0;
  double impurity = 0.0;
};

struct DecisionTree {
  std::size_t dim = 0;
  std::size_t n_classes = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root, stored in pre-order

  const TreeNode& root() const { return nodes.front(); }
  std::size_t depth() const;
  std::size_t leaf_count() const;
  /// Every (feature, threshold) used by an internal node, in pre-order.
  std::vector<std::pair<std::size_t, double>> splits() const;
};

struct TreeOptions {
  std::size_t max_depth = 3;
  std::size_t min_samples_split = 2;
};

/// max(3, input_dim + 1), the depth cap used by the pipeline.
std::size_t default_max_depth(std::size_t input_dim);

/// 1 - sum (n_i / n)^2; zero for an empty histogram.
double gini(std::span<const std::size_t> class_counts);

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double weighted_impurity = 0.0;  // n_left * gini_left + n_right * gini_right
};

/// Best Gini split of the samples `indices` over midpoints between
/// consecutive distinct values; ties prefer the lower feature index, then the
/// lower threshold.
SplitChoice best_split(const PointSet& x, std::span<const std::size_t> labels,
                       std::span<const std::size_t> indices, std::size_t n_classes);

/// Greedy CART induction. Throws std::invalid_argument on empty or
/// misaligned input.
DecisionTree tree_fit(const PointSet& x, std::span<const std::size_t> labels,
                      const TreeOptions& options);

std::size_t tree_predict(const DecisionTree& tree, std::span<const double> x);

/// Index of the leaf reached by x.
std::size_t tree_leaf(const DecisionTree& tree, std::span<const double> x);

}  // namespace blueprint
