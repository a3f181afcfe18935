#include "blueprint/tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace blueprint {

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

std::vector<std::pair<std::size_t, double>> DecisionTree::splits() const {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& n : nodes) {
    if (!n.leaf) out.emplace_back(n.feature, n.threshold);
  }
  return out;
}

std::size_t default_max_depth(std::size_t input_dim) { return std::max<std::size_t>(3, input_dim + 1); }

double gini(std::span<const std::size_t> class_counts) {
  const double n = static_cast<double>(std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
  if (n == 0.0) return 0.0;
  double sq = 0.0;
  for (std::size_t c : class_counts) {
    const double p = static_cast<double>(c) / n;
    sq += p * p;
  }
  return 1.0 - sq;
}

namespace {

// n * gini for a histogram with total n and sum of squared counts sq.
double scaled_gini(double n, double sq) { return n > 0.0 ? n - sq / n : 0.0; }

}  // namespace

SplitChoice best_split(const PointSet& x, std::span<const std::size_t> labels,
                       std::span<const std::size_t> indices, std::size_t n_classes) {
  SplitChoice best;
  const std::size_t n = indices.size();
  if (n < 2) return best;

  std::vector<std::size_t> total(n_classes, 0);
  for (std::size_t i : indices) ++total[labels[i]];

  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::vector<std::size_t> left(n_classes);
  for (std::size_t f = 0; f < x.dim; ++f) {
    auto value = [&](std::size_t i) { return x.values[i * x.dim + f]; };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    std::fill(left.begin(), left.end(), 0);
    double left_sq = 0.0;
    double right_sq = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) right_sq += static_cast<double>(total[c] * total[c]);

    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
      const std::size_t c = labels[order[pos]];
      // Move one sample of class c from right to left, updating sums of squares.
      const double l = static_cast<double>(left[c]);
      const double r = static_cast<double>(total[c] - left[c]);
      left_sq += 2.0 * l + 1.0;
      right_sq -= 2.0 * r - 1.0;
      ++left[c];

      const double lo = value(order[pos]);
      const double hi = value(order[pos + 1]);
      if (!(lo < hi)) continue;
      const double n_left = static_cast<double>(pos + 1);
      const double n_right = static_cast<double>(n - pos - 1);
      const double score = scaled_gini(n_left, left_sq) + scaled_gini(n_right, right_sq);
      if (!best.found || score < best.weighted_impurity) {
        double t = lo + (hi - lo) / 2.0;
        if (!(t < hi)) t = lo;  // adjacent doubles
        best = SplitChoice{true, f, t, score};
      }
    }
  }
  return best;
}

namespace {

struct Builder {
  const PointSet& x;
  std::span<const std::size_t> labels;
  std::size_t n_classes;
  TreeOptions options;
  DecisionTree tree;

  std::size_t build(std::vector<std::size_t> indices, std::size_t depth) {
    const std::size_t id = tree.nodes.size();
    tree.nodes.emplace_back();
    {
      TreeNode& node = tree.nodes[id];
      node.depth = depth;
      node.class_counts.assign(n_classes, 0);
      for (std::size_t i : indices) ++node.class_counts[labels[i]];
      node.label = static_cast<std::size_t>(
          std::max_element(node.class_counts.begin(), node.class_counts.end()) -
          node.class_counts.begin());
      node.impurity = gini(node.class_counts);
    }
    const TreeNode& node = tree.nodes[id];
    if (node.impurity == 0.0 || depth >= options.max_depth ||
        indices.size() < options.min_samples_split) {
      return id;
    }
    const auto split = best_split(x, labels, indices, n_classes);
    if (!split.found) return id;

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    for (std::size_t i : indices) {
      (x.values[i * x.dim + split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    const std::size_t left = build(std::move(left_idx), depth + 1);
    const std::size_t right = build(std::move(right_idx), depth + 1);
    TreeNode& parent = tree.nodes[id];
    parent.leaf = false;
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left;
    parent.right = right;
    return id;
  }
};

}  // namespace

DecisionTree tree_fit(const PointSet& x, std::span<const std::size_t> labels,
                      const TreeOptions& options) {
  if (x.size() == 0) throw std::invalid_argument("tree_fit: empty training set");
  if (labels.size() != x.size()) throw std::invalid_argument("tree_fit: labels and points differ in length");
  const std::size_t n_classes = *std::max_element(labels.begin(), labels.end()) + 1;

  Builder b{x, labels, n_classes, options, {}};
  b.tree.dim = x.dim;
  b.tree.n_classes = n_classes;
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  b.build(std::move(all), 0);
  return std::move(b.tree);
}

std::size_t tree_leaf(const DecisionTree& tree, std::span<const double> x) {
  if (x.size() != tree.dim) throw std::invalid_argument("tree: dimension mismatch");
  std::size_t id = 0;
  while (!tree.nodes[id].leaf) {
    const auto& n = tree.nodes[id];
    id = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return id;
}

std::size_t tree_predict(const DecisionTree& tree, std::span<const double> x) {
  return tree.nodes[tree_leaf(tree, x)].label;
}

}  // namespace blueprint
