#include "blueprint/rules.hpp"

#include <gtest/gtest.h>

#include <random>

namespace blueprint {
namespace {

TreeNode split(std::size_t feature, double t, std::size_t left, std::size_t right, std::size_t depth) {
  TreeNode n;
  n.leaf = false;
  n.feature = feature;
  n.threshold = t;
  n.left = left;
  n.right = right;
  n.depth = depth;
  return n;
}

TreeNode leaf(std::size_t label, std::size_t depth, std::size_t support = 1) {
  TreeNode n;
  n.label = label;
  n.depth = depth;
  n.class_counts.assign(label + 1, 0);
  n.class_counts[label] = support;
  return n;
}

// Root near 4.96, nested splits near 4.92 and 4.89, four leaves.
DecisionTree single_boundary_tree() {
  DecisionTree t;
  t.dim = 1;
  t.n_classes = 4;
  t.nodes = {split(0, 4.9614, 1, 6, 0), split(0, 4.9187, 2, 5, 1), split(0, 4.8903, 3, 4, 2),
             leaf(3, 3, 12),            leaf(1, 3, 20),            leaf(0, 2, 9),
             leaf(2, 1, 34)};
  return t;
}

DecisionTree two_boundary_tree() {
  DecisionTree t;
  t.dim = 1;
  t.n_classes = 4;
  t.nodes = {split(0, 0.001, 1, 4, 0), split(0, -2.0849, 2, 3, 1), leaf(1, 2, 15), leaf(3, 2, 17),
             split(0, 2.0612, 5, 6, 1), leaf(0, 2, 16), leaf(2, 2, 17)};
  return t;
}

const std::vector<std::string> kNames1 = default_feature_names(1);

TEST(ExportText, SingleLeaf) {
  DecisionTree t;
  t.dim = 1;
  t.nodes = {leaf(2, 0)};
  EXPECT_EQ(export_text(t, kNames1), "|--- class: Cluster_2\n");
}

TEST(ExportText, SingleBoundaryLayoutIsByteExact) {
  const std::string expected =
      "|--- input_0 <= 4.96\n"
      "|   |--- input_0 <= 4.92\n"
      "|   |   |--- input_0 <= 4.89\n"
      "|   |   |   |--- class: Cluster_3\n"
      "|   |   |--- input_0 >  4.89\n"
      "|   |   |   |--- class: Cluster_1\n"
      "|   |--- input_0 >  4.92\n"
      "|   |   |--- class: Cluster_0\n"
      "|--- input_0 >  4.96\n"
      "|   |--- class: Cluster_2\n";
  EXPECT_EQ(export_text(single_boundary_tree(), kNames1), expected);
}

TEST(ExportText, TwoBoundaryLayoutIsByteExact) {
  const std::string expected =
      "|--- input_0 <= 0.00\n"
      "|   |--- input_0 <= -2.08\n"
      "|   |   |--- class: Cluster_1\n"
      "|   |--- input_0 >  -2.08\n"
      "|   |   |--- class: Cluster_3\n"
      "|--- input_0 >  0.00\n"
      "|   |--- input_0 <= 2.06\n"
      "|   |   |--- class: Cluster_0\n"
      "|   |--- input_0 >  2.06\n"
      "|   |   |--- class: Cluster_2\n";
  EXPECT_EQ(export_text(two_boundary_tree(), kNames1), expected);
}

TEST(ExportText, RequiresMatchingNames) {
  EXPECT_THROW(export_text(single_boundary_tree(), default_feature_names(2)), std::invalid_argument);
}

TEST(ParseExportText, RoundTripsStructure) {
  for (const auto& tree : {single_boundary_tree(), two_boundary_tree()}) {
    const auto text = export_text(tree, kNames1);
    const auto parsed = parse_export_text(text, kNames1);
    ASSERT_EQ(parsed.nodes.size(), tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      EXPECT_EQ(parsed.nodes[i].leaf, tree.nodes[i].leaf);
      EXPECT_EQ(parsed.nodes[i].left, tree.nodes[i].left);
      EXPECT_EQ(parsed.nodes[i].right, tree.nodes[i].right);
      if (tree.nodes[i].leaf) EXPECT_EQ(parsed.nodes[i].label, tree.nodes[i].label);
    }
    EXPECT_EQ(export_text(parsed, kNames1), text);
  }
}

TEST(ParseExportText, RejectsMalformedText) {
  EXPECT_THROW(parse_export_text("", kNames1), std::invalid_argument);
  EXPECT_THROW(parse_export_text("|--- input_0 <= 1.00\n", kNames1), std::invalid_argument);
  EXPECT_THROW(parse_export_text("|--- input_9 <= 1.00\n|   |--- class: Cluster_0\n", kNames1),
               std::invalid_argument);
  EXPECT_THROW(parse_export_text("+-- class: Cluster_0\n", kNames1), std::invalid_argument);
  EXPECT_THROW(parse_export_text("|--- class: Cluster_0\n|--- class: Cluster_1\n", kNames1),
               std::invalid_argument);
}

TEST(ExtractRules, FoldsToTightestInterval) {
  const auto set = extract_rules(single_boundary_tree(), kNames1);
  ASSERT_EQ(set.rules.size(), 4u);
  EXPECT_EQ(set.lines.size(), 10u);
  EXPECT_EQ(set.rules[0].condition_text(kNames1, false), "input_0 <= 4.89");
  EXPECT_EQ(set.rules[1].condition_text(kNames1, false), "input_0 > 4.89 AND input_0 <= 4.92");
  EXPECT_EQ(set.rules[2].condition_text(kNames1, false), "input_0 > 4.92 AND input_0 <= 4.96");
  EXPECT_EQ(set.rules[3].condition_text(kNames1, false), "input_0 > 4.96");
  EXPECT_EQ(set.rules[1].label, 1u);
  EXPECT_EQ(set.rules[1].support, 20u);
  EXPECT_EQ(set.rules[1].condition_text(kNames1, true), "input_0 > 4.8903 AND input_0 <= 4.9187");
}

TEST(ExtractRules, UnconditionalRule) {
  DecisionTree t;
  t.dim = 1;
  t.nodes = {leaf(0, 0, 5)};
  const auto set = extract_rules(t, kNames1);
  ASSERT_EQ(set.rules.size(), 1u);
  EXPECT_EQ(set.rules[0].condition_text(kNames1, false), "TRUE");
  EXPECT_EQ(set.to_tsv(kNames1), "rule\tclass\tsupport\tconditions\n0\tCluster_0\t5\tTRUE\n");
}

TEST(ExtractRules, TsvSidecar) {
  const auto set = extract_rules(two_boundary_tree(), kNames1);
  EXPECT_EQ(set.to_tsv(kNames1),
            "rule\tclass\tsupport\tconditions\n"
            "0\tCluster_1\t15\tinput_0 <= -2.0849\n"
            "1\tCluster_3\t17\tinput_0 > -2.0849 AND input_0 <= 0.001\n"
            "2\tCluster_0\t16\tinput_0 > 0.001 AND input_0 <= 2.0612\n"
            "3\tCluster_2\t17\tinput_0 > 2.0612\n");
}

// Random trees fitted on random data: the leaf rules partition the space and
// agree with tree_predict.
TEST(ExtractRules, RulesPartitionSpaceAndAgreeWithPrediction) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    PointSet x;
    x.dim = 2;
    std::vector<std::size_t> y;
    for (int i = 0; i < 60; ++i) {
      x.values.push_back(u(rng));
      x.values.push_back(u(rng));
      y.push_back(rng() % 4);
    }
    const auto tree = tree_fit(x, y, {4, 2});
    const auto names = default_feature_names(2);
    const auto set = extract_rules(tree, names);
    ASSERT_EQ(set.rules.size(), tree.leaf_count());
    for (int i = 0; i < 100; ++i) {
      const std::vector<double> p{u(rng), u(rng)};
      std::size_t hits = 0;
      std::size_t label = 0;
      for (const auto& r : set.rules) {
        if (r.matches(p)) {
          ++hits;
          label = r.label;
        }
      }
      ASSERT_EQ(hits, 1u);
      EXPECT_EQ(label, tree_predict(tree, p));
    }
    for (const auto& r : set.rules) {
      std::size_t prev = 0;
      for (std::size_t c = 0; c < r.conditions.size(); ++c) {
        if (c) EXPECT_GT(r.conditions[c].feature, prev);
        prev = r.conditions[c].feature;
      }
    }
  }
}

}  // namespace
}  // namespace blueprint
