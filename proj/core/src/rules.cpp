#include "blueprint/rules.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "blueprint/blackbox.hpp"

namespace blueprint {

std::vector<std::string> default_feature_names(std::size_t dim) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim; ++i) names.push_back("input_" + std::to_string(i));
  return names;
}

namespace {

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void check_names(const DecisionTree& tree, std::span<const std::string> names) {
  if (names.size() != tree.dim) throw std::invalid_argument("feature_names length differs from tree dimension");
}

void render(const DecisionTree& tree, std::size_t id, std::size_t depth,
            std::span<const std::string> names, std::string& out) {
  std::string indent;
  for (std::size_t i = 0; i < depth; ++i) indent += "|   ";
  const auto& n = tree.nodes[id];
  if (n.leaf) {
    out += indent + "|--- class: Cluster_" + std::to_string(n.label) + "\n";
    return;
  }
  const std::string t = two_decimals(n.threshold);
  out += indent + "|--- " + names[n.feature] + " <= " + t + "\n";
  render(tree, n.left, depth + 1, names, out);
  out += indent + "|--- " + names[n.feature] + " >  " + t + "\n";
  render(tree, n.right, depth + 1, names, out);
}

void collect(const DecisionTree& tree, std::size_t id, std::vector<FeatureInterval> path,
             std::vector<Rule>& rules) {
  const auto& n = tree.nodes[id];
  if (n.leaf) {
    Rule r;
    r.conditions = std::move(path);
    r.label = n.label;
    for (auto c : n.class_counts) r.support += c;
    rules.push_back(std::move(r));
    return;
  }
  auto find = [](std::vector<FeatureInterval>& p, std::size_t f) -> FeatureInterval& {
    auto it = p.begin();
    while (it != p.end() && it->feature < f) ++it;
    if (it == p.end() || it->feature != f) it = p.insert(it, FeatureInterval{f, {}, {}});
    return *it;
  };
  auto left = path;
  auto& lc = find(left, n.feature);
  lc.upper = lc.upper ? std::min(*lc.upper, n.threshold) : n.threshold;
  collect(tree, n.left, std::move(left), rules);

  auto& rc = find(path, n.feature);
  rc.lower = rc.lower ? std::max(*rc.lower, n.threshold) : n.threshold;
  collect(tree, n.right, std::move(path), rules);
}

}  // namespace

std::string export_text(const DecisionTree& tree, std::span<const std::string> feature_names) {
  check_names(tree, feature_names);
  std::string out;
  render(tree, 0, 0, feature_names, out);
  return out;
}

bool Rule::matches(std::span<const double> x) const {
  for (const auto& c : conditions) {
    if (c.lower && !(x[c.feature] > *c.lower)) return false;
    if (c.upper && !(x[c.feature] <= *c.upper)) return false;
  }
  return true;
}

std::string Rule::condition_text(std::span<const std::string> names, bool full_precision) const {
  auto fmt = [&](double v) { return full_precision ? format_double(v) : two_decimals(v); };
  std::string out;
  for (const auto& c : conditions) {
    if (c.lower) out += (out.empty() ? "" : " AND ") + names[c.feature] + " > " + fmt(*c.lower);
    if (c.upper) out += (out.empty() ? "" : " AND ") + names[c.feature] + " <= " + fmt(*c.upper);
  }
  return out.empty() ? "TRUE" : out;
}

std::string RuleSet::to_tsv(std::span<const std::string> feature_names) const {
  std::string out = "rule\tclass\tsupport\tconditions\n";
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    out += std::to_string(i) + "\tCluster_" + std::to_string(r.label) + "\t" +
           std::to_string(r.support) + "\t" + r.condition_text(feature_names, true) + "\n";
  }
  return out;
}

RuleSet extract_rules(const DecisionTree& tree, std::span<const std::string> feature_names) {
  check_names(tree, feature_names);
  RuleSet set;
  std::istringstream text(export_text(tree, feature_names));
  for (std::string line; std::getline(text, line);) set.lines.push_back(line);
  collect(tree, 0, {}, set.rules);
  return set;
}

DecisionTree parse_export_text(const std::string& text, std::span<const std::string> feature_names) {
  struct Line {
    std::size_t depth;
    std::string body;
  };
  std::vector<Line> lines;
  std::istringstream in(text);
  for (std::string raw; std::getline(in, raw);) {
    if (raw.empty()) continue;
    std::size_t depth = 0;
    std::size_t pos = 0;
    while (raw.compare(pos, 4, "|   ") == 0) {
      ++depth;
      pos += 4;
    }
    if (raw.compare(pos, 5, "|--- ") != 0) throw std::invalid_argument("malformed rule line: " + raw);
    lines.push_back({depth, raw.substr(pos + 5)});
  }
  if (lines.empty()) throw std::invalid_argument("empty rule text");

  DecisionTree tree;
  tree.dim = feature_names.size();
  std::size_t cursor = 0;

  auto feature_of = [&](const std::string& name) {
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
      if (feature_names[f] == name) return f;
    }
    throw std::invalid_argument("unknown feature '" + name + "'");
  };

  // Recursive descent over the pre-order listing.
  auto parse = [&](auto& self, std::size_t depth) -> std::size_t {
    if (cursor >= lines.size() || lines[cursor].depth != depth) {
      throw std::invalid_argument("rule text ends early or is mis-indented");
    }
    const std::string body = lines[cursor++].body;
    const std::size_t id = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes[id].depth = depth;

    const std::string cls = "class: Cluster_";
    if (body.rfind(cls, 0) == 0) {
      tree.nodes[id].label = std::stoul(body.substr(cls.size()));
      tree.n_classes = std::max(tree.n_classes, tree.nodes[id].label + 1);
      return id;
    }
    const auto le = body.find(" <= ");
    if (le == std::string::npos) throw std::invalid_argument("expected a '<=' split: " + body);
    const std::size_t feature = feature_of(body.substr(0, le));
    const std::string threshold = body.substr(le + 4);
    const std::size_t left = self(self, depth + 1);

    const std::string expected = feature_names[feature] + " >  " + threshold;
    if (cursor >= lines.size() || lines[cursor].depth != depth || lines[cursor].body != expected) {
      throw std::invalid_argument("missing matching '>' branch for: " + body);
    }
    ++cursor;
    const std::size_t right = self(self, depth + 1);
    auto& node = tree.nodes[id];
    node.leaf = false;
    node.feature = feature;
    node.threshold = parse_double(threshold);
    node.left = left;
    node.right = right;
    return id;
  };
  parse(parse, 0);
  if (cursor != lines.size()) throw std::invalid_argument("trailing lines after the tree");
  return tree;
}

}  // namespace blueprint
