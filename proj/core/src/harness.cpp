#include "blueprint/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace blueprint {

namespace {

const char* region(std::span<const double> x) {
  if (x[0] > 0.0 && x[1] > 0.0) return "high";
  if (x[0] < 0.0 && x[1] < 0.0) return "low";
  return "medium";
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::optional<GroundTruth> ground_truth_for(const std::string& name) {
  GroundTruth gt;
  gt.system_name = name;
  if (name == "system_1_threshold") {
    gt.boundaries = {{0, 5.0}};
    gt.crosses = [](std::span<const double> a, std::span<const double> b) {
      return (a[0] <= 5.0) != (b[0] <= 5.0);
    };
    return gt;
  }
  if (name == "system_3_nonlinear") {
    gt.boundaries = {{0, -2.0}, {0, 2.0}};
    gt.crosses = [](std::span<const double> a, std::span<const double> b) {
      auto inside = [](double v) { return v > -2.0 && v < 2.0; };
      return inside(a[0]) != inside(b[0]);
    };
    return gt;
  }
  if (name == "system_2_combined") {
    gt.boundaries = {{0, 0.0}, {1, 0.0}};
    gt.gate_threshold_recovery = false;
    gt.crosses = [](std::span<const double> a, std::span<const double> b) {
      return std::string_view(region(a)) != region(b);
    };
    return gt;
  }
  return std::nullopt;
}

StraddleReport validate_counterfactuals(std::span<const CounterfactualRecord> records,
                                        const GroundTruth& truth) {
  StraddleReport rep;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ++rep.checked;
    if (!truth.crosses(records[i].state, records[i].next_state)) rep.violations.push_back(i);
  }
  return rep;
}

std::vector<std::size_t> reevaluation_mismatches(std::span<const CounterfactualRecord> records,
                                                 const SystemUnderTest& system) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (system.evaluate(r.state) != r.prev_output || system.evaluate(r.next_state) != r.curr_output) {
      bad.push_back(i);
    }
  }
  return bad;
}

bool sign_change_or_touch(std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] * b[i] <= 0.0) return true;
  }
  return false;
}

double axis_concentration(std::span<const CounterfactualRecord> records, double radius) {
  if (records.empty()) return 1.0;
  auto near_axis = [radius](std::span<const double> x) {
    return std::any_of(x.begin(), x.end(), [radius](double v) { return std::abs(v) <= radius; });
  };
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (near_axis(r.state) && near_axis(r.next_state)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

std::vector<ThresholdRecovery> recover_thresholds(const DecisionTree& tree, const GroundTruth& truth,
                                                  double tolerance) {
  const auto splits = tree.splits();
  std::vector<ThresholdRecovery> out;
  for (const auto& b : truth.boundaries) {
    ThresholdRecovery rec;
    rec.truth = b;
    for (const auto& [feature, t] : splits) {
      if (feature != b.feature) continue;
      if (!rec.best_split || std::abs(t - b.value) < std::abs(*rec.best_split - b.value)) {
        rec.best_split = t;
      }
    }
    if (!rec.best_split) {
      rec.diagnostic = "no split on input_" + std::to_string(b.feature);
    } else {
      rec.abs_error = std::abs(*rec.best_split - b.value);
      rec.pass = rec.abs_error <= tolerance;
    }
    out.push_back(rec);
  }
  return out;
}

bool emit_cluster_plot_data(std::span<const CounterfactualRecord> records, const KMeansModel* model,
                            std::size_t dim, const std::filesystem::path& path) {
  if (dim != 2) return false;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "x0,x1,cluster\n";
  if (model && !records.empty()) {
    for (const auto& r : records) {
      out << format_double(r.state[0]) << ',' << format_double(r.state[1]) << ','
          << assign(*model, r.state) << '\n';
    }
    out << "centroid,cx0,cx1,cluster\n";
    for (std::size_t j = 0; j < model->k; ++j) {
      const auto c = model->centroid(j);
      out << "centroid," << format_double(c[0]) << ',' << format_double(c[1]) << ',' << j << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
  return true;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ReportCheck& c) { return c.pass; });
}

std::string ValidationReport::render() const {
  std::string out;
  out += "system: " + system_name + "\n";
  out += "counterfactuals: " + std::to_string(counterfactuals) + "\n";
  if (!has_ground_truth) {
    out += "validation: N/A (no ground truth for this system)\n";
  } else {
    for (const auto& t : thresholds) {
      out += "split nearest input_" + std::to_string(t.truth.feature) + " = " + fixed(t.truth.value, 1) + ": ";
      out += t.best_split ? fixed(*t.best_split, 4) + " (abs error " + fixed(t.abs_error, 4) + ")"
                          : t.diagnostic;
      out += "\n";
    }
  }
  out += "cluster plot data: " + (plot_data ? plot_data->filename().string() : std::string("skipped (input is not 2-D)")) + "\n";
  if (!checks.empty()) {
    out += "\nchecks:\n";
    for (const auto& c : checks) out += "  " + c.description + ": " + (c.pass ? "PASS" : "FAIL") + "\n";
  }
  out += "\nrules:\n";
  for (const auto& l : rule_lines) out += l + "\n";
  out += "\nresult: ";
  out += !has_ground_truth ? "RULES ONLY" : (passed() ? "PASS" : "FAIL");
  out += "\n";
  return out;
}

}  // namespace blueprint
