#include "blueprint/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "blueprint/checkpoint.hpp"
#include "blueprint/env.hpp"

namespace blueprint {
namespace {

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    out.push_back(parse_real(key, b == std::string::npos ? "" : item.substr(b, e - b + 1)));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

struct Setting {
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T>
Setting integer(T PipelineConfig::*member) {
  return {[member](const PipelineConfig& c) { return std::to_string(c.*member); },
          [member](PipelineConfig& c, const std::string& v) { c.*member = parse_int<T>("", v); }};
}

template <typename T>
Setting train_integer(T TrainConfig::*member) {
  return {[member](const PipelineConfig& c) { return std::to_string(c.train.*member); },
          [member](PipelineConfig& c, const std::string& v) { c.train.*member = parse_int<T>("", v); }};
}

Setting train_real(double TrainConfig::*member) {
  return {[member](const PipelineConfig& c) { return format_double(c.train.*member); },
          [member](PipelineConfig& c, const std::string& v) { c.train.*member = parse_real("", v); }};
}

Setting text(std::string PipelineConfig::*member) {
  return {[member](const PipelineConfig& c) { return c.*member; },
          [member](PipelineConfig& c, const std::string& v) { c.*member = v; }};
}

Setting list(std::vector<double> PipelineConfig::*member) {
  return {[member](const PipelineConfig& c) { return join(c.*member); },
          [member](PipelineConfig& c, const std::string& v) { c.*member = parse_list("", v); }};
}

const std::vector<std::pair<std::string, Setting>>& settings() {
  static const std::vector<std::pair<std::string, Setting>> table = {
      {"system", text(&PipelineConfig::system)},
      {"seed", train_integer(&TrainConfig::seed)},
      {"out_dir",
       {[](const PipelineConfig& c) { return c.out_dir.string(); },
        [](PipelineConfig& c, const std::string& v) { c.out_dir = v; }}},
      {"total_timesteps", train_integer(&TrainConfig::total_timesteps)},
      {"n_envs", train_integer(&TrainConfig::n_envs)},
      {"n_steps", train_integer(&TrainConfig::n_steps)},
      {"batch_size", train_integer(&TrainConfig::batch_size)},
      {"n_epochs", train_integer(&TrainConfig::n_epochs)},
      {"learning_rate", train_real(&TrainConfig::learning_rate)},
      {"gamma", train_real(&TrainConfig::gamma)},
      {"gae_lambda", train_real(&TrainConfig::gae_lambda)},
      {"clip_range", train_real(&TrainConfig::clip_range)},
      {"value_coef", train_real(&TrainConfig::value_coef)},
      {"entropy_coef", train_real(&TrainConfig::entropy_coef)},
      {"max_grad_norm", train_real(&TrainConfig::max_grad_norm)},
      {"hidden_size", train_integer(&TrainConfig::hidden_size)},
      {"train_max_steps", train_integer(&TrainConfig::max_steps)},
      {"action_scale", train_real(&TrainConfig::action_scale)},
      {"analysis_episodes", integer(&PipelineConfig::analysis_episodes)},
      {"analysis_max_steps", integer(&PipelineConfig::analysis_max_steps)},
      {"n_clusters", integer(&PipelineConfig::n_clusters)},
      {"n_init", integer(&PipelineConfig::n_init)},
      {"kmeans_max_iter", integer(&PipelineConfig::kmeans_max_iter)},
      {"max_depth", integer(&PipelineConfig::max_depth)},
      {"external_name", text(&PipelineConfig::external_name)},
      {"external_command", text(&PipelineConfig::external_command)},
      {"external_args", text(&PipelineConfig::external_args)},
      {"external_parse", text(&PipelineConfig::external_parse)},
      {"external_low", list(&PipelineConfig::external_low)},
      {"external_high", list(&PipelineConfig::external_high)},
  };
  return table;
}

const Setting& find_setting(const std::string& key) {
  for (const auto& [k, s] : settings()) {
    if (k == key) return s;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

OutputKind output_kind_for(const PipelineConfig& config, const SystemUnderTest& system) {
  if (config.system == "external") {
    return config.external_parse == "score" ? OutputKind::score : OutputKind::label;
  }
  std::vector<double> probe(system.bounds().low());
  return system.evaluate(probe).is_score() ? OutputKind::score : OutputKind::label;
}

}  // namespace

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  const auto& s = find_setting(key);
  try {
    s.set(config, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + std::string(e.what()));
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, s] : settings()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::string get_setting(const PipelineConfig& config, const std::string& key) {
  return find_setting(key).get(config);
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

std::string serialize_config(const PipelineConfig& config) {
  std::string out;
  for (const auto& [key, s] : settings()) out += key + " = " + s.get(config) + "\n";
  return out;
}

SystemPtr make_system(const PipelineConfig& config) {
  if (config.system != "external") return make_builtin_system(config.system);
  ExternalSystemOptions opts;
  opts.name = config.external_name;
  opts.command = config.external_command;
  opts.arg_template = config.external_args;
  if (config.external_parse == "label") {
    opts.parse_mode = ParseMode::label;
  } else if (config.external_parse == "score") {
    opts.parse_mode = ParseMode::score;
  } else {
    throw ConfigError("external_parse must be 'label' or 'score'");
  }
  try {
    opts.bounds = Bounds(config.external_low, config.external_high);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("external bounds: ") + e.what());
  }
  return make_external_system(std::move(opts));
}

std::string system_name(const PipelineConfig& config) {
  return config.system == "external" ? config.external_name : config.system;
}

ArtifactPaths artifact_paths(const PipelineConfig& config) {
  const auto base = config.out_dir / system_name(config);
  auto with = [&](const char* suffix) { return std::filesystem::path(base.string() + suffix); };
  return ArtifactPaths{with("_model.ckpt"),       with("_metrics.log"),   with("_config.txt"),
                       with("_trajectories.csv"), with("_rules.txt"),     with("_rules.tsv"),
                       with("_clusters.csv"),     with("_report.txt")};
}

AnalysisResult analyze_records(const std::vector<CounterfactualRecord>& records, std::size_t dim,
                               const PipelineConfig& config) {
  AnalysisResult res;
  if (records.size() < config.n_clusters || records.empty()) return res;

  std::vector<double> values;
  values.reserve(records.size() * dim);
  for (const auto& r : records) values.insert(values.end(), r.state.begin(), r.state.end());
  const PointSet points(dim, std::move(values));

  KMeansOptions km;
  km.k = config.n_clusters;
  km.n_init = config.n_init;
  km.max_iter = config.kmeans_max_iter;
  km.seed = config.train.seed;
  res.kmeans = kmeans_fit(points, km);
  res.labels = assign_all(*res.kmeans, points);

  TreeOptions opts;
  opts.max_depth = config.max_depth ? config.max_depth : default_max_depth(dim);
  res.tree = tree_fit(points, res.labels, opts);
  res.rules = extract_rules(*res.tree, default_feature_names(dim));
  return res;
}

ValidationReport build_report(const SystemUnderTest& system,
                              const std::vector<CounterfactualRecord>& records,
                              const AnalysisResult& analysis,
                              const std::optional<std::filesystem::path>& plot_data) {
  ValidationReport rep;
  rep.system_name = system.name();
  rep.counterfactuals = records.size();
  rep.plot_data = plot_data;
  rep.rule_lines = analysis.rules.lines;

  const auto truth = ground_truth_for(system.name());
  rep.has_ground_truth = truth.has_value();
  if (!truth) return rep;

  rep.checks.push_back({"at least one counterfactual collected", !records.empty()});
  const auto straddle = validate_counterfactuals(records, *truth);
  rep.straddle_violations = straddle.violations.size();
  rep.checks.push_back({"straddle violations " + std::to_string(straddle.violations.size()) +
                            " / " + std::to_string(records.size()),
                        straddle.violations.empty()});
  rep.reevaluation_mismatches = reevaluation_mismatches(records, system).size();
  rep.checks.push_back({"logged outputs match re-evaluation", rep.reevaluation_mismatches == 0});

  if (analysis.tree) {
    rep.thresholds = recover_thresholds(*analysis.tree, *truth, kThresholdTolerance);
  }
  if (truth->gate_threshold_recovery) {
    if (!analysis.tree) {
      rep.checks.push_back({"decision tree fitted", false});
    }
    for (const auto& t : rep.thresholds) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "threshold %.1f recovered (err ≤ %.2f)", t.truth.value,
                    kThresholdTolerance);
      rep.checks.push_back({buf, t.pass});
    }
  }
  if (system.input_dim() == 2) {
    std::size_t sign_changes = 0;
    for (const auto& r : records) sign_changes += sign_change_or_touch(r.state, r.next_state);
    rep.checks.push_back({"every record changes sign or touches an axis",
                          sign_changes == records.size()});
    rep.checks.push_back({"at least 90% of records within 1.0 of an axis",
                          axis_concentration(records, 1.0) >= 0.9});
  }
  return rep;
}

int cmd_list_systems(std::ostream& out) {
  for (const auto& name : builtin_system_names()) {
    const auto sys = make_builtin_system(name);
    const auto& b = sys->bounds();
    out << name << " (" << sys->input_dim() << "-D, ";
    for (std::size_t i = 0; i < b.dim(); ++i) {
      out << (i ? " x " : "") << "[" << format_double(b.low()[i]) << "," << format_double(b.high()[i]) << "]";
    }
    out << ")\n";
  }
  return kSuccess;
}

int cmd_train(const PipelineConfig& config, std::ostream& log) {
  validate(config.train);
  const auto system = make_system(config);
  const auto paths = artifact_paths(config);
  std::filesystem::create_directories(config.out_dir);
  write_text(paths.config, serialize_config(config));

  std::ofstream metrics(paths.metrics, std::ios::binary);
  if (!metrics) throw std::runtime_error("cannot open '" + paths.metrics.string() + "'");
  metrics << "# rollout_idx, timesteps, mean_ep_reward, policy_loss, value_loss\n";

  log << "training " << system->name() << " for " << config.train.total_timesteps
      << " timesteps (" << planned_updates(config.train) << " updates)\n";
  auto result = train(system, config.train, [&](const RolloutMetrics& m) {
    metrics << format_metrics_line(m) << '\n';
    metrics.flush();
  });
  save_checkpoint(paths.model, Checkpoint{result.model, config.train});
  log << "saved " << paths.model.string() << "\n";
  return kSuccess;
}

int cmd_analyze(const PipelineConfig& config, std::ostream& log) {
  const auto system = make_system(config);
  const auto paths = artifact_paths(config);
  if (!std::filesystem::exists(paths.model)) {
    throw std::runtime_error("missing checkpoint '" + paths.model.string() + "'; run 'train' first");
  }
  const auto ckpt = load_checkpoint(paths.model);
  std::filesystem::create_directories(config.out_dir);

  ExplorerEnv env(system, ckpt.model.action_scale(), config.analysis_max_steps);
  const auto collected =
      collect_counterfactuals(ckpt.model, env, config.analysis_episodes, config.train.seed);
  const std::size_t dim = system->input_dim();
  write_csv(paths.trajectories, collected.records, dim);
  log << "collected " << collected.records.size() << " counterfactual transitions over "
      << config.analysis_episodes << " episodes -> " << paths.trajectories.string() << "\n";

  const auto analysis = analyze_records(collected.records, dim, config);
  if (!analysis.tree) {
    log << "notice: " << collected.records.size() << " counterfactuals is fewer than "
        << config.n_clusters << " clusters; clustering and rule extraction skipped\n";
    std::filesystem::remove(paths.rules_text);
    std::filesystem::remove(paths.rules_tsv);
    if (emit_cluster_plot_data(collected.records, nullptr, dim, paths.clusters)) {
      log << "wrote header-only " << paths.clusters.string() << "\n";
    }
    return kValidationFailure;
  }

  std::string rules_text;
  for (const auto& l : analysis.rules.lines) rules_text += l + "\n";
  write_text(paths.rules_text, rules_text);
  write_text(paths.rules_tsv, analysis.rules.to_tsv(default_feature_names(dim)));
  log << rules_text;
  if (emit_cluster_plot_data(collected.records, &*analysis.kmeans, dim, paths.clusters)) {
    log << "wrote " << paths.clusters.string() << "\n";
  } else {
    std::filesystem::remove(paths.clusters);
    log << "cluster plot data skipped (input is " << dim << "-D)\n";
  }
  return kSuccess;
}

int cmd_report(const PipelineConfig& config, std::ostream& log) {
  const auto system = make_system(config);
  const auto paths = artifact_paths(config);
  std::vector<CounterfactualRecord> records;
  try {
    records = read_csv(paths.trajectories, output_kind_for(config, *system));
  } catch (const CsvError& e) {
    throw std::runtime_error(paths.trajectories.string() + ": " + e.what());
  }
  const std::size_t dim = system->input_dim();
  for (const auto& r : records) {
    if (r.state.size() != dim) {
      throw std::runtime_error(paths.trajectories.string() + ": records do not match the system's dimension");
    }
  }
  const auto analysis = analyze_records(records, dim, config);
  std::optional<std::filesystem::path> plot;
  if (dim == 2 && std::filesystem::exists(paths.clusters)) plot = paths.clusters;

  const auto report = build_report(*system, records, analysis, plot);
  const std::string text = report.render();
  std::filesystem::create_directories(config.out_dir);
  write_text(paths.report, text);
  log << text;
  if (!report.has_ground_truth) return kSuccess;
  return report.passed() ? kSuccess : kValidationFailure;
}

int cmd_run(const PipelineConfig& config, std::ostream& log) {
  cmd_train(config, log);
  const int analyzed = cmd_analyze(config, log);
  const int reported = cmd_report(config, log);
  return std::max(analyzed, reported);
}

}  // namespace blueprint
