#include "blueprint/trajectory.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "blueprint/random.hpp"

namespace blueprint {

CollectionResult collect_counterfactuals(ExplorerEnv& env, const Policy& policy, int episodes,
                                         Rng& reset_rng) {
  CollectionResult result;
  for (int ep = 0; ep < episodes; ++ep) {
    double total = 0.0;
    for (auto& step : run_episode(env, policy, reset_rng)) {
      total += step.reward;
      if (step.reward > 0.0) {
        result.records.push_back(CounterfactualRecord{std::move(step.state), std::move(step.action),
                                                      std::move(step.next_state),
                                                      std::move(step.prev_output),
                                                      std::move(step.curr_output), step.reward});
      }
    }
    result.episode_rewards.push_back(total);
  }
  return result;
}

CollectionResult collect_counterfactuals(const AgentModel& model, ExplorerEnv& env, int episodes,
                                         std::uint64_t analysis_seed) {
  if (model.input_dim() != env.input_dim()) {
    throw std::invalid_argument("model input_dim does not match the system");
  }
  Rng reset_rng(derive_seed(analysis_seed, streams::analysis));
  const Policy policy = [&model](std::span<const double> s) {
    return predict_deterministic(model, s);
  };
  return collect_counterfactuals(env, policy, episodes, reset_rng);
}

Policy uniform_random_policy(std::size_t dim, double scale, Rng& rng) {
  return [dim, scale, &rng](std::span<const double>) {
    std::uniform_real_distribution<double> u(-scale, scale);
    InputVector a(dim);
    for (auto& v : a) v = u(rng);
    return a;
  };
}

// ---------------------------------------------------------------------------
// CSV

std::string quote_csv_field(const std::string& field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

std::string header_for(std::size_t dim) {
  std::string h;
  for (const char* prefix : {"state_", "action_", "next_state_"}) {
    for (std::size_t i = 0; i < dim; ++i) h += prefix + std::to_string(i) + ",";
  }
  return h + "prev_output,curr_output,reward";
}

OutputValue decode_output(const std::string& text, OutputKind kind, std::size_t line) {
  if (kind == OutputKind::label) return OutputValue::label(text);
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  const bool is_int = !text.empty() && ec == std::errc{} && ptr == last;
  if (is_int) return OutputValue::score(v);
  if (kind == OutputKind::score) throw CsvError("expected an integer output, got '" + text + "'", line);
  return OutputValue::label(text);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<CounterfactualRecord>& records,
               std::size_t dim) {
  if (!records.empty()) dim = records.front().state.size();
  out << header_for(dim) << '\n';
  for (const auto& r : records) {
    if (r.state.size() != dim || r.action.size() != dim || r.next_state.size() != dim) {
      throw std::invalid_argument("write_csv: records have inconsistent dimensions");
    }
    for (const auto* v : {&r.state, &r.action, &r.next_state}) {
      for (double x : *v) out << format_double(x) << ',';
    }
    out << quote_csv_field(r.prev_output.to_string()) << ','
        << quote_csv_field(r.curr_output.to_string()) << ',' << format_double(r.reward) << '\n';
  }
}

std::vector<CounterfactualRecord> read_csv(std::istream& in, OutputKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 6 || (header.size() - 3) % 3 != 0) throw CsvError("malformed header", 1);
  const std::size_t dim = (header.size() - 3) / 3;
  if (line != header_for(dim)) throw CsvError("unexpected header '" + line + "'", 1);

  std::vector<CounterfactualRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const std::invalid_argument& e) {
      throw CsvError(e.what(), line_no);
    }
    if (fields.size() != header.size()) {
      throw CsvError("expected " + std::to_string(header.size()) + " fields, got " +
                         std::to_string(fields.size()),
                     line_no);
    }
    auto number = [&](std::size_t idx) {
      try {
        return parse_double(fields[idx]);
      } catch (const std::invalid_argument& e) {
        throw CsvError(std::string("column ") + header[idx] + ": " + e.what(), line_no);
      }
    };
    CounterfactualRecord r;
    r.state.resize(dim);
    r.action.resize(dim);
    r.next_state.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      r.state[i] = number(i);
      r.action[i] = number(dim + i);
      r.next_state[i] = number(2 * dim + i);
    }
    r.prev_output = decode_output(fields[3 * dim], kind, line_no);
    r.curr_output = decode_output(fields[3 * dim + 1], kind, line_no);
    r.reward = number(3 * dim + 2);
    records.push_back(std::move(r));
  }
  return records;
}

void write_csv(const std::filesystem::path& path, const std::vector<CounterfactualRecord>& records,
               std::size_t dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(out, records, dim);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<CounterfactualRecord> read_csv(const std::filesystem::path& path, OutputKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_csv(in, kind);
}

}  // namespace blueprint
