#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "blueprint/agent.hpp"
#include "blueprint/env.hpp"

namespace blueprint {

/// A logged transition [s, a, s', y_prev, y_curr, r] whose step changed the
/// black box's output. `action` is the applied (capped) perturbation, so
/// next_state == bounds.clamp(state + action).
struct CounterfactualRecord {
  InputVector state;
  InputVector action;
  InputVector next_state;
  OutputValue prev_output;
  OutputValue curr_output;
  double reward = 0.0;

  friend bool operator==(const CounterfactualRecord&, const CounterfactualRecord&) = default;
};

struct CollectionResult {
  std::vector<CounterfactualRecord> records;  // in (episode, step) order
  std::vector<double> episode_rewards;
};

/// Runs `episodes` episodes of `policy` on `env`, resetting from `reset_rng`,
/// and keeps every transition with positive reward.
CollectionResult collect_counterfactuals(ExplorerEnv& env, const Policy& policy, int episodes,
                                         Rng& reset_rng);

/// Deterministic-policy collection with a dedicated reset stream derived from
/// `analysis_seed`.
CollectionResult collect_counterfactuals(const AgentModel& model, ExplorerEnv& env, int episodes,
                                         std::uint64_t analysis_seed);

/// Uniform perturbations in [-scale, scale] per component drawn from `rng`.
Policy uniform_random_policy(std::size_t dim, double scale, Rng& rng);

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// How output columns are decoded when reading.
enum class OutputKind {
  infer,  // integers become scores, anything else a label
  label,
  score,
};

/// Header `state_0..,action_0..,next_state_0..,prev_output,curr_output,reward`
/// (dimension taken from the first record, or `dim` for an empty list).
void write_csv(std::ostream& out, const std::vector<CounterfactualRecord>& records,
               std::size_t dim);
std::vector<CounterfactualRecord> read_csv(std::istream& in, OutputKind kind = OutputKind::infer);

void write_csv(const std::filesystem::path& path, const std::vector<CounterfactualRecord>& records,
               std::size_t dim);
std::vector<CounterfactualRecord> read_csv(const std::filesystem::path& path,
                                           OutputKind kind = OutputKind::infer);

/// Splits one CSV line honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);
/// Quotes a field when it contains separators, quotes or surrounding blanks.
std::string quote_csv_field(const std::string& field);

}  // namespace blueprint
