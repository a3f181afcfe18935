#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace blueprint {

/// A point in a system's continuous input space.
using InputVector = std::vector<double>;

/// Categorical output of a black box.
struct Label {
  std::string text;
  friend bool operator==(const Label&, const Label&) = default;
};

/// Integer output of a black box.
struct Score {
  std::int64_t value = 0;
  friend bool operator==(const Score&, const Score&) = default;
};

/// Output of a black box. Equality is exact and a Label never equals a Score.
class OutputValue {
 public:
  OutputValue() = default;
  OutputValue(Label label) : value_(std::move(label)) {}
  OutputValue(Score score) : value_(score) {}

  static OutputValue label(std::string text) { return OutputValue(Label{std::move(text)}); }
  static OutputValue score(std::int64_t value) { return OutputValue(Score{value}); }

  bool is_label() const { return std::holds_alternative<Label>(value_); }
  bool is_score() const { return std::holds_alternative<Score>(value_); }
  const std::string& label_text() const { return std::get<Label>(value_).text; }
  std::int64_t score_value() const { return std::get<Score>(value_).value; }

  /// Label text, or the decimal rendering of a score.
  std::string to_string() const;

  friend bool operator==(const OutputValue&, const OutputValue&) = default;

 private:
  std::variant<Label, Score> value_;
};

/// Axis-aligned box of admissible inputs.
class Bounds {
 public:
  Bounds() = default;
  /// Throws std::invalid_argument unless sizes agree, are non-empty and low < high.
  Bounds(std::vector<double> low, std::vector<double> high);

  /// Same interval on every dimension.
  static Bounds uniform(std::size_t dim, double low, double high);

  std::size_t dim() const { return low_.size(); }
  const std::vector<double>& low() const { return low_; }
  const std::vector<double>& high() const { return high_; }

  bool contains(std::span<const double> x) const;
  InputVector clamp(std::span<const double> x) const;

 private:
  std::vector<double> low_;
  std::vector<double> high_;
};

/// Raised when a black box cannot produce an output.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what, std::string captured_output = {})
      : std::runtime_error(what), captured_output_(std::move(captured_output)) {}
  const std::string& captured_output() const { return captured_output_; }

 private:
  std::string captured_output_;
};

/// Opaque decision system. evaluate() must be deterministic and safe to call
/// from several threads at once.
class SystemUnderTest {
 public:
  virtual ~SystemUnderTest() = default;

  virtual const std::string& name() const = 0;
  virtual const Bounds& bounds() const = 0;
  std::size_t input_dim() const { return bounds().dim(); }

  /// Checks the dimension, then dispatches to do_evaluate.
  OutputValue evaluate(std::span<const double> x) const;

 protected:
  virtual OutputValue do_evaluate(std::span<const double> x) const = 0;
};

using SystemPtr = std::shared_ptr<const SystemUnderTest>;

/// Wraps an arbitrary callable as a system; handy for tests and embedding.
class FunctionSystem final : public SystemUnderTest {
 public:
  using Fn = std::function<OutputValue(std::span<const double>)>;
  FunctionSystem(std::string name, Bounds bounds, Fn fn)
      : name_(std::move(name)), bounds_(std::move(bounds)), fn_(std::move(fn)) {}

  const std::string& name() const override { return name_; }
  const Bounds& bounds() const override { return bounds_; }

 protected:
  OutputValue do_evaluate(std::span<const double> x) const override { return fn_(x); }

 private:
  std::string name_;
  Bounds bounds_;
  Fn fn_;
};

// Built-in dummy systems.

/// 1-D, [-10, 10]: "Category A" iff x0 <= 5.0, else "Category B".
SystemPtr make_system_1_threshold();
/// 2-D, [-5, 5]^2: "High" iff both positive, "Low" iff both negative, else "Medium".
SystemPtr make_system_2_combined();
/// 1-D, [-5, 5]: score 10 iff -2 < x0 < 2, else score 20.
SystemPtr make_system_3_nonlinear();

/// Names of the built-ins in listing order.
const std::vector<std::string>& builtin_system_names();
/// Throws std::invalid_argument for an unknown name.
SystemPtr make_builtin_system(const std::string& name);

enum class ParseMode { label, score };

/// Options for a system backed by an external executable. Each evaluation
/// spawns `command` with `arg_template` split on whitespace; every `{i}` in an
/// argument is replaced by the i-th input component as a shortest
/// round-trip decimal. Trimmed stdout is the output.
struct ExternalSystemOptions {
  std::string name = "external";
  std::string command;
  std::string arg_template;
  ParseMode parse_mode = ParseMode::label;
  Bounds bounds;
};

SystemPtr make_external_system(ExternalSystemOptions options);

/// Renders the argument vector for one evaluation (exposed for testing).
std::vector<std::string> render_arguments(const std::string& arg_template,
                                          std::span<const double> x);

/// Shortest decimal that parses back to exactly `value`.
std::string format_double(double value);
/// Strict full-string parse; throws std::invalid_argument.
double parse_double(std::string_view text);

}  // namespace blueprint
