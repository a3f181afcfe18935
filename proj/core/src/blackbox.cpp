#include "blueprint/blackbox.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace blueprint {

std::string OutputValue::to_string() const {
  if (is_label()) return label_text();
  return std::to_string(score_value());
}

Bounds::Bounds(std::vector<double> low, std::vector<double> high)
    : low_(std::move(low)), high_(std::move(high)) {
  if (low_.empty() || low_.size() != high_.size()) {
    throw std::invalid_argument("bounds: low/high must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < low_.size(); ++i) {
    if (!std::isfinite(low_[i]) || !std::isfinite(high_[i]) || !(low_[i] < high_[i])) {
      std::ostringstream msg;
      msg << "bounds: dimension " << i << " needs finite low < high";
      throw std::invalid_argument(msg.str());
    }
  }
}

Bounds Bounds::uniform(std::size_t dim, double low, double high) {
  return Bounds(std::vector<double>(dim, low), std::vector<double>(dim, high));
}

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= low_[i] && x[i] <= high_[i])) return false;
  }
  return true;
}

InputVector Bounds::clamp(std::span<const double> x) const {
  InputVector out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size() && i < dim(); ++i) {
    out[i] = std::clamp(out[i], low_[i], high_[i]);
  }
  return out;
}

OutputValue SystemUnderTest::evaluate(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    std::ostringstream msg;
    msg << name() << ": expected " << input_dim() << " input components, got " << x.size();
    throw std::invalid_argument(msg.str());
  }
  return do_evaluate(x);
}

SystemPtr make_system_1_threshold() {
  return std::make_shared<FunctionSystem>(
      "system_1_threshold", Bounds::uniform(1, -10.0, 10.0), [](std::span<const double> x) {
        return x[0] <= 5.0 ? OutputValue::label("Category A") : OutputValue::label("Category B");
      });
}

SystemPtr make_system_2_combined() {
  return std::make_shared<FunctionSystem>(
      "system_2_combined", Bounds::uniform(2, -5.0, 5.0), [](std::span<const double> x) {
        if (x[0] > 0.0 && x[1] > 0.0) return OutputValue::label("High");
        if (x[0] < 0.0 && x[1] < 0.0) return OutputValue::label("Low");
        return OutputValue::label("Medium");
      });
}

SystemPtr make_system_3_nonlinear() {
  return std::make_shared<FunctionSystem>(
      "system_3_nonlinear", Bounds::uniform(1, -5.0, 5.0), [](std::span<const double> x) {
        return (x[0] > -2.0 && x[0] < 2.0) ? OutputValue::score(10) : OutputValue::score(20);
      });
}

const std::vector<std::string>& builtin_system_names() {
  static const std::vector<std::string> names = {"system_1_threshold", "system_2_combined",
                                                 "system_3_nonlinear"};
  return names;
}

SystemPtr make_builtin_system(const std::string& name) {
  if (name == "system_1_threshold") return make_system_1_threshold();
  if (name == "system_2_combined") return make_system_2_combined();
  if (name == "system_3_nonlinear") return make_system_3_nonlinear();
  throw std::invalid_argument("unknown built-in system: " + name);
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace blueprint
