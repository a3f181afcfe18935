#include "blueprint/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blueprint {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
}

AgentModel::AgentModel(std::size_t input_dim, std::size_t hidden_size, double action_scale,
                       std::uint64_t seed)
    : input_dim_(input_dim), hidden_size_(hidden_size), action_scale_(action_scale) {
  build_layout();
  Rng rng(seed);
  policy_net_.init_orthogonal(params_, std::numbers::sqrt2, 0.01, rng);
  value_net_.init_orthogonal(params_, std::numbers::sqrt2, 1.0, rng);
}

AgentModel AgentModel::zeros(std::size_t input_dim, std::size_t hidden_size, double action_scale) {
  AgentModel m;
  m.input_dim_ = input_dim;
  m.hidden_size_ = hidden_size;
  m.action_scale_ = action_scale;
  m.build_layout();
  return m;
}

void AgentModel::build_layout() {
  if (input_dim_ == 0 || hidden_size_ == 0) {
    throw std::invalid_argument("agent: input_dim and hidden_size must be positive");
  }
  if (!(action_scale_ > 0.0)) throw std::invalid_argument("agent: action_scale must be positive");
  policy_net_ = Mlp({input_dim_, hidden_size_, hidden_size_, input_dim_}, 0);
  value_net_ = Mlp({input_dim_, hidden_size_, hidden_size_, 1}, policy_net_.parameter_count());
  log_std_offset_ = value_net_.offset() + value_net_.parameter_count();
  params_.assign(log_std_offset_ + input_dim_, 0.0);
}

bool AgentModel::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

PolicyOutput policy_forward(const AgentModel& model, std::span<const double> state) {
  PolicyOutput out;
  out.mean = model.policy_net().forward(model.params(), state);
  out.log_std.assign(model.log_std().begin(), model.log_std().end());
  return out;
}

double value_forward(const AgentModel& model, std::span<const double> state) {
  return model.value_net().forward(model.params(), state)[0];
}

SampledAction sample_action(const AgentModel& model, std::span<const double> state, Rng& rng) {
  const auto pi = policy_forward(model, state);
  SampledAction s;
  s.action.resize(pi.mean.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < s.action.size(); ++i) {
    s.action[i] = pi.mean[i] + std::exp(pi.log_std[i]) * normal(rng);
  }
  s.log_prob = gaussian_log_prob(s.action, pi.mean, pi.log_std);
  return s;
}

std::vector<double> predict_deterministic(const AgentModel& model, std::span<const double> state) {
  auto mean = model.policy_net().forward(model.params(), state);
  for (auto& m : mean) m = std::clamp(m, -model.action_scale(), model.action_scale());
  return mean;
}

double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         std::span<const double> log_std) {
  double lp = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += ls + 0.5 + kHalfLog2Pi;
  return h;
}

}  // namespace blueprint
