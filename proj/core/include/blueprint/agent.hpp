#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "blueprint/blackbox.hpp"
#include "blueprint/mlp.hpp"
#include "blueprint/random.hpp"

namespace blueprint {

/// Actor-critic over continuous perturbations: a diagonal Gaussian policy
/// whose mean comes from a tanh MLP and whose log standard deviation is a
/// free, state-independent vector, plus a separate tanh MLP value head.
///
/// Parameter buffer layout: [policy net | value net | log_std].
class AgentModel {
 public:
  AgentModel() = default;
  /// Orthogonally initialized model (gain sqrt(2) on hidden layers, 0.01 on
  /// the policy head, 1.0 on the value head; log_std = 0).
  AgentModel(std::size_t input_dim, std::size_t hidden_size, double action_scale,
             std::uint64_t seed);
  /// Same shapes with every parameter zero. Used when loading checkpoints.
  static AgentModel zeros(std::size_t input_dim, std::size_t hidden_size, double action_scale);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_size() const { return hidden_size_; }
  double action_scale() const { return action_scale_; }

  const Mlp& policy_net() const { return policy_net_; }
  const Mlp& value_net() const { return value_net_; }
  std::size_t log_std_offset() const { return log_std_offset_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::span<const double> log_std() const {
    return std::span<const double>(params_).subspan(log_std_offset_, input_dim_);
  }
  std::span<double> log_std() { return std::span<double>(params_).subspan(log_std_offset_, input_dim_); }

  bool all_finite() const;

  friend bool operator==(const AgentModel& a, const AgentModel& b) {
    return a.input_dim_ == b.input_dim_ && a.hidden_size_ == b.hidden_size_ &&
           a.action_scale_ == b.action_scale_ && a.params_ == b.params_;
  }

 private:
  void build_layout();

  std::size_t input_dim_ = 0;
  std::size_t hidden_size_ = 0;
  double action_scale_ = 1.0;
  Mlp policy_net_;
  Mlp value_net_;
  std::size_t log_std_offset_ = 0;
  std::vector<double> params_;
};

struct PolicyOutput {
  std::vector<double> mean;
  std::vector<double> log_std;
};

struct SampledAction {
  std::vector<double> action;  // raw sample; the env applies the magnitude cap
  double log_prob = 0.0;
};

PolicyOutput policy_forward(const AgentModel& model, std::span<const double> state);
double value_forward(const AgentModel& model, std::span<const double> state);

/// Draws a ~ Normal(mean, exp(log_std)) per component.
SampledAction sample_action(const AgentModel& model, std::span<const double> state, Rng& rng);

/// Policy mean clamped to [-action_scale, action_scale]; no sampling.
std::vector<double> predict_deterministic(const AgentModel& model, std::span<const double> state);

/// Sum over components of the diagonal Gaussian log density.
double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         std::span<const double> log_std);

/// Differential entropy of the diagonal Gaussian.
double gaussian_entropy(std::span<const double> log_std);

}  // namespace blueprint
