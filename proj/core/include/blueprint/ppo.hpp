#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blueprint/agent.hpp"
#include "blueprint/blackbox.hpp"
#include "blueprint/random.hpp"

namespace blueprint {

struct TrainConfig {
  std::int64_t total_timesteps = 20000;
  int n_envs = 4;
  int n_steps = 2048;  // per env and rollout
  int batch_size = 64;
  int n_epochs = 10;
  double learning_rate = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_range = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  int hidden_size = 64;
  int max_steps = 100;  // episode length during training
  double action_scale = 1.0;
  std::uint64_t seed = 7;

  std::int64_t rollout_size() const { return static_cast<std::int64_t>(n_envs) * n_steps; }
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const TrainConfig& config);

/// Number of rollout/update phases train() will run.
std::int64_t planned_updates(const TrainConfig& config);

/// On-policy storage for one rollout, time-major: slot (t, e) is t * n_envs + e.
struct RolloutBuffer {
  RolloutBuffer(std::size_t n_steps, std::size_t n_envs, std::size_t dim);

  std::size_t size() const { return n_steps * n_envs; }
  std::span<const double> state(std::size_t i) const { return {states.data() + i * dim, dim}; }
  std::span<const double> action(std::size_t i) const { return {actions.data() + i * dim, dim}; }

  /// Fills advantages and returns by GAE.
  void compute_returns_and_advantages(std::span<const double> last_values, double gamma,
                                      double gae_lambda);

  std::size_t n_steps;
  std::size_t n_envs;
  std::size_t dim;
  std::vector<double> states;
  std::vector<double> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<unsigned char> dones;
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// A self-contained slice of a rollout; advantages are used as given.
struct Minibatch {
  std::size_t dim = 0;
  std::vector<double> states;  // n x dim
  std::vector<double> actions;  // n x dim
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return old_log_probs.size(); }
};

/// Builds a minibatch from buffer slots; advantages are standardized
/// ((a - mean) / (std + 1e-8), unbiased std) when more than one sample.
Minibatch gather_minibatch(const RolloutBuffer& buffer, std::span<const std::size_t> indices);

struct LossCoefficients {
  double clip_range = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
};

struct LossTerms {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

/// Clipped-surrogate PPO loss
///   policy + value_coef * value - entropy_coef * entropy
/// on one minibatch. When `grad` is non-null it is resized to the parameter
/// count and overwritten with the analytic gradient.
LossTerms ppo_loss(const AgentModel& model, const Minibatch& batch, const LossCoefficients& coefs,
                   std::vector<double>* grad);

/// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  explicit Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-5);
  void step(std::span<double> params, std::span<const double> grad, double learning_rate);
  std::int64_t steps() const { return t_; }

 private:
  double beta1_;
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Scales `grad` in place so its L2 norm is at most max_norm; returns the
/// norm before scaling.
double clip_grad_norm(std::span<double> grad, double max_norm);

struct UpdateStats {
  double policy_loss = 0.0;  // means over all minibatches of all epochs
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  std::size_t minibatches = 0;
};

/// Runs config.n_epochs passes of shuffled minibatch gradient steps.
/// Throws TrainingError when a loss or parameter becomes non-finite.
UpdateStats ppo_update(AgentModel& model, Adam& optimizer, const RolloutBuffer& buffer,
                       const TrainConfig& config, Rng& rng);

struct RolloutMetrics {
  std::int64_t rollout_idx = 0;
  std::int64_t timesteps = 0;
  double mean_ep_reward = 0.0;  // over episodes finished in this rollout; NaN if none
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
};

/// `rollout_idx, timesteps, mean_ep_reward, policy_loss, value_loss`
std::string format_metrics_line(const RolloutMetrics& m);

struct TrainResult {
  AgentModel model;
  std::vector<RolloutMetrics> metrics;
};

using MetricsCallback = std::function<void(const RolloutMetrics&)>;

/// Alternates rollout collection over config.n_envs environments and PPO
/// updates until total_timesteps transitions have been collected.
TrainResult train(const SystemPtr& system, const TrainConfig& config,
                  const MetricsCallback& on_rollout = {});

}  // namespace blueprint
