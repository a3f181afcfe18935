#include "blueprint/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "blueprint/env.hpp"
#include "blueprint/gae.hpp"

namespace blueprint {

void validate(const TrainConfig& c) {
  if (c.total_timesteps <= 0) throw ConfigError("nothing to train: total_timesteps must be positive");
  if (c.n_envs < 1) throw ConfigError("n_envs must be at least 1");
  if (c.n_steps < 1) throw ConfigError("n_steps must be at least 1");
  if (c.total_timesteps < c.rollout_size()) {
    throw ConfigError("total_timesteps must be at least n_envs * n_steps");
  }
  if (c.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (c.n_epochs < 1) throw ConfigError("n_epochs must be at least 1");
  if (c.hidden_size < 1) throw ConfigError("hidden_size must be at least 1");
  if (c.max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (!(c.learning_rate >= 0.0) || !(c.clip_range >= 0.0) || !(c.value_coef >= 0.0) ||
      !(c.entropy_coef >= 0.0) || !(c.max_grad_norm >= 0.0)) {
    throw ConfigError("learning_rate and loss coefficients must be non-negative");
  }
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(c.action_scale > 0.0)) throw ConfigError("action_scale must be positive");
}

std::int64_t planned_updates(const TrainConfig& c) {
  return (c.total_timesteps + c.rollout_size() - 1) / c.rollout_size();
}

RolloutBuffer::RolloutBuffer(std::size_t n_steps_, std::size_t n_envs_, std::size_t dim_)
    : n_steps(n_steps_),
      n_envs(n_envs_),
      dim(dim_),
      states(n_steps_ * n_envs_ * dim_),
      actions(n_steps_ * n_envs_ * dim_),
      log_probs(n_steps_ * n_envs_),
      rewards(n_steps_ * n_envs_),
      values(n_steps_ * n_envs_),
      dones(n_steps_ * n_envs_),
      advantages(n_steps_ * n_envs_),
      returns(n_steps_ * n_envs_) {}

void RolloutBuffer::compute_returns_and_advantages(std::span<const double> last_values,
                                                   double gamma, double gae_lambda) {
  auto est = compute_gae(rewards, values, dones, last_values, n_envs, gamma, gae_lambda);
  advantages = std::move(est.advantages);
  returns = std::move(est.returns);
}

Minibatch gather_minibatch(const RolloutBuffer& buffer, std::span<const std::size_t> indices) {
  Minibatch mb;
  mb.dim = buffer.dim;
  mb.states.reserve(indices.size() * buffer.dim);
  mb.actions.reserve(indices.size() * buffer.dim);
  for (std::size_t i : indices) {
    const auto s = buffer.state(i);
    const auto a = buffer.action(i);
    mb.states.insert(mb.states.end(), s.begin(), s.end());
    mb.actions.insert(mb.actions.end(), a.begin(), a.end());
    mb.old_log_probs.push_back(buffer.log_probs[i]);
    mb.advantages.push_back(buffer.advantages[i]);
    mb.returns.push_back(buffer.returns[i]);
  }
  const std::size_t n = mb.advantages.size();
  if (n > 1) {
    const double mean = std::accumulate(mb.advantages.begin(), mb.advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : mb.advantages) var += (a - mean) * (a - mean);
    const double std = std::sqrt(var / static_cast<double>(n - 1));
    for (double& a : mb.advantages) a = (a - mean) / (std + 1e-8);
  }
  return mb;
}

LossTerms ppo_loss(const AgentModel& model, const Minibatch& batch, const LossCoefficients& coefs,
                   std::vector<double>* grad) {
  const std::size_t n = batch.size();
  const std::size_t dim = batch.dim;
  if (n == 0) throw std::invalid_argument("ppo_loss: empty minibatch");
  const auto& params = model.params();
  const auto log_std = model.log_std();
  const double inv_n = 1.0 / static_cast<double>(n);

  if (grad) grad->assign(params.size(), 0.0);

  std::vector<double> inv_var(dim);
  for (std::size_t j = 0; j < dim; ++j) inv_var[j] = std::exp(-2.0 * log_std[j]);

  LossTerms terms;
  Mlp::Tape policy_tape;
  Mlp::Tape value_tape;
  std::vector<double> d_mean(dim);
  double d_value[1];

  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> s(batch.states.data() + i * dim, dim);
    const std::span<const double> a(batch.actions.data() + i * dim, dim);

    model.policy_net().forward(params, s, policy_tape);
    const auto& mean = policy_tape.layers.back();
    const double log_prob = gaussian_log_prob(a, mean, log_std);
    const double log_ratio = log_prob - batch.old_log_probs[i];
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages[i];
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - coefs.clip_range, 1.0 + coefs.clip_range) * adv;
    terms.policy_loss -= std::min(unclipped, clipped) * inv_n;
    if (std::abs(ratio - 1.0) > coefs.clip_range) terms.clip_fraction += inv_n;
    terms.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;

    model.value_net().forward(params, s, value_tape);
    const double v = value_tape.layers.back()[0];
    const double err = v - batch.returns[i];
    terms.value_loss += err * err * inv_n;

    if (!grad) continue;

    // The clipped branch is flat in the parameters, so only the unclipped
    // branch contributes when it is the active minimum.
    const double d_log_prob = unclipped <= clipped ? -adv * ratio * inv_n : 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = a[j] - mean[j];
      d_mean[j] = d_log_prob * diff * inv_var[j];
      (*grad)[model.log_std_offset() + j] += d_log_prob * (diff * diff * inv_var[j] - 1.0);
    }
    model.policy_net().backward(params, policy_tape, d_mean, *grad);

    d_value[0] = coefs.value_coef * 2.0 * err * inv_n;
    model.value_net().backward(params, value_tape, d_value, *grad);
  }

  terms.entropy = gaussian_entropy(log_std);
  terms.total = terms.policy_loss + coefs.value_coef * terms.value_loss -
                coefs.entropy_coef * terms.entropy;
  if (grad) {
    for (std::size_t j = 0; j < dim; ++j) (*grad)[model.log_std_offset() + j] -= coefs.entropy_coef;
  }
  return terms;
}

Adam::Adam(std::size_t n, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, double learning_rate) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("adam: size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step_size = learning_rate / c1;
  const double sqrt_c2 = std::sqrt(c2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= step_size * m_[i] / (std::sqrt(v_[i]) / sqrt_c2 + eps_);
  }
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / (norm + 1e-6);
    for (double& g : grad) g *= scale;
  }
  return norm;
}

UpdateStats ppo_update(AgentModel& model, Adam& optimizer, const RolloutBuffer& buffer,
                       const TrainConfig& config, Rng& rng) {
  const LossCoefficients coefs{config.clip_range, config.value_coef, config.entropy_coef};
  const std::size_t total = buffer.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(total);
  std::vector<double> grad;
  UpdateStats stats;

  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < total; start += batch) {
      const std::size_t len = std::min(batch, total - start);
      const auto mb = gather_minibatch(buffer, std::span(order).subspan(start, len));
      const auto terms = ppo_loss(model, mb, coefs, &grad);
      if (!std::isfinite(terms.total)) {
        std::ostringstream msg;
        msg << "non-finite PPO loss at epoch " << epoch << ", minibatch " << start / batch
            << " (policy " << terms.policy_loss << ", value " << terms.value_loss << ", entropy "
            << terms.entropy << ")";
        throw TrainingError(msg.str());
      }
      if (config.max_grad_norm > 0.0) clip_grad_norm(grad, config.max_grad_norm);
      optimizer.step(model.params(), grad, config.learning_rate);

      stats.policy_loss += terms.policy_loss;
      stats.value_loss += terms.value_loss;
      stats.entropy += terms.entropy;
      stats.clip_fraction += terms.clip_fraction;
      stats.approx_kl += terms.approx_kl;
      ++stats.minibatches;
    }
  }
  if (!model.all_finite()) throw TrainingError("non-finite parameter after PPO update");

  const double inv = 1.0 / static_cast<double>(stats.minibatches);
  stats.policy_loss *= inv;
  stats.value_loss *= inv;
  stats.entropy *= inv;
  stats.clip_fraction *= inv;
  stats.approx_kl *= inv;
  return stats;
}

std::string format_metrics_line(const RolloutMetrics& m) {
  std::ostringstream out;
  out << m.rollout_idx << ", " << m.timesteps << ", " << format_double(m.mean_ep_reward) << ", "
      << format_double(m.policy_loss) << ", " << format_double(m.value_loss);
  return out.str();
}

TrainResult train(const SystemPtr& system, const TrainConfig& config,
                  const MetricsCallback& on_rollout) {
  validate(config);
  const std::size_t n_envs = static_cast<std::size_t>(config.n_envs);
  const std::size_t n_steps = static_cast<std::size_t>(config.n_steps);
  const std::size_t dim = system->input_dim();

  TrainResult result;
  result.model = AgentModel(dim, static_cast<std::size_t>(config.hidden_size), config.action_scale,
                            derive_seed(config.seed, streams::model_init));
  AgentModel& model = result.model;
  Adam optimizer(model.params().size());
  Rng minibatch_rng(derive_seed(config.seed, streams::minibatch));

  std::vector<ExplorerEnv> envs;
  std::vector<Rng> reset_rngs;
  std::vector<Rng> noise_rngs;
  for (std::size_t e = 0; e < n_envs; ++e) {
    envs.emplace_back(system, config.action_scale, config.max_steps);
    reset_rngs.emplace_back(derive_seed(config.seed, streams::env_reset + e));
    noise_rngs.emplace_back(derive_seed(config.seed, streams::action_noise + e));
    envs.back().reset(reset_rngs.back());
  }
  std::vector<double> episode_reward(n_envs, 0.0);

  RolloutBuffer buffer(n_steps, n_envs, dim);
  std::vector<double> last_values(n_envs);
  std::int64_t timesteps = 0;

  for (std::int64_t rollout = 0; timesteps < config.total_timesteps; ++rollout) {
    double finished_reward = 0.0;
    std::size_t finished = 0;

    for (std::size_t t = 0; t < n_steps; ++t) {
      for (std::size_t e = 0; e < n_envs; ++e) {
        const std::size_t i = t * n_envs + e;
        const auto state = envs[e].state();
        const auto sampled = sample_action(model, state, noise_rngs[e]);
        const auto step = envs[e].step(sampled.action);

        std::copy(state.begin(), state.end(), buffer.states.begin() + i * dim);
        std::copy(sampled.action.begin(), sampled.action.end(), buffer.actions.begin() + i * dim);
        buffer.log_probs[i] = sampled.log_prob;
        buffer.values[i] = value_forward(model, state);
        buffer.rewards[i] = step.reward;
        buffer.dones[i] = step.done ? 1 : 0;

        episode_reward[e] += step.reward;
        if (step.done) {
          finished_reward += episode_reward[e];
          ++finished;
          episode_reward[e] = 0.0;
          envs[e].reset(reset_rngs[e]);
        }
      }
    }
    timesteps += config.rollout_size();

    for (std::size_t e = 0; e < n_envs; ++e) last_values[e] = value_forward(model, envs[e].state());
    buffer.compute_returns_and_advantages(last_values, config.gamma, config.gae_lambda);

    const auto stats = ppo_update(model, optimizer, buffer, config, minibatch_rng);

    RolloutMetrics m;
    m.rollout_idx = rollout;
    m.timesteps = timesteps;
    m.mean_ep_reward = finished ? finished_reward / static_cast<double>(finished)
                                : std::numeric_limits<double>::quiet_NaN();
    m.policy_loss = stats.policy_loss;
    m.value_loss = stats.value_loss;
    m.clip_fraction = stats.clip_fraction;
    result.metrics.push_back(m);
    if (on_rollout) on_rollout(m);
  }
  return result;
}

}  // namespace blueprint
