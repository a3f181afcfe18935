#include "blueprint/gae.hpp"

#include <stdexcept>

namespace blueprint {

AdvantageEstimate compute_gae(std::span<const double> rewards, std::span<const double> values,
                              std::span<const unsigned char> dones,
                              std::span<const double> last_values, std::size_t n_envs,
                              double gamma, double gae_lambda) {
  if (n_envs == 0 || rewards.size() % n_envs != 0 || values.size() != rewards.size() ||
      dones.size() != rewards.size() || last_values.size() != n_envs) {
    throw std::invalid_argument("compute_gae: misaligned shapes");
  }
  const std::size_t n_steps = rewards.size() / n_envs;
  AdvantageEstimate est;
  est.advantages.assign(rewards.size(), 0.0);
  est.returns.assign(rewards.size(), 0.0);

  for (std::size_t e = 0; e < n_envs; ++e) {
    double running = 0.0;
    for (std::size_t t = n_steps; t-- > 0;) {
      const std::size_t i = t * n_envs + e;
      const double next_value = t + 1 < n_steps ? values[i + n_envs] : last_values[e];
      const double live = dones[i] ? 0.0 : 1.0;
      const double delta = rewards[i] + gamma * next_value * live - values[i];
      running = delta + gamma * gae_lambda * live * running;
      est.advantages[i] = running;
      est.returns[i] = running + values[i];
    }
  }
  return est;
}

}  // namespace blueprint
