#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace blueprint {

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

/// Generalized advantage estimation over a [n_steps x n_envs] rollout stored
/// time-major (index t * n_envs + e). `dones[i]` is nonzero when the episode
/// ended at that transition; `last_values` are V of the states following the
/// final step of each env.
AdvantageEstimate compute_gae(std::span<const double> rewards, std::span<const double> values,
                              std::span<const unsigned char> dones,
                              std::span<const double> last_values, std::size_t n_envs,
                              double gamma, double gae_lambda);

}  // namespace blueprint
