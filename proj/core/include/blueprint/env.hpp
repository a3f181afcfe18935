#pragma once

#include <functional>
#include <span>
#include <vector>

#include "blueprint/blackbox.hpp"
#include "blueprint/random.hpp"

namespace blueprint {

struct StepResult {
  InputVector state;       // before the step
  InputVector action;      // applied perturbation, after the per-component cap
  InputVector next_state;  // clamp(state + action, bounds)
  double reward = 0.0;     // 1.0 iff prev_output != curr_output
  bool done = false;
  OutputValue prev_output;
  OutputValue curr_output;
};

/// Episodic exploration MDP over a system's input box. The reward is 1 when
/// a step changes the black box's output and 0 otherwise; episodes last
/// exactly max_steps steps.
class ExplorerEnv {
 public:
  ExplorerEnv(SystemPtr system, double action_scale, int max_steps);

  /// Uniform draw over the bounds box.
  const InputVector& reset(Rng& rng);
  /// Starts an episode from a given in-bounds state.
  const InputVector& reset_to(std::span<const double> state);

  /// Throws std::invalid_argument on dimension mismatch and std::logic_error
  /// when called before reset or after the episode finished.
  StepResult step(std::span<const double> action);

  const SystemUnderTest& system() const { return *system_; }
  const SystemPtr& system_ptr() const { return system_; }
  const Bounds& bounds() const { return system_->bounds(); }
  std::size_t input_dim() const { return system_->input_dim(); }
  double action_scale() const { return action_scale_; }
  int max_steps() const { return max_steps_; }
  const InputVector& state() const { return state_; }
  const OutputValue& last_output() const { return last_output_; }
  int step_count() const { return step_count_; }

 private:
  SystemPtr system_;
  double action_scale_;
  int max_steps_;
  InputVector state_;
  OutputValue last_output_;
  int step_count_ = 0;
  bool started_ = false;
};

using Policy = std::function<InputVector(std::span<const double> state)>;

/// Resets, then steps `policy` until the episode ends.
std::vector<StepResult> run_episode(ExplorerEnv& env, const Policy& policy, Rng& rng);

}  // namespace blueprint
