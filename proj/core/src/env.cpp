#include "blueprint/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blueprint {

ExplorerEnv::ExplorerEnv(SystemPtr system, double action_scale, int max_steps)
    : system_(std::move(system)), action_scale_(action_scale), max_steps_(max_steps) {
  if (!system_) throw std::invalid_argument("env: null system");
  if (!(action_scale_ > 0.0)) throw std::invalid_argument("env: action_scale must be positive");
  if (max_steps_ < 1) throw std::invalid_argument("env: max_steps must be at least 1");
}

const InputVector& ExplorerEnv::reset(Rng& rng) {
  const auto& b = bounds();
  InputVector x(b.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::uniform_real_distribution<double>(b.low()[i], b.high()[i])(rng);
  }
  return reset_to(x);
}

const InputVector& ExplorerEnv::reset_to(std::span<const double> state) {
  if (state.size() != input_dim()) throw std::invalid_argument("env: reset state has wrong dimension");
  state_ = bounds().clamp(state);
  last_output_ = system_->evaluate(state_);
  step_count_ = 0;
  started_ = true;
  return state_;
}

StepResult ExplorerEnv::step(std::span<const double> action) {
  if (!started_) throw std::logic_error("env: step before reset");
  if (step_count_ >= max_steps_) throw std::logic_error("env: step after episode end");
  if (action.size() != input_dim()) {
    std::ostringstream msg;
    msg << "env: action has " << action.size() << " components, expected " << input_dim();
    throw std::invalid_argument(msg.str());
  }

  StepResult r;
  r.state = state_;
  r.action.resize(action.size());
  InputVector moved(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!std::isfinite(action[i])) throw std::invalid_argument("env: non-finite action");
    r.action[i] = std::clamp(action[i], -action_scale_, action_scale_);
    moved[i] = state_[i] + r.action[i];
  }
  r.next_state = bounds().clamp(moved);
  r.prev_output = last_output_;
  r.curr_output = system_->evaluate(r.next_state);
  r.reward = r.prev_output == r.curr_output ? 0.0 : 1.0;

  state_ = r.next_state;
  last_output_ = r.curr_output;
  ++step_count_;
  r.done = step_count_ >= max_steps_;
  return r;
}

std::vector<StepResult> run_episode(ExplorerEnv& env, const Policy& policy, Rng& rng) {
  std::vector<StepResult> results;
  results.reserve(static_cast<std::size_t>(env.max_steps()));
  env.reset(rng);
  for (;;) {
    results.push_back(env.step(policy(env.state())));
    if (results.back().done) break;
  }
  return results;
}

}  // namespace blueprint
