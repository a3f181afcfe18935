#include "blueprint/ppo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "ppo_gradcheck.hpp"

namespace blueprint {
namespace {

TEST(PpoLoss, AnalyticGradientMatchesFiniteDifferences) {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto res = testing::ppo_gradient_check(trial);
    EXPECT_LE(res.max_rel_error, 1e-4) << "trial " << trial << " (" << res.parameters << " params)";
  }
}

Minibatch on_policy_batch(const AgentModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Minibatch mb;
  mb.dim = model.input_dim();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(mb.dim);
    for (auto& v : s) v = 4.0 * u(rng);
    const auto smp = sample_action(model, s, rng);
    mb.states.insert(mb.states.end(), s.begin(), s.end());
    mb.actions.insert(mb.actions.end(), smp.action.begin(), smp.action.end());
    mb.old_log_probs.push_back(smp.log_prob);
    mb.advantages.push_back(u(rng));
    mb.returns.push_back(u(rng));
  }
  return mb;
}

TEST(PpoLoss, RatioIsOneBeforeAnyUpdate) {
  const AgentModel model(2, 16, 1.0, 3);
  const auto mb = on_policy_batch(model, 32, 4);
  const auto terms = ppo_loss(model, mb, {}, nullptr);
  const double mean_adv =
      std::accumulate(mb.advantages.begin(), mb.advantages.end(), 0.0) / mb.size();
  EXPECT_NEAR(terms.policy_loss, -mean_adv, 1e-12);
  EXPECT_EQ(terms.clip_fraction, 0.0);
  EXPECT_NEAR(terms.approx_kl, 0.0, 1e-12);
}

TEST(PpoLoss, TotalCombinesTerms) {
  const AgentModel model(1, 8, 1.0, 5);
  const auto mb = on_policy_batch(model, 10, 6);
  const LossCoefficients c{0.2, 0.7, 0.05};
  const auto t = ppo_loss(model, mb, c, nullptr);
  EXPECT_NEAR(t.total, t.policy_loss + 0.7 * t.value_loss - 0.05 * t.entropy, 1e-12);
  EXPECT_NEAR(t.entropy, gaussian_entropy(model.log_std()), 1e-12);
  double vl = 0.0;
  for (std::size_t i = 0; i < mb.size(); ++i) {
    const double d = value_forward(model, std::span(mb.states).subspan(i, 1)) - mb.returns[i];
    vl += d * d;
  }
  EXPECT_NEAR(t.value_loss, vl / mb.size(), 1e-12);
}

// With a zero-width clip window, the objective is flat whenever moving the
// ratio would take it further from 1, so those samples contribute no gradient.
TEST(PpoLoss, ZeroClipRangeOnlyPullsRatioTowardOne) {
  const AgentModel model(1, 4, 1.0, 8);
  const LossCoefficients c{0.0, 0.0, 0.0};
  Minibatch mb;
  mb.dim = 1;
  mb.states = {0.5};
  mb.actions = {0.2};
  mb.returns = {0.0};
  const auto pi = policy_forward(model, mb.states);
  const double logp = gaussian_log_prob(mb.actions, pi.mean, pi.log_std);
  std::vector<double> grad;

  mb.advantages = {1.0};
  mb.old_log_probs = {logp - 0.3};  // ratio > 1
  const auto above = ppo_loss(model, mb, c, &grad);
  EXPECT_EQ(above.clip_fraction, 1.0);
  for (double g : grad) EXPECT_EQ(g, 0.0);

  mb.old_log_probs = {logp + 0.3};  // ratio < 1: gradient raises the ratio
  ppo_loss(model, mb, c, &grad);
  AgentModel stepped = model;
  for (std::size_t k = 0; k < grad.size(); ++k) stepped.params()[k] -= 1e-3 * grad[k];
  const auto pi2 = policy_forward(stepped, mb.states);
  EXPECT_GT(gaussian_log_prob(mb.actions, pi2.mean, pi2.log_std), logp);
}

TEST(PpoLoss, NonFiniteInputGivesNonFiniteLoss) {
  const AgentModel model(1, 4, 1.0, 8);
  auto mb = on_policy_batch(model, 4, 1);
  mb.returns[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(std::isnan(ppo_loss(model, mb, {}, nullptr).total));
}

TEST(GatherMinibatch, StandardizesAdvantages) {
  RolloutBuffer buf(8, 2, 1);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf.states[i] = static_cast<double>(i);
    buf.advantages[i] = static_cast<double>(i * i) - 3.0;
  }
  const std::vector<std::size_t> idx{1, 4, 7, 9, 15};
  const auto mb = gather_minibatch(buf, idx);
  ASSERT_EQ(mb.size(), 5u);
  EXPECT_EQ(mb.states, (std::vector<double>{1, 4, 7, 9, 15}));
  const double mean = std::accumulate(mb.advantages.begin(), mb.advantages.end(), 0.0) / 5.0;
  double var = 0.0;
  for (double a : mb.advantages) var += (a - mean) * (a - mean);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(var / 4.0), 1.0, 1e-6);
}

TEST(GatherMinibatch, SingleSampleKeepsAdvantage) {
  RolloutBuffer buf(1, 1, 1);
  buf.advantages[0] = 2.5;
  const std::vector<std::size_t> idx{0};
  EXPECT_EQ(gather_minibatch(buf, idx).advantages[0], 2.5);
}

TEST(ClipGradNorm, ScalesOnlyWhenAboveLimit) {
  std::vector<double> g{3.0, 4.0};
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 10.0), 5.0);
  EXPECT_EQ(g, (std::vector<double>{3.0, 4.0}));
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 0.5), 5.0);
  EXPECT_NEAR(std::hypot(g[0], g[1]), 0.5, 1e-6);
  EXPECT_NEAR(g[0] / g[1], 0.75, 1e-15);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam adam(2);
  std::vector<double> p{1.0, -1.0};
  const std::vector<double> g{0.5, -2.0};
  adam.step(p, g, 0.1);
  // Bias-corrected first step is lr * g / (|g| + eps').
  EXPECT_NEAR(p[0], 0.9, 1e-4);
  EXPECT_NEAR(p[1], -0.9, 1e-4);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, MinimizesQuadratic) {
  Adam adam(3);
  std::vector<double> p{5.0, -3.0, 0.5};
  const std::vector<double> target{1.0, 2.0, -1.0};
  std::vector<double> g(3);
  for (int it = 0; it < 3000; ++it) {
    for (int i = 0; i < 3; ++i) g[i] = 2.0 * (p[i] - target[i]);
    adam.step(p, g, 0.05);
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], target[i], 1e-3);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(validate(c));
  c.total_timesteps = 0;
  try {
    validate(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("nothing to train"), std::string::npos);
  }
  c = TrainConfig{};
  c.gamma = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = TrainConfig{};
  c.gae_lambda = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = TrainConfig{};
  c.n_envs = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(TrainConfig, PlannedUpdates) {
  TrainConfig c;
  c.total_timesteps = 128;
  c.n_envs = 4;
  c.n_steps = 16;
  EXPECT_EQ(planned_updates(c), 2);
  c.total_timesteps = 129;
  EXPECT_EQ(planned_updates(c), 3);
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.total_timesteps = 128;
  c.n_envs = 4;
  c.n_steps = 16;
  c.batch_size = 16;
  c.n_epochs = 2;
  c.hidden_size = 8;
  c.max_steps = 10;
  c.seed = 11;
  return c;
}

TEST(Train, RunsPlannedRollouts) {
  std::vector<std::int64_t> seen;
  const auto res = train(make_system_1_threshold(), tiny_config(),
                         [&](const RolloutMetrics& m) { seen.push_back(m.timesteps); });
  EXPECT_EQ(seen, (std::vector<std::int64_t>{64, 128}));
  ASSERT_EQ(res.metrics.size(), 2u);
  EXPECT_EQ(res.metrics[1].rollout_idx, 1);
  for (const auto& m : res.metrics) {
    EXPECT_GE(m.clip_fraction, 0.0);
    EXPECT_LE(m.clip_fraction, 1.0);
    EXPECT_TRUE(std::isfinite(m.policy_loss));
    EXPECT_TRUE(std::isfinite(m.value_loss));
  }
  EXPECT_TRUE(res.model.all_finite());
}

TEST(Train, SeededRunsAreBitwiseIdentical) {
  const auto a = train(make_system_2_combined(), tiny_config());
  const auto b = train(make_system_2_combined(), tiny_config());
  EXPECT_TRUE(a.model == b.model);
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(format_metrics_line(a.metrics[i]), format_metrics_line(b.metrics[i]));
  }
  auto other = tiny_config();
  other.seed = 12;
  EXPECT_FALSE(a.model == train(make_system_2_combined(), other).model);
}

TEST(Train, ZeroTimestepsIsRejected) {
  auto c = tiny_config();
  c.total_timesteps = 0;
  EXPECT_THROW(train(make_system_1_threshold(), c), ConfigError);
}

TEST(PpoUpdate, NonFiniteLossAborts) {
  const auto c = tiny_config();
  AgentModel model(1, 8, 1.0, 2);
  Adam adam(model.params().size());
  RolloutBuffer buf(16, 4, 1);
  buf.returns[5] = std::numeric_limits<double>::infinity();
  Rng rng(1);
  EXPECT_THROW(ppo_update(model, adam, buf, c, rng), TrainingError);
}

TEST(PpoUpdate, ReportsStatsOverAllMinibatches) {
  const auto c = tiny_config();
  AgentModel model(1, 8, 1.0, 2);
  Adam adam(model.params().size());
  RolloutBuffer buf(16, 4, 1);
  Rng rng(1);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf.states[i] = static_cast<double>(i % 7) - 3.0;
    const auto smp = sample_action(model, buf.state(i), rng);
    buf.actions[i] = smp.action[0];
    buf.log_probs[i] = smp.log_prob;
    buf.advantages[i] = std::sin(static_cast<double>(i));
    buf.returns[i] = 0.1 * static_cast<double>(i % 5);
  }
  const auto stats = ppo_update(model, adam, buf, c, rng);
  EXPECT_EQ(stats.minibatches, 8u);  // 64 / 16 per epoch, 2 epochs
  EXPECT_EQ(adam.steps(), 8);
  EXPECT_GE(stats.clip_fraction, 0.0);
  EXPECT_LE(stats.clip_fraction, 1.0);
}

TEST(FormatMetricsLine, Layout) {
  RolloutMetrics m;
  m.rollout_idx = 3;
  m.timesteps = 4096;
  m.mean_ep_reward = 12.5;
  m.policy_loss = -0.25;
  m.value_loss = 1.0;
  EXPECT_EQ(format_metrics_line(m), "3, 4096, 12.5, -0.25, 1");
}

}  // namespace
}  // namespace blueprint
