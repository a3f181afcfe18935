#include "blueprint/checkpoint.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

namespace blueprint {
namespace {

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config.total_timesteps = 512;
  c.config.n_steps = 32;
  c.config.learning_rate = 1e-3;
  c.config.hidden_size = 6;
  c.config.action_scale = 0.75;
  c.config.seed = 18446744073709551615ull;
  c.model = AgentModel(2, 6, 0.75, 99);
  c.model.log_std()[1] = -0.123456789012345;
  return c;
}

std::string serialize(const Checkpoint& c) {
  std::ostringstream out;
  write_checkpoint(out, c);
  return out.str();
}

Checkpoint parse(const std::string& text) {
  std::istringstream in(text);
  return read_checkpoint(in);
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto original = sample_checkpoint();
  const auto text = serialize(original);
  const auto loaded = parse(text);
  EXPECT_TRUE(loaded.model == original.model);
  EXPECT_EQ(loaded.config.seed, original.config.seed);
  EXPECT_EQ(loaded.config.n_steps, 32);
  EXPECT_EQ(loaded.config.learning_rate, 1e-3);
  EXPECT_EQ(loaded.config.hidden_size, 6);
  EXPECT_EQ(loaded.config.action_scale, 0.75);
  EXPECT_EQ(serialize(loaded), text);
  const std::vector<double> s{0.3, -2.0};
  EXPECT_EQ(predict_deterministic(loaded.model, s), predict_deterministic(original.model, s));
}

TEST(Checkpoint, FileRoundTrip) {
  testing::TempDir dir;
  const auto original = sample_checkpoint();
  save_checkpoint(dir / "m.ckpt", original);
  EXPECT_TRUE(load_checkpoint(dir / "m.ckpt").model == original.model);
  EXPECT_EQ(testing::read_file(dir / "m.ckpt").rfind("blueprint-agent 1\n", 0), 0u);
}

TEST(Checkpoint, MissingFile) {
  testing::TempDir dir;
  EXPECT_THROW(load_checkpoint(dir / "absent.ckpt"), CheckpointError);
}

void expect_error(const std::string& text, const std::string& fragment) {
  try {
    parse(text);
    FAIL() << "expected CheckpointError containing '" << fragment << "'";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

std::string replace_line(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos);
  return text.replace(pos, from.size(), to);
}

TEST(Checkpoint, RejectsCorruption) {
  const auto text = serialize(sample_checkpoint());
  expect_error("", "unexpected end of file");
  expect_error("something else\n", "line 1: not a version 1");
  expect_error(replace_line(text, "hidden_size 6\n", "hidden 6\n"), "line 3: expected 'hidden_size'");
  expect_error(replace_line(text, "gamma 0.99\n", "gamma abc\n"), "bad value for 'gamma'");
  expect_error(replace_line(text, "seed 18446744073709551615\n", "seed 12x\n"), "bad seed");
  expect_error(text.substr(0, text.size() / 2), "unexpected end of file");
  expect_error(replace_line(text, "\nend\n", "\n"), "unexpected end of file");
  expect_error(text.substr(0, text.size() - 4) + "fin\n", "missing 'end'");

  const auto params_line = text.find("params ");
  const auto eol = text.find('\n', params_line);
  std::string wrong_count = text;
  wrong_count.replace(params_line, eol - params_line, "params 3");
  expect_error(wrong_count, "does not match the declared shape");

  std::string bad_value = text;
  bad_value.insert(eol + 1, "x");
  expect_error(bad_value, "bad parameter value");

  std::string nan_value = text;
  const auto next_eol = text.find('\n', eol + 1);
  nan_value.replace(eol + 1, next_eol - eol - 1, "nan");
  expect_error(nan_value, "non-finite");
}

}  // namespace
}  // namespace blueprint
