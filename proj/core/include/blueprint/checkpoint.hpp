#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "blueprint/agent.hpp"
#include "blueprint/ppo.hpp"

namespace blueprint {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  AgentModel model;
  TrainConfig config;
};

// Text format, one item per line:
//
//   blueprint-agent 1
//   input_dim <d>
//   hidden_size <h>
//   action_scale <v>
//   <train config key> <value>      (every TrainConfig field)
//   params <n>
//   <n lines, one parameter each, shortest round-trip decimal>
//   end
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace blueprint
