#include "blueprint/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace blueprint {
namespace {

constexpr const char* kMagic = "blueprint-agent";
constexpr int kVersion = 1;

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    ++line_no_;
    if (!std::getline(in_, line)) fail("unexpected end of file");
    return line;
  }

  // Reads "<key> <value>" and returns the value text.
  std::string expect(const std::string& key) {
    const std::string line = next();
    const auto space = line.find(' ');
    if (space == std::string::npos || line.substr(0, space) != key) {
      fail("expected '" + key + "', got '" + line + "'");
    }
    return line.substr(space + 1);
  }

  double number(const std::string& key) {
    const std::string v = expect(key);
    try {
      return parse_double(v);
    } catch (const std::invalid_argument&) {
      fail("bad value for '" + key + "': " + v);
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw CheckpointError("checkpoint line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& m = ckpt.model;
  const auto& c = ckpt.config;
  out << kMagic << ' ' << kVersion << '\n';
  out << "input_dim " << m.input_dim() << '\n';
  out << "hidden_size " << m.hidden_size() << '\n';
  out << "action_scale " << format_double(m.action_scale()) << '\n';
  out << "total_timesteps " << c.total_timesteps << '\n';
  out << "n_envs " << c.n_envs << '\n';
  out << "n_steps " << c.n_steps << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "n_epochs " << c.n_epochs << '\n';
  out << "learning_rate " << format_double(c.learning_rate) << '\n';
  out << "gamma " << format_double(c.gamma) << '\n';
  out << "gae_lambda " << format_double(c.gae_lambda) << '\n';
  out << "clip_range " << format_double(c.clip_range) << '\n';
  out << "value_coef " << format_double(c.value_coef) << '\n';
  out << "entropy_coef " << format_double(c.entropy_coef) << '\n';
  out << "max_grad_norm " << format_double(c.max_grad_norm) << '\n';
  out << "max_steps " << c.max_steps << '\n';
  out << "seed " << c.seed << '\n';
  out << "params " << m.params().size() << '\n';
  for (double p : m.params()) out << format_double(p) << '\n';
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader r(in);
  const std::string header = r.next();
  if (header != std::string(kMagic) + " " + std::to_string(kVersion)) {
    r.fail("not a version " + std::to_string(kVersion) + " blueprint checkpoint");
  }
  const auto input_dim = static_cast<std::size_t>(r.number("input_dim"));
  const auto hidden = static_cast<std::size_t>(r.number("hidden_size"));
  const double action_scale = r.number("action_scale");

  Checkpoint ckpt;
  auto& c = ckpt.config;
  c.total_timesteps = static_cast<std::int64_t>(r.number("total_timesteps"));
  c.n_envs = static_cast<int>(r.number("n_envs"));
  c.n_steps = static_cast<int>(r.number("n_steps"));
  c.batch_size = static_cast<int>(r.number("batch_size"));
  c.n_epochs = static_cast<int>(r.number("n_epochs"));
  c.learning_rate = r.number("learning_rate");
  c.gamma = r.number("gamma");
  c.gae_lambda = r.number("gae_lambda");
  c.clip_range = r.number("clip_range");
  c.value_coef = r.number("value_coef");
  c.entropy_coef = r.number("entropy_coef");
  c.max_grad_norm = r.number("max_grad_norm");
  c.max_steps = static_cast<int>(r.number("max_steps"));
  const std::string seed = r.expect("seed");
  try {
    std::size_t used = 0;
    c.seed = std::stoull(seed, &used);
    if (used != seed.size()) r.fail("bad seed '" + seed + "'");
  } catch (const std::logic_error&) {
    r.fail("bad seed '" + seed + "'");
  }
  c.hidden_size = static_cast<int>(hidden);
  c.action_scale = action_scale;

  try {
    ckpt.model = AgentModel::zeros(input_dim, hidden, action_scale);
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  const auto count = static_cast<std::size_t>(r.number("params"));
  if (count != ckpt.model.params().size()) {
    r.fail("parameter count " + std::to_string(count) + " does not match the declared shape (" +
           std::to_string(ckpt.model.params().size()) + ")");
  }
  for (auto& p : ckpt.model.params()) {
    const std::string line = r.next();
    try {
      p = parse_double(line);
    } catch (const std::invalid_argument&) {
      r.fail("bad parameter value '" + line + "'");
    }
  }
  if (r.next() != "end") r.fail("missing 'end' marker");
  if (!ckpt.model.all_finite()) throw CheckpointError("checkpoint contains non-finite parameters");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, ckpt);
  if (!out) throw CheckpointError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace blueprint
