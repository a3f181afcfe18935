#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <sstream>

#include "blueprint/blackbox.hpp"

extern char** environ;

namespace blueprint {
namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

struct ProcessResult {
  int exit_status = -1;
  std::string out;
};

// Owns both ends of a pipe until they are handed off.
class Pipe {
 public:
  Pipe() {
    if (::pipe(fds_) != 0) throw EvaluationError(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  int read_end() const { return fds_[0]; }
  int write_end() const { return fds_[1]; }
  void close_read() {
    if (fds_[0] >= 0) ::close(fds_[0]);
    fds_[0] = -1;
  }
  void close_write() {
    if (fds_[1] >= 0) ::close(fds_[1]);
    fds_[1] = -1;
  }

 private:
  int fds_[2] = {-1, -1};
};

ProcessResult run_process(const std::string& command, const std::vector<std::string>& args) {
  Pipe pipe;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, pipe.write_end(), STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, pipe.read_end());
  posix_spawn_file_actions_addclose(&actions, pipe.write_end());

  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(command.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, command.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw EvaluationError("failed to spawn '" + command + "': " + std::strerror(rc));
  }
  pipe.close_write();

  ProcessResult result;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::read(pipe.read_end(), buf, sizeof(buf));
    if (n > 0) {
      result.out.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw EvaluationError("waitpid failed for '" + command + "'", result.out);
  }
  result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

class ExternalSystem final : public SystemUnderTest {
 public:
  explicit ExternalSystem(ExternalSystemOptions options) : options_(std::move(options)) {
    if (options_.command.empty()) throw std::invalid_argument("external system: empty command");
    if (options_.bounds.dim() == 0) throw std::invalid_argument("external system: bounds required");
  }

  const std::string& name() const override { return options_.name; }
  const Bounds& bounds() const override { return options_.bounds; }

 protected:
  OutputValue do_evaluate(std::span<const double> x) const override {
    const auto result = run_process(options_.command, render_arguments(options_.arg_template, x));
    if (result.exit_status != 0) {
      std::ostringstream msg;
      msg << "'" << options_.command << "' exited with status " << result.exit_status;
      throw EvaluationError(msg.str(), result.out);
    }
    std::string text = trim(result.out);
    if (options_.parse_mode == ParseMode::label) return OutputValue::label(std::move(text));

    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last) {
      throw EvaluationError("'" + options_.command + "' printed a non-integer score", result.out);
    }
    return OutputValue::score(value);
  }

 private:
  ExternalSystemOptions options_;
};

}  // namespace

std::vector<std::string> render_arguments(const std::string& arg_template,
                                          std::span<const double> x) {
  std::vector<std::string> args;
  std::istringstream words(arg_template);
  std::string word;
  while (words >> word) {
    std::string rendered;
    for (std::size_t i = 0; i < word.size();) {
      if (word[i] == '{') {
        const auto close = word.find('}', i);
        if (close != std::string::npos) {
          std::size_t index = 0;
          const char* first = word.data() + i + 1;
          const char* last = word.data() + close;
          auto [ptr, ec] = std::from_chars(first, last, index);
          if (ec == std::errc{} && ptr == last && first != last) {
            if (index >= x.size()) {
              throw std::invalid_argument("argument template refers to missing component {" +
                                          std::to_string(index) + "}");
            }
            rendered += format_double(x[index]);
            i = close + 1;
            continue;
          }
        }
      }
      rendered += word[i++];
    }
    args.push_back(std::move(rendered));
  }
  return args;
}

SystemPtr make_external_system(ExternalSystemOptions options) {
  return std::make_shared<ExternalSystem>(std::move(options));
}

}  // namespace blueprint
