#include "egopt/command_eval.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <json.hpp>
#include <stdexcept>

#include "egopt/history_io.hpp"

namespace egopt {

namespace {

struct Pipe {
  int read_fd = -1;
  int write_fd = -1;

  // O_CLOEXEC matters: concurrent evaluations fork in parallel, and a child
  // that inherited another evaluation's stdin write-end would keep that
  // sibling's stdin open forever. dup2 below clears the flag on the one fd
  // each child actually needs.
  Pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
      throw std::runtime_error(std::string("pipe2: ") + std::strerror(errno));
    }
    read_fd = fds[0];
    write_fd = fds[1];
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (read_fd >= 0) ::close(read_fd);
    read_fd = -1;
  }
  void close_write() {
    if (write_fd >= 0) ::close(write_fd);
    write_fd = -1;
  }
};

void write_all(int fd, const std::string& data) {
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      return;  // child exited early; its status decides ok/failed
    }
    written += static_cast<std::size_t>(n);
  }
}

std::string read_all(int fd) {
  std::string out;
  char buffer[4096];
  while (true) {
    const ssize_t n = ::read(fd, buffer, sizeof buffer);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;
    out.append(buffer, static_cast<std::size_t>(n));
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Last non-empty whitespace-trimmed line of stdout.
std::string last_line(const std::string& text) {
  std::size_t end = text.size();
  while (end > 0) {
    std::size_t start = text.rfind('\n', end - 1);
    const std::size_t line_start = (start == std::string::npos) ? 0 : start + 1;
    std::string candidate = trim(text.substr(line_start, end - line_start));
    if (!candidate.empty()) return candidate;
    if (line_start == 0) break;
    end = line_start - 1;
  }
  return "";
}

}  // namespace

bench::Evaluator make_command_evaluator(const std::string& command, const SearchSpace& space,
                                        bench::Direction direction) {
  if (command.empty()) {
    throw std::invalid_argument("command evaluator: empty command line");
  }
  // A child that exits before reading its stdin must not kill the parent.
  std::signal(SIGPIPE, SIG_IGN);

  std::vector<std::string> names;
  for (const auto& p : space.params()) names.push_back(p.name);

  bench::Evaluator ev;
  ev.name = command;
  ev.kind = bench::EvalKind::command;
  ev.direction = direction;
  ev.fn = [command, names](const bench::EvalRequest& req) {
    bench::EvalOutcome out;
    const auto started = std::chrono::steady_clock::now();

    nlohmann::json msg;
    msg["eval_id"] = req.eval_id;
    msg["seed"] = req.seed;
    nlohmann::json params;
    for (std::size_t j = 0; j < names.size(); ++j) {
      params[names[j]] = req.raw[static_cast<Eigen::Index>(j)];
    }
    msg["params"] = params;
    const std::string input = msg.dump() + "\n";

    Pipe to_child;
    Pipe from_child;
    const pid_t pid = ::fork();
    if (pid < 0) {
      out.error = std::string("fork: ") + std::strerror(errno);
      return out;
    }
    if (pid == 0) {
      ::dup2(to_child.read_fd, STDIN_FILENO);
      ::dup2(from_child.write_fd, STDOUT_FILENO);
      ::close(to_child.read_fd);
      ::close(to_child.write_fd);
      ::close(from_child.read_fd);
      ::close(from_child.write_fd);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    to_child.close_read();
    from_child.close_write();
    write_all(to_child.write_fd, input);
    to_child.close_write();
    const std::string output = read_all(from_child.read_fd);
    from_child.close_read();

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    out.duration_s = std::floor(elapsed.count());

    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      out.error = "command exited with status " +
                  std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
      return out;
    }
    const std::string line = last_line(output);
    if (line.empty()) {
      out.error = "command produced no output";
      return out;
    }
    double value = 0.0;
    try {
      value = io::parse_double(line);
    } catch (const std::exception&) {
      out.error = "command output '" + line + "' is not a decimal number";
      return out;
    }
    if (!std::isfinite(value)) {
      out.error = "command returned a non-finite response";
      return out;
    }
    out.ok = true;
    out.value = value;
    return out;
  };
  return ev;
}

}  // namespace egopt
