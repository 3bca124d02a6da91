#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include <sys/types.h>

namespace lens {

// Child process running `/bin/sh -c command` with piped stdin/stdout. stderr
// is inherited. The destructor kills and reaps the child.
class WorkerProcess {
 public:
  enum class ReadStatus { Line, Timeout, Closed };

  explicit WorkerProcess(const std::string& command);
  ~WorkerProcess();
  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  // False if the child has closed its stdin.
  bool write_line(std::string_view line);

  // Reads up to the next '\n' (excluded from `line`). On Timeout or Closed,
  // `line` holds whatever partial output arrived.
  ReadStatus read_line(std::string& line, std::chrono::milliseconds timeout);

  // SIGKILL and reap. Idempotent.
  void kill();

  // Reaps the child and returns its exit code (128 + signal if killed);
  // -1 if it is still running after `grace`.
  int wait_exit(std::chrono::milliseconds grace);

  bool running() const noexcept { return pid_ > 0; }

 private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int exit_code_ = -1;
  std::string buffer_;
};

}  // namespace lens
