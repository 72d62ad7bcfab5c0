// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/sandbox_client.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "evalkit/errors.hpp"

extern char** environ;

namespace evalkit {

std::string to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::pass:
      return "pass";
    case ExecStatus::fail:
      return "fail";
    case ExecStatus::timeout:
      return "timeout";
    case ExecStatus::error:
      return "error";
  }
  return "error";
}

ExecStatus exec_status_from_string(const std::string& s) {
  if (s == "pass") return ExecStatus::pass;
  if (s == "fail") return ExecStatus::fail;
  if (s == "timeout") return ExecStatus::timeout;
  if (s == "error") return ExecStatus::error;
  throw HarnessFailure("unknown sandbox status '" + s + "'");
}

ojson to_wire(const ExecutionJob& job) {
  return ojson{{"candidate", job.candidate_code},
               {"tests", job.test_code},
               {"entry_point", job.entry_point},
               {"timeout_s", job.timeout_s}};
}

ExecutionResult execution_result_from_wire(const ojson& j) {
  try {
    ExecutionResult r;
    r.status = exec_status_from_string(j.at("status").get<std::string>());
    r.stderr_tail = j.value("stderr_tail", "");
    r.duration_s = j.value("duration_s", 0.0);
    return r;
  } catch (const ojson::exception& e) {
    throw HarnessFailure(std::string("malformed sandbox reply: ") + e.what());
  }
}

namespace {

// Owns a file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

void make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0)
    throw HarnessFailure(std::string("pipe: ") + std::strerror(errno));
  read_end = Fd(fds[0]);
  write_end = Fd(fds[1]);
}

}  // namespace

SandboxRunner::SandboxRunner(std::vector<std::string> command, double grace_s)
    : command_(std::move(command)), grace_s_(grace_s) {
  if (command_.empty()) throw HarnessFailure("empty sandbox command");
}

ExecutionResult SandboxRunner::execute(const ExecutionJob& job) const {
  Fd in_r, in_w, out_r, out_w;
  make_pipe(in_r, in_w);
  make_pipe(out_r, out_w);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_r.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_w.get(), STDOUT_FILENO);

  std::vector<char*> argv;
  for (const auto& a : command_) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0)
    throw HarnessFailure("cannot start sandbox '" + command_[0] + "': " + std::strerror(rc));
  in_r.reset();
  out_w.reset();

  const std::string request = dump_line(to_wire(job)) + "\n";
  std::size_t written = 0;
  std::string reply;
  ::fcntl(in_w.get(), F_SETFL, O_NONBLOCK);

  using Clock = std::chrono::steady_clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(job.timeout_s + grace_s_));
  bool timed_out = false;
  while (out_r.get() >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {out_r.get(), POLLIN, 0};
    if (in_w.get() >= 0) fds[n++] = {in_w.get(), POLLOUT, 0};
    if (::poll(fds, n, static_cast<int>(std::min<long long>(left.count(), 1000))) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = ::write(in_w.get(), request.data() + written, request.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = request.size();
      if (written == request.size()) in_w.reset();
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      const ssize_t r = ::read(out_r.get(), buf, sizeof buf);
      if (r > 0)
        reply.append(buf, static_cast<std::size_t>(r));
      else if (r == 0 || errno != EAGAIN)
        out_r.reset();
    }
  }

  if (timed_out) ::kill(pid, SIGKILL);
  int wstatus = 0;
  while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
  }
  if (timed_out)
    throw HarnessFailure("sandbox did not answer within " +
                         std::to_string(job.timeout_s + grace_s_) + " s");
  if (!WIFEXITED(wstatus) || WEXITSTATUS(wstatus) != 0)
    throw HarnessFailure("sandbox exited abnormally");
  try {
    return execution_result_from_wire(ojson::parse(reply));
  } catch (const ojson::parse_error& e) {
    throw HarnessFailure(std::string("sandbox reply is not JSON: ") + e.what());
  }
}

std::size_t count_passes(std::span<const ExecutionResult> results) {
  return static_cast<std::size_t>(std::count_if(
      results.begin(), results.end(), [](const auto& r) { return r.status == ExecStatus::pass; }));
}

}  // namespace evalkit
