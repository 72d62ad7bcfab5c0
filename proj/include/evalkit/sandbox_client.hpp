// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "evalkit/corpus.hpp"

namespace evalkit {

// Client side of the code-execution sandbox: the sandbox is an external
// executable that reads one JSON request on stdin and writes one JSON
// result on stdout.
struct ExecutionJob {
  std::string candidate_code;
  std::string test_code;
  std::string entry_point;
  double timeout_s = 10.0;
};

enum class ExecStatus { pass, fail, timeout, error };
std::string to_string(ExecStatus s);
ExecStatus exec_status_from_string(const std::string& s);

struct ExecutionResult {
  ExecStatus status = ExecStatus::error;
  std::string stderr_tail;
  double duration_s = 0.0;
};

// {"candidate", "tests", "entry_point", "timeout_s"}
ojson to_wire(const ExecutionJob& job);
// Throws HarnessFailure on a malformed document.
ExecutionResult execution_result_from_wire(const ojson& j);

class SandboxRunner {
 public:
  // argv of the sandbox executable, e.g. {"python3", "-m", "sandbox"}.
  explicit SandboxRunner(std::vector<std::string> command, double grace_s = 5.0);

  // Spawns one sandbox process per job. The process is killed if it outlives
  // timeout_s + grace_s; that, a non-JSON reply or a spawn failure throw
  // HarnessFailure.
  ExecutionResult execute(const ExecutionJob& job) const;

  const std::vector<std::string>& command() const { return command_; }

 private:
  std::vector<std::string> command_;
  double grace_s_;
};

std::size_t count_passes(std::span<const ExecutionResult> results);

}  // namespace evalkit
