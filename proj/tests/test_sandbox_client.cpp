// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "evalkit/errors.hpp"
#include "evalkit/metrics.hpp"
#include "evalkit/sandbox_client.hpp"
#include "oracles.hpp"

using namespace evalkit;
namespace fs = std::filesystem;

namespace {

ExecutionJob job(const std::string& candidate, double timeout_s = 2.0) {
  ExecutionJob j;
  j.candidate_code = candidate;
  j.test_code = "# expect: return a + b\nassert add(1, 2) == 3\n";
  j.entry_point = "add";
  j.timeout_s = timeout_s;
  return j;
}

SandboxRunner fake(double grace_s = 1.0) { return SandboxRunner({EVALKIT_FAKE_SANDBOX}, grace_s); }

}  // namespace

TEST(SandboxWire, RequestHasExactlyFourKeys) {
  const auto j = to_wire(job("x"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"candidate", "tests", "entry_point", "timeout_s"}));
}

TEST(SandboxWire, ResultParsing) {
  const auto r = execution_result_from_wire(
      ojson{{"status", "timeout"}, {"stderr_tail", "t"}, {"duration_s", 1.5}});
  EXPECT_EQ(r.status, ExecStatus::timeout);
  EXPECT_EQ(r.stderr_tail, "t");
  EXPECT_THROW(execution_result_from_wire(ojson{{"status", "maybe"}}), HarnessFailure);
  EXPECT_THROW(execution_result_from_wire(ojson::array()), HarnessFailure);
}

TEST(SandboxRunner, PassFailTimeout) {
  const auto runner = fake();
  EXPECT_EQ(runner.execute(job("def add(a, b):\n    return a + b\n")).status, ExecStatus::pass);
  EXPECT_EQ(runner.execute(job("def add(a, b):\n    return a - b\n")).status, ExecStatus::fail);
  EXPECT_EQ(runner.execute(job("TIMEOUT")).status, ExecStatus::timeout);
}

TEST(SandboxRunner, SendsTheWireRequestOnStdin) {
  const fs::path log = fs::temp_directory_path() / ("evalkit_sandbox_log_" + std::to_string(::getpid()));
  fs::remove(log);
  ::setenv("FAKE_SANDBOX_LOG", log.c_str(), 1);
  const auto j = job("return a + b");
  fake().execute(j);
  ::unsetenv("FAKE_SANDBOX_LOG");
  const auto sent = ojson::parse(oracle::read_file(log));
  fs::remove(log);
  EXPECT_EQ(sent, to_wire(j));
  EXPECT_EQ(sent.size(), 4u);
}

TEST(SandboxRunner, HungSandboxIsKilled) {
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(fake(0.5).execute(job("HANG", 0.5)), HarnessFailure);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(s, 3.0);
}

TEST(SandboxRunner, BrokenSandboxIsHarnessFailure) {
  EXPECT_THROW(fake().execute(job("CRASH")), HarnessFailure);
  EXPECT_THROW(fake().execute(job("GARBAGE")), HarnessFailure);
  EXPECT_THROW(SandboxRunner({}), HarnessFailure);
  EXPECT_THROW(SandboxRunner({"/nonexistent/evalkit-sandbox"}).execute(job("x")), HarnessFailure);
}

TEST(CountPasses, Examples) {
  auto r = [](ExecStatus s) { return ExecutionResult{s, "", 0.0}; };
  const std::vector<ExecutionResult> mixed{r(ExecStatus::pass), r(ExecStatus::fail), r(ExecStatus::pass)};
  EXPECT_EQ(count_passes(mixed), 2u);
  EXPECT_EQ(count_passes(std::vector<ExecutionResult>{}), 0u);
  EXPECT_EQ(count_passes(std::vector<ExecutionResult>{r(ExecStatus::timeout)}), 0u);
}

TEST(CountPasses, FeedsPassAtK) {
  const auto runner = fake();
  std::vector<ExecutionResult> results;
  for (const char* c : {"return a + b", "return a", "return a + b", "nope", "pass"})
    results.push_back(runner.execute(job(c)));
  const auto c = count_passes(results);
  EXPECT_EQ(c, 2u);
  EXPECT_NEAR(pass_at_k({5, static_cast<std::int64_t>(c), 1}), 0.4, 1e-12);
  EXPECT_NEAR(pass_at_k({5, static_cast<std::int64_t>(c), 1}), oracle::pass_at_k_enumerated(5, static_cast<int>(c), 1), 1e-12);
}
