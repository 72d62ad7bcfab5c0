// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "evalkit/gateway.hpp"

namespace evalkit {

inline constexpr const char* kUnscripted = "UNSCRIPTED";

enum class MockMode { echo, scripted, fault };

struct MockFault {
  std::string instance_id;
  int attempt = 1;  // 1-based attempt that fails
  int status = 503;
};

// Behaviour of the reference backend. Faults fire in every mode; "fault"
// mode answers like echo when no fault matches.
struct MockScript {
  MockMode mode = MockMode::echo;
  std::string model_name = "mock-echo";
  std::map<std::string, std::string> answers;
  std::vector<MockFault> faults;
  double service_time_ms = 0.0;
  int workers = 4;
};

MockScript mock_script_from_json(const ojson& j);
ojson to_json(const MockScript& s);
MockScript load_mock_script(const std::filesystem::path& path);

// Answer scripted for an id. Sample ids "<id>#<n>" fall back to "<id>".
const std::string* scripted_answer(const MockScript& script, const std::string& instance_id);

// Deterministic pseudo-scores: -len(continuation), plus 10 when the
// continuation (whitespace-trimmed) equals the scripted answer. token_counts
// are whitespace token counts.
GenerationResponse loglikelihood_stub(const GenerationRequest& req, const MockScript& script);

struct MockStats {
  std::size_t max_inflight = 0;
  std::map<std::string, int> attempts;
};

// A running mock backend. Stops on destruction.
class MockServer {
 public:
  // port 0 picks a free port. Throws PortInUse.
  MockServer(MockScript script, int port, std::string host = "127.0.0.1");
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const;
  std::string endpoint() const;
  MockStats stats() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<MockServer> serve(const MockScript& script, int port);

}  // namespace evalkit
