// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "evalkit/corpus.hpp"
#include "evalkit/task.hpp"

namespace evalkit {

// Environment variables consulted when no endpoint/token is given.
inline constexpr const char* kEndpointEnv = "EVALKIT_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "EVALKIT_API_KEY";

struct GenerationParams {
  double temperature = 0.0;
  double top_p = 1.0;
  std::int64_t max_new_tokens = 256;
  std::vector<std::string> stop;
  std::optional<std::int64_t> seed;

  bool operator==(const GenerationParams&) const = default;
};

struct GenerationRequest {
  std::string instance_id;
  std::string prompt;
  GenerationParams params;
  EvalMode mode = EvalMode::generation;
  // Loglikelihood mode only.
  std::vector<std::string> continuations;
};

enum class FinishReason { stop, length, error };
std::string to_string(FinishReason r);
FinishReason finish_reason_from_string(const std::string& s);

struct GenerationResponse {
  std::string instance_id;
  std::optional<std::string> text;
  std::optional<std::vector<double>> logprob_sums;
  std::optional<std::vector<std::int64_t>> token_counts;
  FinishReason finish_reason = FinishReason::stop;
  double latency_ms = 0.0;
  // Client-side bookkeeping, not part of the wire body.
  int attempts = 0;
  std::string error;
};

// Throws std::invalid_argument if the request breaks its own invariants.
void validate(const GenerationRequest& req);

// Wire bodies (keys are fixed by the protocol).
ojson to_json(const GenerationParams& p);
GenerationParams params_from_json(const ojson& j);
ojson to_wire(const GenerationRequest& req);
GenerationRequest request_from_wire(const ojson& j, EvalMode mode);
ojson to_wire(const GenerationResponse& resp);
// Checks the body against the request it answers; throws ProtocolError.
GenerationResponse response_from_wire(const ojson& j, const GenerationRequest& req);

// Truncates at the earliest stop sequence. Returns true if one was found.
bool apply_stop_sequences(std::string& text, std::span<const std::string> stop);

enum class StatusClass { transport, client_error, server_error };

struct RetryPolicy {
  int max_attempts = 3;
  double backoff_base_ms = 200.0;
  double backoff_cap_ms = 10000.0;
  std::set<StatusClass> retryable = {StatusClass::transport, StatusClass::server_error};

  bool operator==(const RetryPolicy&) const = default;
};

ojson to_json(const RetryPolicy& p);
RetryPolicy retry_policy_from_json(const ojson& j);

// min(cap, base * 2^(retry-1)) for the retry-th retry (1-based).
double backoff_ceiling_ms(const RetryPolicy& p, int retry);
// Full jitter: uniform in [0, ceiling]. `unit` is a draw in [0, 1).
double backoff_delay_ms(const RetryPolicy& p, int retry, double unit);

struct ClientOptions {
  std::chrono::milliseconds timeout{120000};
  std::chrono::milliseconds connect_timeout{10000};
  // Sent as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;
};

// Talks to one backend. Not thread-safe; use one per thread (dispatch_batch
// does this).
class GatewayClient {
 public:
  GatewayClient(std::string endpoint, ClientOptions options = {});
  ~GatewayClient();
  GatewayClient(GatewayClient&&) noexcept;
  GatewayClient& operator=(GatewayClient&&) noexcept;

  // Throws TransportError, BackendError or ProtocolError.
  GenerationResponse generate(const GenerationRequest& req);
  const std::string& endpoint() const { return endpoint_; }

 private:
  struct Impl;
  std::string endpoint_;
  ClientOptions options_;
  std::unique_ptr<Impl> impl_;
};

GenerationResponse generate(const std::string& endpoint, const GenerationRequest& req,
                            const ClientOptions& options = {});

struct DispatchOptions {
  std::size_t concurrency = 8;
  RetryPolicy retry;
  ClientOptions client;
  std::uint64_t jitter_seed = 0;
  // Checked before each request is claimed; set it to stop early.
  const std::atomic<bool>* cancel = nullptr;
};

struct DispatchStats {
  std::size_t max_inflight = 0;
  std::size_t requests = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double wall_ms = 0.0;
};

using ResponseSink = std::function<void(GenerationResponse)>;

// Sends every request with at most options.concurrency in flight. The sink is
// called once per request, serialized, in completion order. Permanent
// failures arrive as finish_reason=error responses. Requests skipped through
// `cancel` produce no response.
DispatchStats dispatch_batch(const std::string& endpoint,
                             std::span<const GenerationRequest> reqs,
                             const DispatchOptions& options, const ResponseSink& sink);

std::vector<GenerationResponse> dispatch_batch(const std::string& endpoint,
                                               std::span<const GenerationRequest> reqs,
                                               const DispatchOptions& options,
                                               DispatchStats* stats = nullptr);

struct HealthStatus {
  std::string model_name;
  bool ready = false;
};

HealthStatus probe_health(const std::string& endpoint,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

// Endpoint from the environment, or the given fallback.
std::string default_endpoint(const std::string& fallback = "http://127.0.0.1:8000");

}  // namespace evalkit
