// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "evalkit/errors.hpp"
#include "evalkit/util.hpp"
#include "httplib.h"

namespace evalkit {

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const char* route_for(EvalMode mode) {
  return mode == EvalMode::generation ? "/v1/generate" : "/v1/loglikelihood";
}

}  // namespace

std::string to_string(FinishReason r) {
  switch (r) {
    case FinishReason::stop:
      return "stop";
    case FinishReason::length:
      return "length";
    case FinishReason::error:
      return "error";
  }
  return "error";
}

FinishReason finish_reason_from_string(const std::string& s) {
  if (s == "stop") return FinishReason::stop;
  if (s == "length") return FinishReason::length;
  if (s == "error") return FinishReason::error;
  throw ProtocolError("unknown finish_reason '" + s + "'");
}

void validate(const GenerationRequest& req) {
  if (req.instance_id.empty()) throw std::invalid_argument("request has an empty instance_id");
  const bool ll = req.mode == EvalMode::loglikelihood;
  if (ll == req.continuations.empty())
    throw std::invalid_argument("request '" + req.instance_id +
                                "': continuations must be non-empty exactly in "
                                "loglikelihood mode");
  const auto& p = req.params;
  if (p.temperature < 0.0 || !(p.top_p > 0.0 && p.top_p <= 1.0) || p.max_new_tokens < 1)
    throw std::invalid_argument("request '" + req.instance_id + "': parameters out of range");
}

ojson to_json(const GenerationParams& p) {
  ojson j{{"temperature", p.temperature},
          {"top_p", p.top_p},
          {"max_new_tokens", p.max_new_tokens},
          {"stop", p.stop},
          {"seed", nullptr}};
  if (p.seed) j["seed"] = *p.seed;
  return j;
}

GenerationParams params_from_json(const ojson& j) {
  GenerationParams p;
  p.temperature = j.value("temperature", p.temperature);
  p.top_p = j.value("top_p", p.top_p);
  p.max_new_tokens = j.value("max_new_tokens", p.max_new_tokens);
  if (auto it = j.find("stop"); it != j.end() && !it->is_null())
    p.stop = it->get<std::vector<std::string>>();
  if (auto it = j.find("seed"); it != j.end() && !it->is_null())
    p.seed = it->get<std::int64_t>();
  return p;
}

ojson to_wire(const GenerationRequest& req) {
  ojson j{{"instance_id", req.instance_id},
          {"prompt", req.prompt},
          {"params", to_json(req.params)}};
  if (req.mode == EvalMode::loglikelihood) j["continuations"] = req.continuations;
  return j;
}

GenerationRequest request_from_wire(const ojson& j, EvalMode mode) {
  GenerationRequest req;
  req.mode = mode;
  req.instance_id = j.at("instance_id").get<std::string>();
  req.prompt = j.at("prompt").get<std::string>();
  if (auto it = j.find("params"); it != j.end()) req.params = params_from_json(*it);
  if (auto it = j.find("continuations"); it != j.end())
    req.continuations = it->get<std::vector<std::string>>();
  return req;
}

ojson to_wire(const GenerationResponse& resp) {
  ojson j{{"instance_id", resp.instance_id},
          {"text", nullptr},
          {"logprob_sums", nullptr},
          {"token_counts", nullptr},
          {"finish_reason", to_string(resp.finish_reason)}};
  if (resp.text) j["text"] = *resp.text;
  if (resp.logprob_sums) j["logprob_sums"] = *resp.logprob_sums;
  if (resp.token_counts) j["token_counts"] = *resp.token_counts;
  return j;
}

GenerationResponse response_from_wire(const ojson& j, const GenerationRequest& req) {
  if (!j.is_object()) throw ProtocolError("response is not a JSON object");
  GenerationResponse resp;
  try {
    resp.instance_id = j.at("instance_id").get<std::string>();
    resp.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
    if (auto it = j.find("text"); it != j.end() && !it->is_null())
      resp.text = it->get<std::string>();
    if (auto it = j.find("logprob_sums"); it != j.end() && !it->is_null())
      resp.logprob_sums = it->get<std::vector<double>>();
    if (auto it = j.find("token_counts"); it != j.end() && !it->is_null())
      resp.token_counts = it->get<std::vector<std::int64_t>>();
  } catch (const ojson::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
  if (resp.instance_id != req.instance_id)
    throw ProtocolError("response for '" + resp.instance_id + "' answers request '" +
                        req.instance_id + "'");
  if (req.mode == EvalMode::generation) {
    if (!resp.text || resp.logprob_sums)
      throw ProtocolError("generation response must carry text only");
    if (apply_stop_sequences(*resp.text, req.params.stop))
      resp.finish_reason = FinishReason::stop;
  } else {
    const auto n = req.continuations.size();
    if (resp.text || !resp.logprob_sums || !resp.token_counts ||
        resp.logprob_sums->size() != n || resp.token_counts->size() != n)
      throw ProtocolError("loglikelihood response must carry " + std::to_string(n) +
                          " logprob_sums and token_counts");
  }
  return resp;
}

bool apply_stop_sequences(std::string& text, std::span<const std::string> stop) {
  std::size_t cut = std::string::npos;
  for (const auto& s : stop) {
    if (s.empty()) continue;
    cut = std::min(cut, text.find(s));
  }
  if (cut == std::string::npos) return false;
  text.resize(cut);
  return true;
}

namespace {

const char* class_name(StatusClass c) {
  switch (c) {
    case StatusClass::transport:
      return "transport";
    case StatusClass::client_error:
      return "4xx";
    case StatusClass::server_error:
      return "5xx";
  }
  return "transport";
}

}  // namespace

ojson to_json(const RetryPolicy& p) {
  ojson classes = ojson::array();
  for (auto c : p.retryable) classes.push_back(class_name(c));
  return ojson{{"max_attempts", p.max_attempts},
               {"backoff_base_ms", p.backoff_base_ms},
               {"backoff_cap_ms", p.backoff_cap_ms},
               {"retryable", classes}};
}

RetryPolicy retry_policy_from_json(const ojson& j) {
  RetryPolicy p;
  p.max_attempts = j.value("max_attempts", p.max_attempts);
  p.backoff_base_ms = j.value("backoff_base_ms", p.backoff_base_ms);
  p.backoff_cap_ms = j.value("backoff_cap_ms", p.backoff_cap_ms);
  if (auto it = j.find("retryable"); it != j.end()) {
    p.retryable.clear();
    for (const auto& name : *it) {
      const auto s = name.get<std::string>();
      if (s == "transport")
        p.retryable.insert(StatusClass::transport);
      else if (s == "4xx")
        p.retryable.insert(StatusClass::client_error);
      else if (s == "5xx")
        p.retryable.insert(StatusClass::server_error);
      else
        throw Error("unknown retryable class '" + s + "'");
    }
  }
  if (p.max_attempts < 1 || p.backoff_base_ms <= 0 || p.backoff_cap_ms <= 0)
    throw Error("retry policy needs max_attempts >= 1 and positive backoff");
  return p;
}

double backoff_ceiling_ms(const RetryPolicy& p, int retry) {
  const double exp = std::ldexp(p.backoff_base_ms, std::clamp(retry - 1, 0, 60));
  return std::min(p.backoff_cap_ms, exp);
}

double backoff_delay_ms(const RetryPolicy& p, int retry, double unit) {
  return std::clamp(unit, 0.0, 1.0) * backoff_ceiling_ms(p, retry);
}

// ---------------------------------------------------------------------------

struct GatewayClient::Impl {
  httplib::Client http;
  explicit Impl(const std::string& endpoint) : http(endpoint) {}
};

GatewayClient::GatewayClient(std::string endpoint, ClientOptions options)
    : endpoint_(std::move(endpoint)),
      options_(std::move(options)),
      impl_(std::make_unique<Impl>(endpoint_)) {
  if (!impl_->http.is_valid()) throw TransportError("invalid endpoint '" + endpoint_ + "'");
  impl_->http.set_keep_alive(true);
  impl_->http.set_tcp_nodelay(true);
  impl_->http.set_connection_timeout(options_.connect_timeout);
  impl_->http.set_read_timeout(options_.timeout);
  impl_->http.set_write_timeout(options_.timeout);
  if (!options_.bearer_token.empty())
    impl_->http.set_bearer_token_auth(options_.bearer_token);
}

GatewayClient::~GatewayClient() = default;
GatewayClient::GatewayClient(GatewayClient&&) noexcept = default;
GatewayClient& GatewayClient::operator=(GatewayClient&&) noexcept = default;

GenerationResponse GatewayClient::generate(const GenerationRequest& req) {
  validate(req);
  const auto t0 = Clock::now();
  const std::string route = route_for(req.mode);
  auto res = impl_->http.Post(route, dump_line(to_wire(req)), "application/json");
  if (!res)
    throw TransportError(endpoint_ + route + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError(res->status, res->body);
  ojson body;
  try {
    body = ojson::parse(res->body);
  } catch (const ojson::parse_error& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  auto resp = response_from_wire(body, req);
  resp.latency_ms = ms_since(t0);
  return resp;
}

GenerationResponse generate(const std::string& endpoint, const GenerationRequest& req,
                            const ClientOptions& options) {
  GatewayClient client(endpoint, options);
  auto resp = client.generate(req);
  resp.attempts = 1;
  return resp;
}

namespace {

GenerationResponse send_with_retry(GatewayClient& client, const GenerationRequest& req,
                                   const RetryPolicy& policy, DetRng& rng) {
  const auto t0 = Clock::now();
  std::string last_error;
  for (int attempt = 1;; ++attempt) {
    StatusClass cls;
    bool retryable_kind = true;
    try {
      auto resp = client.generate(req);
      resp.attempts = attempt;
      resp.latency_ms = ms_since(t0);
      return resp;
    } catch (const TransportError& e) {
      cls = StatusClass::transport;
      last_error = e.what();
    } catch (const BackendError& e) {
      cls = e.status() >= 500 && e.status() < 600 ? StatusClass::server_error
                                                  : StatusClass::client_error;
      last_error = e.what();
    } catch (const ProtocolError& e) {
      cls = StatusClass::client_error;
      retryable_kind = false;
      last_error = e.what();
    }
    const bool retry = retryable_kind && policy.retryable.count(cls) != 0 &&
                       attempt < policy.max_attempts;
    if (!retry) {
      GenerationResponse failed;
      failed.instance_id = req.instance_id;
      failed.finish_reason = FinishReason::error;
      failed.attempts = attempt;
      failed.error = last_error;
      failed.latency_ms = ms_since(t0);
      return failed;
    }
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(
        backoff_delay_ms(policy, attempt, rng.unit())));
  }
}

}  // namespace

DispatchStats dispatch_batch(const std::string& endpoint,
                             std::span<const GenerationRequest> reqs,
                             const DispatchOptions& options, const ResponseSink& sink) {
  if (options.concurrency < 1) throw std::invalid_argument("concurrency must be >= 1");
  {
    std::set<std::string_view> ids;
    for (const auto& r : reqs)
      if (!ids.insert(r.instance_id).second)
        throw std::invalid_argument("duplicate instance_id '" + r.instance_id + "'");
  }

  DispatchStats stats;
  stats.requests = reqs.size();
  const auto t0 = Clock::now();
  if (reqs.empty()) return stats;

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> inflight{0};
  std::atomic<std::size_t> high_water{0};
  std::atomic<bool> abort{false};
  std::mutex sink_mu;
  std::exception_ptr failure;

  auto worker = [&](std::size_t worker_idx) {
    try {
      GatewayClient client(endpoint, options.client);
      DetRng rng(mix_seed(options.jitter_seed, worker_idx));
      while (!abort.load()) {
        if (options.cancel && options.cancel->load()) break;
        const std::size_t i = next.fetch_add(1);
        if (i >= reqs.size()) break;
        const std::size_t now = inflight.fetch_add(1) + 1;
        std::size_t seen = high_water.load();
        while (now > seen && !high_water.compare_exchange_weak(seen, now)) {
        }
        auto resp = send_with_retry(client, reqs[i], options.retry, rng);
        inflight.fetch_sub(1);
        std::lock_guard lock(sink_mu);
        ++stats.completed;
        if (resp.finish_reason == FinishReason::error) ++stats.failed;
        sink(std::move(resp));
      }
    } catch (...) {
      std::lock_guard lock(sink_mu);
      if (!failure) failure = std::current_exception();
      abort = true;
    }
  };

  const std::size_t n_workers = std::min(options.concurrency, reqs.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker, w);
  }
  if (failure) std::rethrow_exception(failure);
  stats.max_inflight = high_water.load();
  stats.wall_ms = ms_since(t0);
  return stats;
}

std::vector<GenerationResponse> dispatch_batch(const std::string& endpoint,
                                               std::span<const GenerationRequest> reqs,
                                               const DispatchOptions& options,
                                               DispatchStats* stats) {
  std::vector<GenerationResponse> out;
  out.reserve(reqs.size());
  auto s = dispatch_batch(endpoint, reqs, options,
                          [&](GenerationResponse r) { out.push_back(std::move(r)); });
  if (stats) *stats = s;
  return out;
}

HealthStatus probe_health(const std::string& endpoint, std::chrono::milliseconds timeout) {
  HealthStatus status;
  httplib::Client http(endpoint);
  if (!http.is_valid()) return status;
  http.set_connection_timeout(timeout);
  http.set_read_timeout(timeout);
  auto res = http.Get("/health");
  if (!res || res->status != 200) return status;
  status.ready = true;
  try {
    auto j = ojson::parse(res->body);
    status.model_name = j.value("model_name", "");
    status.ready = j.value("ready", true);
  } catch (const ojson::exception&) {
  }
  return status;
}

std::string default_endpoint(const std::string& fallback) {
  const char* env = std::getenv(kEndpointEnv);
  return env && *env ? std::string(env) : fallback;
}

}  // namespace evalkit
