// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/mockserver.hpp"

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

#include "evalkit/errors.hpp"
#include "evalkit/util.hpp"
#include "httplib.h"

namespace evalkit {

namespace {

std::string mode_name(MockMode m) {
  switch (m) {
    case MockMode::echo:
      return "echo";
    case MockMode::scripted:
      return "scripted";
    case MockMode::fault:
      return "fault";
  }
  return "echo";
}

}  // namespace

MockScript mock_script_from_json(const ojson& j) {
  MockScript s;
  const std::string mode = j.value("mode", "echo");
  if (mode == "echo")
    s.mode = MockMode::echo;
  else if (mode == "scripted")
    s.mode = MockMode::scripted;
  else if (mode == "fault")
    s.mode = MockMode::fault;
  else
    throw Error("unknown mock mode '" + mode + "'");
  s.model_name = j.value("model_name", s.model_name);
  if (auto it = j.find("answers"); it != j.end())
    s.answers = it->get<std::map<std::string, std::string>>();
  if (auto it = j.find("faults"); it != j.end()) {
    for (const auto& f : *it)
      s.faults.push_back({f.at("instance_id").get<std::string>(), f.value("attempt", 1),
                          f.value("status", 503)});
  }
  s.service_time_ms = j.value("service_time_ms", 0.0);
  s.workers = j.value("workers", s.workers);
  if (s.workers < 1 || s.service_time_ms < 0) throw Error("mock script needs workers >= 1");
  return s;
}

ojson to_json(const MockScript& s) {
  ojson faults = ojson::array();
  for (const auto& f : s.faults)
    faults.push_back({{"instance_id", f.instance_id}, {"attempt", f.attempt}, {"status", f.status}});
  ojson answers = ojson::object();
  for (const auto& [k, v] : s.answers) answers[k] = v;
  return ojson{{"mode", mode_name(s.mode)},   {"model_name", s.model_name},
               {"answers", answers},          {"faults", faults},
               {"service_time_ms", s.service_time_ms}, {"workers", s.workers}};
}

MockScript load_mock_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mock script " + path.string());
  try {
    return mock_script_from_json(ojson::parse(in));
  } catch (const ojson::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

const std::string* scripted_answer(const MockScript& script, const std::string& instance_id) {
  if (auto it = script.answers.find(instance_id); it != script.answers.end())
    return &it->second;
  const auto hash = instance_id.rfind('#');
  if (hash != std::string::npos) {
    if (auto it = script.answers.find(instance_id.substr(0, hash)); it != script.answers.end())
      return &it->second;
  }
  return nullptr;
}

GenerationResponse loglikelihood_stub(const GenerationRequest& req, const MockScript& script) {
  GenerationResponse resp;
  resp.instance_id = req.instance_id;
  resp.finish_reason = FinishReason::stop;
  const std::string* answer = scripted_answer(script, req.instance_id);
  std::vector<double> sums;
  std::vector<std::int64_t> counts;
  for (const auto& cont : req.continuations) {
    double s = -static_cast<double>(cont.size());
    if (answer && py_strip(*answer) == py_strip(cont)) s += 10.0;
    sums.push_back(s);
    counts.push_back(static_cast<std::int64_t>(split_whitespace(cont).size()));
  }
  resp.logprob_sums = std::move(sums);
  resp.token_counts = std::move(counts);
  return resp;
}

// ---------------------------------------------------------------------------

struct MockServer::Impl {
  MockScript script;
  httplib::Server http;
  std::thread thread;
  int port = 0;
  std::string host;

  mutable std::mutex mu;
  std::condition_variable slot_free;
  int active = 0;
  std::size_t max_inflight = 0;
  std::map<std::string, int> attempts;

  void handle(const httplib::Request& req, httplib::Response& res, EvalMode mode);
};

void MockServer::Impl::handle(const httplib::Request& hreq, httplib::Response& res,
                              EvalMode mode) {
  GenerationRequest req;
  try {
    req = request_from_wire(ojson::parse(hreq.body), mode);
  } catch (const ojson::exception& e) {
    res.status = 400;
    res.set_content(dump_line({{"error", e.what()}}), "application/json");
    return;
  }

  int attempt;
  {
    std::lock_guard lock(mu);
    attempt = ++attempts[req.instance_id];
  }
  for (const auto& f : script.faults) {
    if (f.instance_id == req.instance_id && f.attempt == attempt) {
      res.status = f.status;
      res.set_content(dump_line({{"error", "injected fault"}, {"attempt", attempt}}),
                      "application/json");
      return;
    }
  }

  {
    std::unique_lock lock(mu);
    slot_free.wait(lock, [&] { return active < script.workers; });
    ++active;
    max_inflight = std::max(max_inflight, static_cast<std::size_t>(active));
  }
  if (script.service_time_ms > 0)
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(script.service_time_ms));

  GenerationResponse resp;
  if (mode == EvalMode::loglikelihood) {
    resp = loglikelihood_stub(req, script);
  } else {
    resp.instance_id = req.instance_id;
    std::string text;
    if (script.mode == MockMode::scripted) {
      const std::string* a = scripted_answer(script, req.instance_id);
      text = a ? *a : kUnscripted;
    } else {
      text = req.prompt;
    }
    apply_stop_sequences(text, req.params.stop);
    resp.text = std::move(text);
    resp.finish_reason = FinishReason::stop;
  }
  {
    std::lock_guard lock(mu);
    --active;
  }
  slot_free.notify_one();
  res.set_content(dump_line(to_wire(resp)), "application/json");
}

MockServer::MockServer(MockScript script, int port, std::string host)
    : impl_(std::make_unique<Impl>()) {
  impl_->script = std::move(script);
  impl_->host = std::move(host);
  auto& http = impl_->http;
  // Keep-alive connections pin a pool thread each, so size the pool well
  // above both the admission bound and typical client concurrency.
  const std::size_t threads =
      std::max<std::size_t>(128, 2 * static_cast<std::size_t>(impl_->script.workers) + 16);
  http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  http.set_tcp_nodelay(true);
  // SO_REUSEPORT would let a second server share the port silently.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  Impl* self = impl_.get();
  http.Post("/v1/generate", [self](const httplib::Request& q, httplib::Response& r) {
    self->handle(q, r, EvalMode::generation);
  });
  http.Post("/v1/loglikelihood", [self](const httplib::Request& q, httplib::Response& r) {
    self->handle(q, r, EvalMode::loglikelihood);
  });
  http.Get("/health", [self](const httplib::Request&, httplib::Response& r) {
    r.set_content(dump_line({{"model_name", self->script.model_name}, {"ready", true}}),
                  "application/json");
  });
  http.Get("/stats", [self](const httplib::Request&, httplib::Response& r) {
    ojson attempts = ojson::object();
    std::size_t max_inflight;
    {
      std::lock_guard lock(self->mu);
      max_inflight = self->max_inflight;
      for (const auto& [id, n] : self->attempts) attempts[id] = n;
    }
    r.set_content(dump_line({{"max_inflight", max_inflight}, {"attempts", attempts}}),
                  "application/json");
  });

  if (port == 0) {
    impl_->port = http.bind_to_any_port(impl_->host);
    if (impl_->port < 0) throw PortInUse("could not bind any port on " + impl_->host);
  } else {
    if (!http.bind_to_port(impl_->host, port))
      throw PortInUse("port " + std::to_string(port) + " is in use");
    impl_->port = port;
  }
  impl_->thread = std::thread([self] { self->http.listen_after_bind(); });
  http.wait_until_ready();
}

MockServer::~MockServer() { stop(); }

int MockServer::port() const { return impl_->port; }

std::string MockServer::endpoint() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

MockStats MockServer::stats() const {
  std::lock_guard lock(impl_->mu);
  return MockStats{impl_->max_inflight, impl_->attempts};
}

void MockServer::stop() {
  impl_->http.stop();
  if (impl_->thread.joinable() && impl_->thread.get_id() != std::this_thread::get_id())
    impl_->thread.join();
}

std::unique_ptr<MockServer> serve(const MockScript& script, int port) {
  return std::make_unique<MockServer>(script, port);
}

}  // namespace evalkit
