// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evalkit/gateway.hpp"
#include "evalkit/report.hpp"

namespace evalkit {

struct RunConfig {
  std::string model_endpoint;
  // Taken from the backend's /health when empty.
  std::string model_name;
  // Selects post-processing bindings.
  std::string model_family = "base";
  std::vector<std::filesystem::path> tasks;
  GenerationParams params;
  std::size_t concurrency = 8;
  RetryPolicy retry;
  double timeout_s = 120.0;
  std::filesystem::path output_dir = "runs";
  std::uint64_t seed = 0;
  std::optional<std::size_t> limit;
  std::filesystem::path templates_dir;
  std::vector<std::filesystem::path> schema_files;
  std::string judge_endpoint;
  std::string judge_rubric;
  std::vector<std::string> sandbox_command;
  double sandbox_timeout_s = 10.0;
};

// Relative paths are resolved against base_dir. Throws TaskLoadError.
RunConfig run_config_from_json(const ojson& j, const std::filesystem::path& base_dir = {});
ojson to_json(const RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);

// Fields that determine results. Two configs with equal fingerprints produce
// the same records against a deterministic backend.
ojson config_fingerprint(const RunConfig& c);

struct EvalRecord {
  std::string task;
  std::string instance_id;
  EvalMode mode = EvalMode::generation;
  std::string prompt_text;
  std::vector<std::string> exemplar_ids;
  // Generation: one entry per sample.
  std::vector<std::string> raw_outputs;
  std::vector<std::string> processed_outputs;
  // Loglikelihood.
  std::vector<double> logprob_sums;
  std::vector<std::int64_t> token_counts;
  std::string gold;
  std::vector<std::pair<std::string, double>> scores;
  // Binary labels for pooled F1: {pred, gold}.
  std::optional<std::pair<int, int>> f1_labels;
  // Samples that passed the sandbox tests, for pass@k tasks.
  std::optional<int> n_passed;
  int attempts = 0;
  double latency_ms = 0.0;
  std::string finish_reason;
  std::string error;

  bool failed() const { return !error.empty(); }
  const std::string& processed_output() const;
  std::optional<double> score(const std::string& metric_id) const;
};

ojson to_json(const EvalRecord& r);
EvalRecord eval_record_from_json(const ojson& j);
std::vector<EvalRecord> load_records(const std::filesystem::path& path);

// Mean of per-record scores; pooled counts for "f1". Throws EmptyRecords or
// MissingMetric.
double aggregate(std::span<const EvalRecord> records, const std::string& metric_id);

// True for ids the runner knows how to score ("pass@<k>" included).
bool is_known_metric(const std::string& metric_id);

struct RunOptions {
  // Stop after this many new requests have been sent (tests simulate an
  // interruption with it).
  std::optional<std::size_t> dispatch_budget;
  const std::atomic<bool>* cancel = nullptr;
  std::function<void(const std::string&)> log;
};

// Layout under output_dir/<model>/: config.snapshot.json, report.json and
// per task <task>/responses.jsonl (cache) plus <task>/records.jsonl.
// Throws EndpointDown before any dispatch if the backend is not healthy.
RunReport run(const RunConfig& config, const RunOptions& options = {});

// Continues the run stored in dir (output_dir or output_dir/<model>) from
// its snapshot. A supplied config must match the snapshot (ConfigMismatch);
// an unreadable cache throws CorruptCache.
RunReport resume(const std::filesystem::path& dir,
                 const std::optional<RunConfig>& supplied = std::nullopt,
                 const RunOptions& options = {});

std::filesystem::path model_dir(const std::filesystem::path& output_dir,
                                const std::string& model_name);

}  // namespace evalkit
