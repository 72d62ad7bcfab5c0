// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evalkit/corpus.hpp"

namespace evalkit {

enum class TaskStatus { ok, error, interrupted };
std::string to_string(TaskStatus s);
TaskStatus task_status_from_string(const std::string& s);

struct TaskReport {
  std::string task;
  std::string capability;
  TaskStatus status = TaskStatus::ok;
  std::string error;
  std::size_t n_instances = 0;
  std::size_t n_failed = 0;
  // Metric id -> aggregate, in TaskSpec order.
  std::vector<std::pair<std::string, double>> metrics;

  std::optional<double> metric(const std::string& metric_id) const;
  bool operator==(const TaskReport&) const = default;
};

struct RunReport {
  std::string model;
  std::string model_family;
  std::vector<TaskReport> tasks;
  ojson config;
  std::string tokenizer = "whitespace";
  std::string f1_mode = "pooled";
  double wall_time_s = 0.0;
  bool interrupted = false;

  const TaskReport* task(const std::string& name) const;
  bool complete() const;
};

ojson to_json(const TaskReport& t);
TaskReport task_report_from_json(const ojson& j);
ojson to_json(const RunReport& r);
RunReport run_report_from_json(const ojson& j);
RunReport load_run_report(const std::filesystem::path& path);

// Drops wall-clock and latency fields so that two runs can be compared byte
// for byte.
ojson canonicalize(ojson j);

// Benchmarks as rows, models as columns. A cell holds the aggregate of the
// benchmark's primary (first) metric, or of `metric_id` when given.
struct ScoreGrid {
  std::vector<std::string> models;
  std::vector<std::string> benchmarks;
  std::map<std::string, std::string> capability;  // benchmark -> capability
  std::map<std::pair<std::string, std::string>, double> cells;  // (benchmark, model)

  std::optional<double> at(const std::string& benchmark, const std::string& model) const;
};

ScoreGrid build_grid(const std::vector<RunReport>& reports,
                     const std::optional<std::string>& metric_id = std::nullopt);

enum class ReportFormat { table, json, markdown };
ReportFormat report_format_from_string(const std::string& s);

// Scores are printed as percentages with one decimal; missing cells as "-".
std::string render_grid(const ScoreGrid& grid, ReportFormat format);

// Every <dir>/*/report.json, or <dir>/report.json itself, sorted by model.
std::vector<RunReport> collect_reports(const std::filesystem::path& dir);

}  // namespace evalkit
