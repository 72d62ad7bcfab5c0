// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "evalkit/errors.hpp"

namespace evalkit {

std::string to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::ok:
      return "ok";
    case TaskStatus::error:
      return "error";
    case TaskStatus::interrupted:
      return "interrupted";
  }
  return "error";
}

TaskStatus task_status_from_string(const std::string& s) {
  if (s == "ok") return TaskStatus::ok;
  if (s == "error") return TaskStatus::error;
  if (s == "interrupted") return TaskStatus::interrupted;
  throw std::invalid_argument("unknown task status '" + s + "'");
}

std::optional<double> TaskReport::metric(const std::string& metric_id) const {
  for (const auto& [id, v] : metrics)
    if (id == metric_id) return v;
  return std::nullopt;
}

const TaskReport* RunReport::task(const std::string& name) const {
  for (const auto& t : tasks)
    if (t.task == name) return &t;
  return nullptr;
}

bool RunReport::complete() const {
  return !interrupted && std::all_of(tasks.begin(), tasks.end(), [](const TaskReport& t) {
    return t.status == TaskStatus::ok;
  });
}

ojson to_json(const TaskReport& t) {
  ojson metrics = ojson::object();
  for (const auto& [id, v] : t.metrics) metrics[id] = v;
  ojson j{{"task", t.task},
          {"capability", t.capability},
          {"status", to_string(t.status)},
          {"n_instances", t.n_instances},
          {"n_failed", t.n_failed},
          {"metrics", metrics}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

TaskReport task_report_from_json(const ojson& j) {
  TaskReport t;
  t.task = j.at("task").get<std::string>();
  t.capability = j.value("capability", "");
  t.status = task_status_from_string(j.value("status", "ok"));
  t.error = j.value("error", "");
  t.n_instances = j.value("n_instances", std::size_t{0});
  t.n_failed = j.value("n_failed", std::size_t{0});
  const ojson metrics = j.value("metrics", ojson::object());
  for (const auto& [id, v] : metrics.items()) t.metrics.emplace_back(id, v.get<double>());
  return t;
}

ojson to_json(const RunReport& r) {
  ojson tasks = ojson::array();
  for (const auto& t : r.tasks) tasks.push_back(to_json(t));
  return ojson{{"model", r.model},
               {"model_family", r.model_family},
               {"tokenizer", r.tokenizer},
               {"f1_mode", r.f1_mode},
               {"interrupted", r.interrupted},
               {"wall_time_s", r.wall_time_s},
               {"tasks", tasks},
               {"config", r.config}};
}

RunReport run_report_from_json(const ojson& j) {
  RunReport r;
  r.model = j.at("model").get<std::string>();
  r.model_family = j.value("model_family", "");
  r.tokenizer = j.value("tokenizer", "whitespace");
  r.f1_mode = j.value("f1_mode", "pooled");
  r.interrupted = j.value("interrupted", false);
  r.wall_time_s = j.value("wall_time_s", 0.0);
  for (const auto& t : j.at("tasks")) r.tasks.push_back(task_report_from_json(t));
  r.config = j.value("config", ojson::object());
  return r;
}

RunReport load_run_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return run_report_from_json(ojson::parse(in));
  } catch (const ojson::exception& e) {
    throw std::runtime_error("bad report " + path.string() + ": " + e.what());
  }
}

ojson canonicalize(ojson j) {
  if (j.is_object()) {
    j.erase("latency_ms");
    j.erase("wall_time_s");
    for (auto& [key, v] : j.items()) v = canonicalize(std::move(v));
  } else if (j.is_array()) {
    for (auto& v : j) v = canonicalize(std::move(v));
  }
  return j;
}

std::optional<double> ScoreGrid::at(const std::string& benchmark,
                                    const std::string& model) const {
  auto it = cells.find({benchmark, model});
  if (it == cells.end()) return std::nullopt;
  return it->second;
}

ScoreGrid build_grid(const std::vector<RunReport>& reports,
                     const std::optional<std::string>& metric_id) {
  ScoreGrid g;
  for (const auto& r : reports) {
    if (std::find(g.models.begin(), g.models.end(), r.model) == g.models.end())
      g.models.push_back(r.model);
    for (const auto& t : r.tasks) {
      if (std::find(g.benchmarks.begin(), g.benchmarks.end(), t.task) == g.benchmarks.end())
        g.benchmarks.push_back(t.task);
      if (!t.capability.empty()) g.capability.emplace(t.task, t.capability);
      if (t.status != TaskStatus::ok || t.metrics.empty()) continue;
      std::optional<double> v =
          metric_id ? t.metric(*metric_id) : std::optional<double>(t.metrics.front().second);
      if (v) g.cells[{t.task, r.model}] = *v;
    }
  }
  return g;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "table") return ReportFormat::table;
  if (s == "json") return ReportFormat::json;
  if (s == "markdown") return ReportFormat::markdown;
  throw std::invalid_argument("unknown report format '" + s + "'");
}

namespace {

std::string percent(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

std::string render_grid(const ScoreGrid& grid, ReportFormat format) {
  if (format == ReportFormat::json) {
    ojson rows = ojson::array();
    for (const auto& b : grid.benchmarks) {
      ojson scores = ojson::object();
      for (const auto& m : grid.models) {
        auto v = grid.at(b, m);
        scores[m] = v ? ojson(*v) : ojson(nullptr);
      }
      auto cap = grid.capability.find(b);
      rows.push_back(ojson{{"benchmark", b},
                           {"capability", cap == grid.capability.end() ? "" : cap->second},
                           {"scores", scores}});
    }
    return ojson{{"models", grid.models}, {"rows", rows}}.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"benchmark"};
  header.insert(header.end(), grid.models.begin(), grid.models.end());
  for (const auto& b : grid.benchmarks) {
    std::vector<std::string> row{b};
    for (const auto& m : grid.models) row.push_back(percent(grid.at(b, m)));
    rows.push_back(std::move(row));
  }

  std::ostringstream out;
  if (format == ReportFormat::markdown) {
    auto line = [&](const std::vector<std::string>& cells) {
      out << "|";
      for (const auto& c : cells) out << " " << c << " |";
      out << "\n";
    };
    line(header);
    out << "|---|";
    for (std::size_t i = 0; i < grid.models.size(); ++i) out << "---:|";
    out << "\n";
    for (const auto& r : rows) line(r);
    return out.str();
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << "  ";
      out << pad(cells[c], width[c], c > 0);
    }
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::vector<RunReport> collect_reports(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<RunReport> reports;
  if (fs::is_regular_file(dir / "report.json")) {
    reports.push_back(load_run_report(dir / "report.json"));
    return reports;
  }
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::is_regular_file(e.path() / "report.json"))
      paths.push_back(e.path() / "report.json");
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) reports.push_back(load_run_report(p));
  return reports;
}

}  // namespace evalkit
