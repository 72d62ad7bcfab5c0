// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: run, resume, report, serve-mock, make-data,
// postproc.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "evalkit/corpus.hpp"
#include "evalkit/errors.hpp"
#include "evalkit/mockserver.hpp"
#include "evalkit/postproc.hpp"
#include "evalkit/report.hpp"
#include "evalkit/runner.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

void install_signal_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

int print_outcome(const evalkit::RunReport& report, const std::string& mdir_hint) {
  std::cout << evalkit::render_grid(evalkit::build_grid({report}), evalkit::ReportFormat::table);
  for (const auto& t : report.tasks)
    if (t.status != evalkit::TaskStatus::ok)
      std::cerr << "task " << t.task << ": " << to_string(t.status) << ": " << t.error << "\n";
  if (report.interrupted) std::cerr << "interrupted; continue with: eval resume " << mdir_hint << "\n";
  return report.complete() ? 0 : 1;
}

std::string read_all(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evalkit: batch evaluation of language models over an HTTP backend"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run every task in a config file");
  std::string config_path, endpoint;
  std::optional<std::size_t> limit;
  run_cmd->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--endpoint", endpoint, "Override model_endpoint");
  run_cmd->add_option("--limit", limit, "Per-task instance cap")->check(CLI::PositiveNumber);

  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  std::string resume_dir, resume_config;
  resume_cmd->add_option("dir", resume_dir, "output_dir or output_dir/<model>")->required();
  resume_cmd->add_option("--config", resume_config, "Config that must match the snapshot");

  auto* report_cmd = app.add_subcommand("report", "Print the model x benchmark grid");
  std::string report_dir, format = "table", metric;
  report_cmd->add_option("dir", report_dir, "output_dir or output_dir/<model>")->required();
  report_cmd->add_option("--format", format)->check(CLI::IsMember({"table", "json", "markdown"}));
  report_cmd->add_option("--metric", metric, "Metric to show (default: first of each task)");

  auto* mock_cmd = app.add_subcommand("serve-mock", "Serve the reference mock backend");
  std::string script_path, host = "127.0.0.1";
  int port = 8765;
  mock_cmd->add_option("--script", script_path, "Mock script (JSON)")->check(CLI::ExistingFile);
  mock_cmd->add_option("--port", port)->check(CLI::Range(0, 65535));
  mock_cmd->add_option("--host", host);

  auto* data_cmd = app.add_subcommand("make-data", "Normalize a source file to unified JSONL");
  std::string schema_id, in_path, out_path, task_name = "task";
  std::vector<std::string> schema_files;
  data_cmd->add_option("--schema", schema_id)->required();
  data_cmd->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
  data_cmd->add_option("--out", out_path)->required();
  data_cmd->add_option("--task", task_name, "Prefix for generated ids");
  data_cmd->add_option("--schema-file", schema_files, "Extra schema definitions");

  auto* pp_cmd = app.add_subcommand("postproc", "Apply post-processing rules to text");
  std::vector<std::string> rule_ids;
  std::string pp_in = "-", entry_point;
  std::size_t num_choices = 0;
  pp_cmd->add_option("--rule", rule_ids, "Rule id, repeatable, applied in order")->required();
  pp_cmd->add_option("--in", pp_in, "Input file or - for stdin");
  pp_cmd->add_option("--entry-point", entry_point);
  pp_cmd->add_option("--num-choices", num_choices);

  CLI11_PARSE(app, argc, argv);

  evalkit::RunOptions options;
  options.cancel = &g_stop;
  options.log = [](const std::string& m) { std::cerr << m << "\n"; };

  try {
    if (*run_cmd) {
      install_signal_handlers();
      auto config = evalkit::load_run_config(config_path);
      if (!endpoint.empty()) config.model_endpoint = endpoint;
      if (limit) config.limit = *limit;
      const auto report = evalkit::run(config, options);
      return print_outcome(report,
                           evalkit::model_dir(config.output_dir, report.model).string());
    }
    if (*resume_cmd) {
      install_signal_handlers();
      std::optional<evalkit::RunConfig> supplied;
      if (!resume_config.empty()) supplied = evalkit::load_run_config(resume_config);
      const auto report = evalkit::resume(resume_dir, supplied, options);
      return print_outcome(report, resume_dir);
    }
    if (*report_cmd) {
      const auto reports = evalkit::collect_reports(report_dir);
      if (reports.empty()) {
        std::cerr << "no report.json under " << report_dir << "\n";
        return 1;
      }
      const auto grid = evalkit::build_grid(
          reports, metric.empty() ? std::nullopt : std::optional<std::string>(metric));
      std::cout << evalkit::render_grid(grid, evalkit::report_format_from_string(format));
      return 0;
    }
    if (*mock_cmd) {
      install_signal_handlers();
      const auto script = script_path.empty() ? evalkit::MockScript{}
                                              : evalkit::load_mock_script(script_path);
      evalkit::MockServer server(script, port, host);
      std::cerr << "mock backend (" << script.model_name << ") on " << server.endpoint() << "\n";
      while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      return 0;
    }
    if (*data_cmd) {
      auto registry = evalkit::SchemaRegistry::with_builtins();
      for (const auto& f : schema_files) registry.load_file(f);
      const auto items = evalkit::load_dataset(in_path, schema_id, task_name, registry);
      evalkit::write_jsonl(out_path, items);
      std::cerr << items.size() << " items written to " << out_path << "\n";
      return 0;
    }
    if (*pp_cmd) {
      const auto registry = evalkit::RuleRegistry::with_builtins();
      const auto chain = registry.build(rule_ids);
      evalkit::RuleContext ctx{entry_point, num_choices};
      std::cout << chain.apply(read_all(pp_in), ctx);
      return 0;
    }
  } catch (const evalkit::ParseError& e) {
    std::cerr << "error (line " << e.line() << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
