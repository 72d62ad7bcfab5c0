// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evalkit/corpus.hpp"
#include "evalkit/metrics.hpp"

namespace evalkit {

enum class EvalMode { generation, loglikelihood };
std::string to_string(EvalMode m);
EvalMode eval_mode_from_string(const std::string& s);

// Declarative task definition, loaded from a JSON task file.
struct TaskSpec {
  std::string name;
  std::string capability;
  EvalMode eval_mode = EvalMode::generation;
  std::string template_id = "mc_default";
  int fewshot_k = 0;
  // Items split off the dataset as the exemplar pool. Must be >= fewshot_k.
  int fewshot_pool = 0;
  bool cot = false;
  // nullopt: resolved from the rule registry by (task, model family).
  std::optional<std::vector<std::string>> postproc_chain;
  std::vector<std::string> metrics;
  std::string data_path;
  std::string schema_id = "unified";
  // Generations per instance; pass@k needs n_samples >= k.
  int n_samples = 1;
  // Label counted as positive by the binary F1 metric.
  std::string positive_label = "yes";
  NormalizationSpec normalization;
};

// Relative data_path is resolved against base_dir.
TaskSpec task_spec_from_json(const ojson& j, const std::filesystem::path& base_dir = {});
ojson to_json(const TaskSpec& t);
TaskSpec load_task_spec(const std::filesystem::path& path);

NormalizationSpec normalization_from_json(const ojson& j);
ojson to_json(const NormalizationSpec& n);

// Throws TaskLoadError when a task definition is inconsistent with itself or with the
// loaded items (loglikelihood mode needs target_scores everywhere, few-shot
// needs a pool).
void validate_task(const TaskSpec& task, const std::vector<DocItem>& items);

}  // namespace evalkit
