// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/task.hpp"

#include <fstream>

#include "evalkit/errors.hpp"

namespace evalkit {

std::string to_string(EvalMode m) {
  return m == EvalMode::generation ? "generation" : "loglikelihood";
}

EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "generation") return EvalMode::generation;
  if (s == "loglikelihood") return EvalMode::loglikelihood;
  throw Error("unknown eval_mode '" + s + "'");
}

NormalizationSpec normalization_from_json(const ojson& j) {
  NormalizationSpec n;
  n.lowercase = j.value("lowercase", n.lowercase);
  n.strip_punct = j.value("strip_punct", n.strip_punct);
  n.collapse_ws = j.value("collapse_ws", n.collapse_ws);
  n.unicode_nfc = j.value("unicode_nfc", n.unicode_nfc);
  return n;
}

ojson to_json(const NormalizationSpec& n) {
  return ojson{{"lowercase", n.lowercase},
               {"strip_punct", n.strip_punct},
               {"collapse_ws", n.collapse_ws},
               {"unicode_nfc", n.unicode_nfc}};
}

TaskSpec task_spec_from_json(const ojson& j, const std::filesystem::path& base_dir) {
  TaskSpec t;
  try {
    t.name = j.at("name").get<std::string>();
    t.capability = j.value("capability", "");
    t.eval_mode = eval_mode_from_string(j.value("eval_mode", "generation"));
    t.template_id = j.value("template_id", t.template_id);
    t.fewshot_k = j.value("fewshot_k", 0);
    t.fewshot_pool = j.value("fewshot_pool", t.fewshot_k > 0 ? t.fewshot_k : 0);
    t.cot = j.value("cot", false);
    if (auto it = j.find("postproc_chain"); it != j.end() && !it->is_null())
      t.postproc_chain = it->get<std::vector<std::string>>();
    t.metrics = j.at("metrics").get<std::vector<std::string>>();
    std::filesystem::path data = j.at("data_path").get<std::string>();
    t.data_path = (data.is_relative() && !base_dir.empty() ? base_dir / data : data)
                      .lexically_normal()
                      .string();
    t.schema_id = j.value("schema_id", t.schema_id);
    t.n_samples = j.value("n_samples", 1);
    t.positive_label = j.value("positive_label", t.positive_label);
    if (auto it = j.find("normalization"); it != j.end())
      t.normalization = normalization_from_json(*it);
  } catch (const ojson::exception& e) {
    throw TaskLoadError(std::string("bad task spec: ") + e.what());
  }
  if (t.fewshot_k < 0 || t.fewshot_pool < 0 || t.n_samples < 1)
    throw TaskLoadError("task '" + t.name + "': negative counts");
  if (t.fewshot_k > t.fewshot_pool)
    throw TaskLoadError("task '" + t.name + "': fewshot_k exceeds fewshot_pool");
  return t;
}

ojson to_json(const TaskSpec& t) {
  ojson j{{"name", t.name},
          {"capability", t.capability},
          {"eval_mode", to_string(t.eval_mode)},
          {"template_id", t.template_id},
          {"fewshot_k", t.fewshot_k},
          {"fewshot_pool", t.fewshot_pool},
          {"cot", t.cot},
          {"postproc_chain", nullptr},
          {"metrics", t.metrics},
          {"data_path", t.data_path},
          {"schema_id", t.schema_id},
          {"n_samples", t.n_samples},
          {"positive_label", t.positive_label},
          {"normalization", to_json(t.normalization)}};
  if (t.postproc_chain) j["postproc_chain"] = *t.postproc_chain;
  return j;
}

TaskSpec load_task_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TaskLoadError("cannot open task file " + path.string());
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const ojson::parse_error& e) {
    throw TaskLoadError(path.string() + ": " + e.what());
  }
  return task_spec_from_json(j, path.parent_path());
}

void validate_task(const TaskSpec& task, const std::vector<DocItem>& items) {
  if (task.eval_mode == EvalMode::loglikelihood) {
    for (const auto& item : items)
      if (!item.is_multiple_choice())
        throw TaskLoadError("task '" + task.name + "': loglikelihood mode but item '" +
                            item.id + "' has no target_scores");
  }
  if (task.fewshot_pool > 0 &&
      static_cast<std::size_t>(task.fewshot_pool) >= items.size())
    throw TaskLoadError("task '" + task.name + "': few-shot pool leaves no items to evaluate");
}

}  // namespace evalkit
