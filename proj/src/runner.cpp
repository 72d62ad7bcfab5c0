// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/runner.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "evalkit/errors.hpp"
#include "evalkit/judge.hpp"
#include "evalkit/metrics.hpp"
#include "evalkit/postproc.hpp"
#include "evalkit/prompting.hpp"
#include "evalkit/sandbox_client.hpp"
#include "evalkit/util.hpp"

namespace evalkit {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSnapshotFile = "config.snapshot.json";
constexpr const char* kReportFile = "report.json";
constexpr const char* kCacheFile = "responses.jsonl";
constexpr const char* kRecordsFile = "records.jsonl";

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::optional<std::int64_t> pass_k_of(const std::string& metric_id) {
  if (!starts_with(metric_id, "pass@")) return std::nullopt;
  const char* first = metric_id.data() + 5;
  const char* last = metric_id.data() + metric_id.size();
  std::int64_t k = 0;
  auto [ptr, ec] = std::from_chars(first, last, k);
  if (ec != std::errc{} || ptr != last || first == last || k < 1) return std::nullopt;
  return k;
}

}  // namespace

RunConfig run_config_from_json(const ojson& j, const fs::path& base_dir) {
  try {
    RunConfig c;
    c.model_endpoint = j.value("model_endpoint", "");
    if (c.model_endpoint.empty()) c.model_endpoint = default_endpoint();
    c.model_name = j.value("model_name", "");
    c.model_family = j.value("model_family", "base");
    for (const auto& t : j.at("tasks"))
      c.tasks.push_back(resolve(t.get<std::string>(), base_dir));
    if (j.contains("params")) c.params = params_from_json(j.at("params"));
    c.concurrency = j.value("concurrency", std::size_t{8});
    if (j.contains("retry")) c.retry = retry_policy_from_json(j.at("retry"));
    c.timeout_s = j.value("timeout_s", 120.0);
    c.output_dir = resolve(j.value("output_dir", "runs"), base_dir);
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("limit") && !j.at("limit").is_null()) {
      const auto limit = j.at("limit").get<std::int64_t>();
      if (limit < 1) throw TaskLoadError("limit must be >= 1");
      c.limit = static_cast<std::size_t>(limit);
    }
    c.templates_dir = resolve(j.value("templates_dir", ""), base_dir);
    for (const auto& s : j.value("schema_files", ojson::array()))
      c.schema_files.push_back(resolve(s.get<std::string>(), base_dir));
    c.judge_endpoint = j.value("judge_endpoint", "");
    c.judge_rubric = j.value("judge_rubric", std::string(kDefaultRubric));
    c.sandbox_command = j.value("sandbox_command", std::vector<std::string>{});
    c.sandbox_timeout_s = j.value("sandbox_timeout_s", 10.0);
    if (c.concurrency < 1) throw TaskLoadError("concurrency must be >= 1");
    return c;
  } catch (const ojson::exception& e) {
    throw TaskLoadError(std::string("bad run config: ") + e.what());
  }
}

ojson to_json(const RunConfig& c) {
  ojson tasks = ojson::array();
  for (const auto& t : c.tasks) tasks.push_back(t.string());
  ojson schemas = ojson::array();
  for (const auto& s : c.schema_files) schemas.push_back(s.string());
  return ojson{{"model_endpoint", c.model_endpoint},
               {"model_name", c.model_name},
               {"model_family", c.model_family},
               {"tasks", tasks},
               {"params", to_json(c.params)},
               {"concurrency", c.concurrency},
               {"retry", to_json(c.retry)},
               {"timeout_s", c.timeout_s},
               {"output_dir", c.output_dir.string()},
               {"seed", c.seed},
               {"limit", c.limit ? ojson(*c.limit) : ojson(nullptr)},
               {"templates_dir", c.templates_dir.string()},
               {"schema_files", schemas},
               {"judge_endpoint", c.judge_endpoint},
               {"judge_rubric", c.judge_rubric},
               {"sandbox_command", c.sandbox_command},
               {"sandbox_timeout_s", c.sandbox_timeout_s}};
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw TaskLoadError("cannot open run config " + path.string());
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const ojson::parse_error& e) {
    throw TaskLoadError("run config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

ojson config_fingerprint(const RunConfig& c) {
  const ojson full = to_json(c);
  ojson fp = ojson::object();
  for (const char* key : {"model_name", "model_family", "tasks", "params", "seed", "limit",
                          "templates_dir", "schema_files", "judge_rubric"})
    fp[key] = full.at(key);
  return fp;
}

// --- records ----------------------------------------------------------------

const std::string& EvalRecord::processed_output() const {
  static const std::string empty;
  return processed_outputs.empty() ? empty : processed_outputs.front();
}

std::optional<double> EvalRecord::score(const std::string& metric_id) const {
  for (const auto& [id, v] : scores)
    if (id == metric_id) return v;
  return std::nullopt;
}

ojson to_json(const EvalRecord& r) {
  ojson scores = ojson::object();
  for (const auto& [id, v] : r.scores) scores[id] = v;
  ojson j{{"task", r.task},
          {"instance_id", r.instance_id},
          {"mode", to_string(r.mode)},
          {"prompt_text", r.prompt_text},
          {"exemplar_ids", r.exemplar_ids}};
  if (r.mode == EvalMode::loglikelihood) {
    j["logprob_sums"] = r.logprob_sums;
    j["token_counts"] = r.token_counts;
  } else {
    j["raw_outputs"] = r.raw_outputs;
  }
  j["processed_outputs"] = r.processed_outputs;
  j["gold"] = r.gold;
  j["scores"] = scores;
  if (r.f1_labels) j["f1_labels"] = {r.f1_labels->first, r.f1_labels->second};
  if (r.n_passed) j["n_passed"] = *r.n_passed;
  j["attempts"] = r.attempts;
  j["latency_ms"] = r.latency_ms;
  j["finish_reason"] = r.finish_reason;
  j["error"] = r.error.empty() ? ojson(nullptr) : ojson(r.error);
  return j;
}

EvalRecord eval_record_from_json(const ojson& j) {
  EvalRecord r;
  r.task = j.at("task").get<std::string>();
  r.instance_id = j.at("instance_id").get<std::string>();
  r.mode = eval_mode_from_string(j.value("mode", "generation"));
  r.prompt_text = j.value("prompt_text", "");
  r.exemplar_ids = j.value("exemplar_ids", std::vector<std::string>{});
  r.raw_outputs = j.value("raw_outputs", std::vector<std::string>{});
  r.logprob_sums = j.value("logprob_sums", std::vector<double>{});
  r.token_counts = j.value("token_counts", std::vector<std::int64_t>{});
  r.processed_outputs = j.value("processed_outputs", std::vector<std::string>{});
  r.gold = j.value("gold", "");
  for (const auto& [id, v] : j.at("scores").items()) r.scores.emplace_back(id, v.get<double>());
  if (j.contains("f1_labels"))
    r.f1_labels = std::pair{j["f1_labels"].at(0).get<int>(), j["f1_labels"].at(1).get<int>()};
  if (j.contains("n_passed")) r.n_passed = j["n_passed"].get<int>();
  r.attempts = j.value("attempts", 0);
  r.latency_ms = j.value("latency_ms", 0.0);
  r.finish_reason = j.value("finish_reason", "");
  if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
  return r;
}

std::vector<EvalRecord> load_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (py_strip(line).empty()) continue;
    try {
      out.push_back(eval_record_from_json(ojson::parse(line)));
    } catch (const ojson::exception& e) {
      throw ParseError(n, e.what());
    }
  }
  return out;
}

double aggregate(std::span<const EvalRecord> records, const std::string& metric_id) {
  if (records.empty()) throw EmptyRecords("no records to aggregate for '" + metric_id + "'");
  if (metric_id == "f1") {
    double tp = 0, fp = 0, fn = 0;
    for (const auto& r : records) {
      if (!r.f1_labels)
        throw MissingMetric("record '" + r.instance_id + "' has no f1 labels");
      const auto [pred, gold] = *r.f1_labels;
      tp += pred && gold;
      fp += pred && !gold;
      fn += !pred && gold;
    }
    return prf_from_counts(tp, fp, fn).f1;
  }
  double sum = 0.0;
  for (const auto& r : records) {
    auto v = r.score(metric_id);
    if (!v)
      throw MissingMetric("record '" + r.instance_id + "' has no score for '" + metric_id + "'");
    sum += *v;
  }
  return sum / static_cast<double>(records.size());
}

bool is_known_metric(const std::string& metric_id) {
  static const std::set<std::string> known{"accuracy", "accuracy_norm", "exact_match",
                                           "in_match",  "prefix_match",  "f1",
                                           "rouge_1",   "rouge_2",       "rouge_l",
                                           "judge"};
  return known.count(metric_id) > 0 || pass_k_of(metric_id).has_value();
}

fs::path model_dir(const fs::path& output_dir, const std::string& model_name) {
  std::string safe = model_name.empty() ? "model" : model_name;
  for (char& c : safe)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
      c = '_';
  return output_dir / safe;
}

// --- pipeline -----------------------------------------------------------------

namespace {

struct CachedResponse {
  ojson body;
  int attempts = 0;
  double latency_ms = 0.0;
};

std::string cache_key(const std::string& task, const GenerationRequest& req) {
  ojson k{{"task", task},
          {"instance_id", req.instance_id},
          {"prompt", req.prompt},
          {"params", to_json(req.params)},
          {"mode", to_string(req.mode)},
          {"continuations", req.continuations}};
  return to_hex(fnv1a64(k.dump()));
}

// A torn final line (no trailing newline) is the signature of an interrupted
// write and is dropped; anything else unreadable is corruption.
std::unordered_map<std::string, CachedResponse> load_cache(const fs::path& path) {
  std::unordered_map<std::string, CachedResponse> cache;
  std::ifstream in(path, std::ios::binary);
  if (!in) return cache;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0, line = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool torn = nl == std::string::npos;
    const std::string text = content.substr(pos, torn ? std::string::npos : nl - pos);
    pos = torn ? content.size() : nl + 1;
    ++line;
    if (py_strip(text).empty()) continue;
    try {
      const auto j = ojson::parse(text);
      CachedResponse c;
      c.body = j.at("response");
      c.attempts = j.at("attempts").get<int>();
      c.latency_ms = j.value("latency_ms", 0.0);
      cache[j.at("key").get<std::string>()] = std::move(c);
    } catch (const ojson::exception& e) {
      if (torn) break;
      throw CorruptCache(path.string() + " line " + std::to_string(line) + ": " + e.what() +
                         "; inspect the file or delete it to start the task over");
    }
  }
  return cache;
}

struct PreparedTask {
  TaskSpec spec;
  std::vector<DocItem> items;
  std::vector<RenderedPrompt> prompts;
  std::vector<GenerationRequest> requests;
  // Request indices of each item's samples.
  std::vector<std::vector<std::size_t>> item_requests;
  PostprocChain chain;
  std::vector<std::int64_t> pass_ks;
};

std::string gold_of(const DocItem& item) {
  const int g = item.gold_index();
  if (g >= 0) return std::string(1, static_cast<char>('A' + g));
  return item.answer;
}

PreparedTask prepare_task(const fs::path& task_path, const RunConfig& config,
                          const TemplateLibrary& templates, const SchemaRegistry& schemas,
                          const RuleRegistry& rules) {
  PreparedTask t;
  t.spec = load_task_spec(task_path);
  const TaskSpec& spec = t.spec;

  for (const auto& m : spec.metrics) {
    if (!is_known_metric(m)) throw TaskLoadError("task '" + spec.name + "': unknown metric '" + m + "'");
    if (auto k = pass_k_of(m)) {
      if (spec.n_samples < *k)
        throw TaskLoadError("task '" + spec.name + "': " + m + " needs n_samples >= " +
                            std::to_string(*k));
      if (config.sandbox_command.empty())
        throw TaskLoadError("task '" + spec.name + "': " + m + " needs a sandbox_command");
      t.pass_ks.push_back(*k);
    }
    if (m == "judge" && config.judge_endpoint.empty())
      throw TaskLoadError("task '" + spec.name + "': judge metric needs a judge_endpoint");
    if ((m == "accuracy_norm") && spec.eval_mode != EvalMode::loglikelihood)
      throw TaskLoadError("task '" + spec.name + "': accuracy_norm needs loglikelihood mode");
  }
  if (std::set<std::string>(spec.metrics.begin(), spec.metrics.end()).size() !=
      spec.metrics.size())
    throw TaskLoadError("task '" + spec.name + "': duplicate metric");

  const PromptTemplate* tpl = nullptr;
  try {
    tpl = &templates.get(spec.template_id);
    const auto chain_ids =
        spec.postproc_chain ? *spec.postproc_chain : rules.resolve(spec.name, config.model_family);
    t.chain = rules.build(chain_ids);
  } catch (const Error& e) {
    throw TaskLoadError("task '" + spec.name + "': " + e.what());
  }

  std::vector<DocItem> all;
  try {
    all = load_dataset(spec.data_path, spec.schema_id, spec.name, schemas);
  } catch (const Error& e) {
    throw TaskLoadError("task '" + spec.name + "': " + e.what());
  }
  validate_task(spec, all);

  FewshotSplit split;
  if (spec.fewshot_pool > 0)
    split = split_fewshot_pool(all, static_cast<std::size_t>(spec.fewshot_pool), config.seed);
  else
    split.eval_set = std::move(all);
  t.items = std::move(split.eval_set);
  if (config.limit && t.items.size() > *config.limit) t.items.resize(*config.limit);

  const int samples = spec.eval_mode == EvalMode::loglikelihood ? 1 : spec.n_samples;
  try {
    for (const auto& item : t.items) {
      auto prompt = assemble_fewshot(item, split.pool, static_cast<std::size_t>(spec.fewshot_k),
                                     config.seed, *tpl, spec.cot, spec.eval_mode);
      std::vector<std::size_t> idx;
      for (int s = 0; s < samples; ++s) {
        GenerationRequest req;
        req.instance_id = samples > 1 ? item.id + "#" + std::to_string(s) : item.id;
        req.prompt = prompt.text;
        req.params = config.params;
        req.mode = spec.eval_mode;
        if (spec.eval_mode == EvalMode::loglikelihood)
          req.continuations = render_continuations(item, *tpl);
        idx.push_back(t.requests.size());
        t.requests.push_back(std::move(req));
      }
      t.item_requests.push_back(std::move(idx));
      t.prompts.push_back(std::move(prompt));
    }
  } catch (const Error& e) {
    throw TaskLoadError("task '" + spec.name + "': " + e.what());
  }
  return t;
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

void score_record(EvalRecord& rec, const DocItem& item, const TaskSpec& spec,
                  const RunConfig& config) {
  const auto& norm = spec.normalization;
  const std::string& pred = rec.processed_output();
  const int gold_label = exact_match(rec.gold, spec.positive_label, norm);
  if (rec.failed()) {
    for (const auto& m : spec.metrics) rec.scores.emplace_back(m, 0.0);
    rec.f1_labels = std::pair{0, gold_label};
    return;
  }
  for (const auto& m : spec.metrics) {
    double v = 0.0;
    if (m == "accuracy" || m == "accuracy_norm") {
      if (spec.eval_mode == EvalMode::loglikelihood)
        v = mc_accuracy(rec.logprob_sums, rec.token_counts, item.target_scores,
                        m == "accuracy_norm");
      else
        v = exact_match(pred, rec.gold, norm);
    } else if (m == "exact_match") {
      v = exact_match(pred, rec.gold, norm);
    } else if (m == "in_match") {
      v = in_match(pred, rec.gold, norm);
    } else if (m == "prefix_match") {
      v = prefix_match(pred, rec.gold, norm);
    } else if (m == "f1") {
      const int p = exact_match(pred, spec.positive_label, norm);
      rec.f1_labels = std::pair{p, gold_label};
      v = prf_from_counts(p && gold_label, p && !gold_label, !p && gold_label).f1;
    } else if (m == "rouge_1" || m == "rouge_2") {
      v = rouge_n(normalize(pred, norm), normalize(rec.gold, norm), m == "rouge_1" ? 1 : 2).f1;
    } else if (m == "rouge_l") {
      v = rouge_l(normalize(pred, norm), normalize(rec.gold, norm)).f1;
    } else if (auto k = pass_k_of(m)) {
      if (rec.n_passed)
        v = pass_at_k({static_cast<std::int64_t>(rec.processed_outputs.size()), *rec.n_passed, *k});
    } else if (m == "judge") {
      JudgeOptions opts;
      opts.client.timeout =
          std::chrono::milliseconds(static_cast<std::int64_t>(config.timeout_s * 1000));
      opts.instance_id = "judge:" + rec.instance_id;
      try {
        v = judge(pred, rec.gold, config.judge_rubric, config.judge_endpoint, opts).score;
      } catch (const Error& e) {
        rec.error = std::string("judge: ") + e.what();
        v = 0.0;
      }
    }
    rec.scores.emplace_back(m, v);
  }
}

// Runs the sandbox on every sample of every healthy record, `workers` jobs at
// a time, and fills n_passed.
void run_sandbox(std::vector<EvalRecord>& records, const std::vector<DocItem>& items,
                 const RunConfig& config) {
  const SandboxRunner runner(config.sandbox_command);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t r = 0; r < records.size(); ++r)
    if (!records[r].failed())
      for (std::size_t s = 0; s < records[r].processed_outputs.size(); ++s) jobs.emplace_back(r, s);

  std::vector<std::optional<ExecutionResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      const auto [r, s] = jobs[i];
      const DocItem& item = items[r];
      auto meta = [&](const char* key) {
        auto it = item.metadata.find(key);
        return it == item.metadata.end() ? std::string() : it->second;
      };
      ExecutionJob job;
      job.candidate_code = meta("prompt_code") + records[r].processed_outputs[s];
      job.test_code = meta("test");
      job.entry_point = meta("entry_point");
      job.timeout_s = config.sandbox_timeout_s;
      try {
        results[i] = runner.execute(job);
      } catch (const HarnessFailure& e) {
        errors[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(config.concurrency, std::max<std::size_t>(jobs.size(), 1));
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    EvalRecord& rec = records[jobs[i].first];
    if (!rec.n_passed) rec.n_passed = 0;
    if (results[i] && results[i]->status == ExecStatus::pass) ++*rec.n_passed;
    if (!errors[i].empty() && rec.error.empty()) rec.error = "sandbox: " + errors[i];
  }
}

void write_lines_atomically(const fs::path& path, const std::vector<ojson>& lines) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& j : lines) out << dump_line(j) << "\n";
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const ojson& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump(2, ' ', false, ojson::error_handler_t::replace) << "\n";
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct Budget {
  std::optional<std::size_t> remaining;
};

// Best guess at a task's name when its spec could not be prepared.
std::string task_name_hint(const fs::path& task_path) {
  try {
    std::ifstream in(task_path);
    const auto j = ojson::parse(in);
    if (j.is_object() && j.contains("name") && j["name"].is_string())
      return j["name"].get<std::string>();
  } catch (const ojson::exception&) {
  }
  if (task_path.stem() == "task" && task_path.has_parent_path())
    return task_path.parent_path().filename().string();
  return task_path.stem().string();
}

TaskReport execute_task(const fs::path& task_path, const RunConfig& config,
                        const fs::path& mdir, const TemplateLibrary& templates,
                        const SchemaRegistry& schemas, const RuleRegistry& rules,
                        const RunOptions& options, Budget& budget) {
  TaskReport report;
  PreparedTask t;
  try {
    t = prepare_task(task_path, config, templates, schemas, rules);
  } catch (const Error& e) {
    report.task = task_name_hint(task_path);
    report.status = TaskStatus::error;
    report.error = e.what();
    if (options.log) options.log("task " + task_path.string() + " skipped: " + e.what());
    return report;
  }
  const TaskSpec& spec = t.spec;
  report.task = spec.name;
  report.capability = spec.capability;

  const fs::path tdir = mdir / spec.name;
  fs::create_directories(tdir);
  const fs::path cache_path = tdir / kCacheFile;
  auto cache = load_cache(cache_path);

  std::vector<std::string> keys;
  std::vector<std::optional<GenerationResponse>> responses(t.requests.size());
  std::vector<GenerationRequest> pending;
  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < t.requests.size(); ++i) {
    const auto& req = t.requests[i];
    keys.push_back(cache_key(spec.name, req));
    index_of[req.instance_id] = i;
    auto hit = cache.find(keys.back());
    if (hit != cache.end()) {
      try {
        auto resp = response_from_wire(hit->second.body, req);
        resp.attempts = hit->second.attempts;
        resp.latency_ms = hit->second.latency_ms;
        responses[i] = std::move(resp);
        continue;
      } catch (const ProtocolError& e) {
        throw CorruptCache(cache_path.string() + ": entry for '" + req.instance_id +
                           "' does not answer its request (" + e.what() + ")");
      }
    }
    pending.push_back(req);
  }
  if (budget.remaining) {
    if (pending.size() > *budget.remaining) pending.resize(*budget.remaining);
    *budget.remaining -= pending.size();
  }
  if (options.log)
    options.log("task " + spec.name + ": " + std::to_string(t.requests.size() - pending.size()) +
                " cached, " + std::to_string(pending.size()) + " to send");

  if (!pending.empty()) {
    std::ofstream out(cache_path, std::ios::binary | std::ios::app);
    DispatchOptions dopts;
    dopts.concurrency = config.concurrency;
    dopts.retry = config.retry;
    dopts.client.timeout =
        std::chrono::milliseconds(static_cast<std::int64_t>(config.timeout_s * 1000));
    dopts.jitter_seed = config.seed;
    dopts.cancel = options.cancel;
    dispatch_batch(config.model_endpoint, pending, dopts, [&](GenerationResponse resp) {
      const std::size_t i = index_of.at(resp.instance_id);
      if (resp.finish_reason != FinishReason::error) {
        ojson line{{"key", keys[i]},
                   {"instance_id", resp.instance_id},
                   {"response", to_wire(resp)},
                   {"attempts", resp.attempts},
                   {"latency_ms", resp.latency_ms}};
        out << dump_line(line) << "\n";
        out.flush();
      }
      responses[i] = std::move(resp);
    });
  }

  const bool complete =
      std::all_of(responses.begin(), responses.end(), [](const auto& r) { return r.has_value(); });
  if (!complete) {
    report.status = TaskStatus::interrupted;
    report.error = "interrupted before every request was answered";
    report.n_instances = t.items.size();
    return report;
  }

  std::vector<EvalRecord> records;
  records.reserve(t.items.size());
  for (std::size_t n = 0; n < t.items.size(); ++n) {
    const DocItem& item = t.items[n];
    EvalRecord rec;
    rec.task = spec.name;
    rec.instance_id = item.id;
    rec.mode = spec.eval_mode;
    rec.prompt_text = t.prompts[n].text;
    rec.exemplar_ids = t.prompts[n].exemplar_ids;
    rec.gold = gold_of(item);
    RuleContext ctx;
    if (auto it = item.metadata.find("entry_point"); it != item.metadata.end())
      ctx.entry_point = it->second;
    ctx.num_choices = item.target_scores.size();
    for (std::size_t ri : t.item_requests[n]) {
      const GenerationResponse& resp = *responses[ri];
      rec.attempts += resp.attempts;
      rec.latency_ms += resp.latency_ms;
      rec.finish_reason = to_string(resp.finish_reason);
      if (resp.finish_reason == FinishReason::error) {
        if (rec.error.empty()) rec.error = resp.error.empty() ? "request failed" : resp.error;
        continue;
      }
      if (spec.eval_mode == EvalMode::loglikelihood) {
        rec.logprob_sums = resp.logprob_sums.value_or(std::vector<double>{});
        rec.token_counts = resp.token_counts.value_or(std::vector<std::int64_t>{});
        if (rec.logprob_sums.empty()) {
          rec.error = "empty loglikelihood response";
          continue;
        }
        rec.processed_outputs.push_back(
            std::string(1, static_cast<char>('A' + argmax_lowest(rec.logprob_sums))));
      } else {
        const std::string raw = resp.text.value_or("");
        rec.processed_outputs.push_back(t.chain.apply(raw, ctx));
        rec.raw_outputs.push_back(raw);
      }
    }
    records.push_back(std::move(rec));
  }

  if (!t.pass_ks.empty()) run_sandbox(records, t.items, config);
  for (std::size_t n = 0; n < records.size(); ++n)
    score_record(records[n], t.items[n], spec, config);

  std::vector<ojson> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_lines_atomically(tdir / kRecordsFile, lines);

  report.n_instances = records.size();
  report.n_failed = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.failed(); }));
  for (const auto& m : spec.metrics)
    report.metrics.emplace_back(m, records.empty() ? 0.0 : aggregate(records, m));
  if (options.log) options.log("task " + spec.name + ": done");
  return report;
}

RunConfig absolutize(RunConfig c) {
  for (auto& t : c.tasks) t = fs::absolute(t);
  if (!c.templates_dir.empty()) c.templates_dir = fs::absolute(c.templates_dir);
  for (auto& s : c.schema_files) s = fs::absolute(s);
  c.output_dir = fs::absolute(c.output_dir);
  return c;
}

RunReport execute(const RunConfig& config, const fs::path& mdir, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  TemplateLibrary templates;
  if (!config.templates_dir.empty()) templates.load_dir(config.templates_dir);
  SchemaRegistry schemas = SchemaRegistry::with_builtins();
  for (const auto& s : config.schema_files) schemas.load_file(s);
  const RuleRegistry rules = RuleRegistry::with_builtins();

  RunReport report;
  report.model = config.model_name;
  report.model_family = config.model_family;
  report.config = to_json(config);
  Budget budget{options.dispatch_budget};
  for (const auto& task_path : config.tasks) {
    report.tasks.push_back(
        execute_task(task_path, config, mdir, templates, schemas, rules, options, budget));
    if (report.tasks.back().status == TaskStatus::interrupted) report.interrupted = true;
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(mdir / kReportFile, to_json(report));
  return report;
}

std::string healthy_model_name(const RunConfig& config) {
  const auto health = probe_health(config.model_endpoint);
  if (!health.ready)
    throw EndpointDown("backend at " + config.model_endpoint + " is not reachable or not ready");
  return health.model_name;
}

}  // namespace

RunReport run(const RunConfig& config, const RunOptions& options) {
  RunConfig c = absolutize(config);
  const std::string served = healthy_model_name(c);
  if (c.model_name.empty()) c.model_name = served.empty() ? "model" : served;
  const fs::path mdir = model_dir(c.output_dir, c.model_name);
  fs::create_directories(mdir);
  write_json(mdir / kSnapshotFile, to_json(c));
  return execute(c, mdir, options);
}

RunReport resume(const fs::path& dir, const std::optional<RunConfig>& supplied,
                 const RunOptions& options) {
  fs::path mdir = dir;
  if (!fs::is_regular_file(mdir / kSnapshotFile)) {
    std::vector<fs::path> found;
    if (fs::is_directory(dir))
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::is_regular_file(e.path() / kSnapshotFile))
          found.push_back(e.path());
    if (found.size() != 1)
      throw CorruptCache("no unique " + std::string(kSnapshotFile) + " under " + dir.string());
    mdir = found.front();
  }
  RunConfig snap;
  try {
    std::ifstream in(mdir / kSnapshotFile);
    snap = run_config_from_json(ojson::parse(in));
  } catch (const ojson::exception& e) {
    throw CorruptCache((mdir / kSnapshotFile).string() + ": " + e.what());
  } catch (const TaskLoadError& e) {
    throw CorruptCache((mdir / kSnapshotFile).string() + ": " + e.what());
  }

  RunConfig c = snap;
  if (supplied) {
    RunConfig s = absolutize(*supplied);
    if (s.model_name.empty()) s.model_name = snap.model_name;
    if (config_fingerprint(s) != config_fingerprint(snap))
      throw ConfigMismatch("supplied config differs from the snapshot in " +
                           (mdir / kSnapshotFile).string());
    c = s;
    c.output_dir = snap.output_dir;
  }
  healthy_model_name(c);
  return execute(c, mdir, options);
}

}  // namespace evalkit
