// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/corpus.hpp"

#include <algorithm>
#include <set>

#include "evalkit/errors.hpp"
#include "evalkit/util.hpp"

namespace evalkit {

int DocItem::gold_index() const {
  for (std::size_t i = 0; i < target_scores.size(); ++i)
    if (target_scores[i].second == 1) return static_cast<int>(i);
  return -1;
}

std::optional<std::string> check_invariants(const DocItem& item) {
  std::set<std::string_view> seen;
  int ones = 0;
  for (const auto& [choice, score] : item.target_scores) {
    if (!seen.insert(choice).second) return "choice keys must be unique";
    if (score != 0 && score != 1) return "every score must be 0 or 1";
    ones += score;
  }
  if (!item.target_scores.empty() && ones != 1)
    return "exactly one target score must be 1";
  if (item.target_scores.empty() && item.answer.empty())
    return "item needs target_scores or a non-empty answer";
  return std::nullopt;
}

ojson to_json(const DocItem& item) {
  ojson scores = ojson::object();
  for (const auto& [choice, score] : item.target_scores) scores[choice] = score;
  ojson meta = ojson::object();
  for (const auto& [k, v] : item.metadata) meta[k] = v;
  return ojson{{"id", item.id},
               {"passage", item.passage},
               {"question", item.question},
               {"target_scores", std::move(scores)},
               {"answer", item.answer},
               {"metadata", std::move(meta)}};
}

std::string dump_line(const ojson& j) {
  return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

namespace {

std::string scalar_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

std::string optional_string(const ojson& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string())
    throw ValidationError(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

DocItem doc_item_from_json(const ojson& j, std::size_t line) {
  if (!j.is_object()) throw ValidationError(line, "record must be a JSON object");
  DocItem item;
  if (!j.contains("question"))
    throw ValidationError(line, "missing field 'question'");
  item.question = optional_string(j, "question", line);
  item.id = optional_string(j, "id", line);
  item.passage = optional_string(j, "passage", line);
  item.answer = optional_string(j, "answer", line);
  if (auto it = j.find("target_scores"); it != j.end() && !it->is_null()) {
    if (!it->is_object())
      throw ValidationError(line, "field 'target_scores' must be an object");
    for (const auto& [choice, score] : it->items()) {
      if (!score.is_number_integer())
        throw ValidationError(line, "every score must be 0 or 1");
      item.target_scores.emplace_back(choice, score.get<int>());
    }
  }
  if (auto it = j.find("metadata"); it != j.end() && !it->is_null()) {
    if (!it->is_object())
      throw ValidationError(line, "field 'metadata' must be an object");
    for (const auto& [k, v] : it->items()) item.metadata[k] = scalar_text(v);
  }
  if (auto violated = check_invariants(item)) throw ValidationError(line, *violated);
  return item;
}

DocItem normalize_mc(const RawRecord& row) {
  const auto& cells = row.cells;
  if (cells.size() < 3)
    throw MalformedRow("row needs a question, at least one choice and an answer letter");
  const std::string& letter = cells.back();
  if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z')
    throw MalformedRow("answer cell must be a single letter A-Z, got '" + letter + "'");
  const std::size_t n_choices = cells.size() - 2;
  const auto answer_idx = static_cast<std::size_t>(letter[0] - 'A');
  if (answer_idx >= n_choices)
    throw AnswerOutOfRange("answer " + letter + " but only " +
                           std::to_string(n_choices) + " choices");

  DocItem item;
  item.question = cells.front();
  std::set<std::string_view> seen;
  for (std::size_t idx = 0; idx < n_choices; ++idx) {
    const std::string& choice = cells[idx + 1];
    if (!seen.insert(choice).second)
      throw DuplicateChoice("duplicate choice text '" + choice + "'");
    item.target_scores.emplace_back(choice, idx == answer_idx ? 1 : 0);
  }
  return item;
}

// ---------------------------------------------------------------------------

namespace {

ColumnRoles roles_from_json(const ojson& j) {
  ColumnRoles r;
  r.id = j.value("id", "");
  r.passage = j.value("passage", "");
  r.question = j.value("question", "question");
  r.answer_letter = j.value("answer_letter", "");
  r.answer = j.value("answer", "");
  if (auto it = j.find("choices"); it != j.end()) {
    if (it->is_string())
      r.choices.push_back(it->get<std::string>());
    else
      r.choices = it->get<std::vector<std::string>>();
  }
  if (auto it = j.find("metadata"); it != j.end())
    r.metadata = it->get<std::vector<std::string>>();
  return r;
}

DocItem map_roles(const ColumnRoles& roles, const SourceRecord& rec) {
  const auto& f = rec.fields;
  auto get = [&](const std::string& key) -> std::string {
    if (key.empty()) return {};
    auto it = f.find(key);
    return it == f.end() ? std::string{} : scalar_text(*it);
  };
  if (!f.contains(roles.question))
    throw ValidationError(rec.line, "missing field '" + roles.question + "'");

  DocItem item;
  item.id = get(roles.id);
  item.passage = get(roles.passage);
  item.question = get(roles.question);
  item.answer = get(roles.answer);
  for (const auto& key : roles.metadata)
    if (f.contains(key)) item.metadata[key] = get(key);

  std::vector<std::string> choices;
  if (roles.choices.size() == 1 && f.contains(roles.choices[0]) &&
      f[roles.choices[0]].is_array()) {
    for (const auto& c : f[roles.choices[0]]) choices.push_back(scalar_text(c));
  } else {
    for (const auto& key : roles.choices) choices.push_back(get(key));
    // CSV rows with fewer options leave trailing columns blank.
    while (!choices.empty() && choices.back().empty()) choices.pop_back();
  }

  if (!roles.answer_letter.empty()) {
    RawRecord raw;
    raw.cells.push_back(item.question);
    raw.cells.insert(raw.cells.end(), choices.begin(), choices.end());
    raw.cells.push_back(std::string(py_strip(get(roles.answer_letter))));
    item.target_scores = normalize_mc(raw).target_scores;
  } else if (!choices.empty()) {
    throw ValidationError(rec.line, "choices mapped without an answer_letter role");
  }
  return item;
}

}  // namespace

SchemaSpec schema_spec_from_json(const ojson& j) {
  SchemaSpec s;
  s.schema_id = j.at("schema_id").get<std::string>();
  const std::string fmt = j.value("format", "jsonl");
  if (fmt == "jsonl")
    s.format = SourceFormat::jsonl;
  else if (fmt == "csv")
    s.format = SourceFormat::csv;
  else
    throw UnknownSchema("schema '" + s.schema_id + "': unknown format '" + fmt + "'");
  s.csv_header = j.value("header", true);
  if (auto it = j.find("roles"); it != j.end()) s.roles = roles_from_json(*it);
  return s;
}

SchemaRegistry SchemaRegistry::with_builtins() {
  SchemaRegistry reg;

  SchemaSpec unified;
  unified.schema_id = "unified";
  unified.transform = [](const SourceRecord& r) {
    return doc_item_from_json(r.fields, r.line);
  };
  reg.add(std::move(unified));

  // question, choice..., answer letter; no header row.
  SchemaSpec mmlu;
  mmlu.schema_id = "mmlu_csv";
  mmlu.format = SourceFormat::csv;
  mmlu.csv_header = false;
  mmlu.transform = [](const SourceRecord& r) {
    return normalize_mc(RawRecord{r.cells});
  };
  reg.add(std::move(mmlu));

  SchemaSpec mc;
  mc.schema_id = "mc_jsonl";
  mc.roles.id = "id";
  mc.roles.passage = "passage";
  mc.roles.choices = {"choices"};
  mc.roles.answer_letter = "answer";
  reg.add(std::move(mc));

  SchemaSpec qa;
  qa.schema_id = "qa_jsonl";
  qa.roles.id = "id";
  qa.roles.passage = "passage";
  qa.roles.answer = "answer";
  qa.roles.metadata = {"test", "entry_point", "prompt_code"};
  reg.add(std::move(qa));

  return reg;
}

void SchemaRegistry::add(SchemaSpec spec) {
  std::string id = spec.schema_id;
  specs_.insert_or_assign(std::move(id), std::move(spec));
}

void SchemaRegistry::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnknownSchema("cannot open schema file " + path.string());
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const ojson::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
  if (j.is_array()) {
    for (const auto& s : j) add(schema_spec_from_json(s));
  } else {
    add(schema_spec_from_json(j));
  }
}

const SchemaSpec& SchemaRegistry::get(const std::string& schema_id) const {
  auto it = specs_.find(schema_id);
  if (it == specs_.end()) throw UnknownSchema("unknown schema '" + schema_id + "'");
  return it->second;
}

bool SchemaRegistry::contains(const std::string& schema_id) const {
  return specs_.count(schema_id) != 0;
}

std::vector<std::string> SchemaRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : specs_) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------------------

bool read_csv_row(std::istream& in, std::vector<std::string>& row,
                  std::size_t& line) {
  row.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  ++line;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      break;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ParseError(line, "unterminated quoted CSV field");
  row.push_back(std::move(field));
  return true;
}

DatasetReader::DatasetReader(const std::filesystem::path& path,
                             const SchemaSpec& schema, std::string task_name)
    : in_(path, std::ios::binary), schema_(schema), task_name_(std::move(task_name)) {
  if (!in_) throw Error("cannot open dataset " + path.string());
  if (schema_.format == SourceFormat::csv && schema_.csv_header) {
    if (!read_csv_row(in_, header_, line_)) header_.clear();
  }
}

std::optional<SourceRecord> DatasetReader::next_record() {
  SourceRecord rec;
  if (schema_.format == SourceFormat::jsonl) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (py_strip(text).empty()) continue;
      rec.line = line_;
      try {
        rec.fields = ojson::parse(text);
      } catch (const ojson::parse_error& e) {
        throw ParseError(line_, e.what());
      }
      if (!rec.fields.is_object())
        throw ParseError(line_, "record must be a JSON object");
      return rec;
    }
    return std::nullopt;
  }
  std::vector<std::string> row;
  while (read_csv_row(in_, row, line_)) {
    if (row.size() == 1 && row[0].empty()) continue;
    rec.line = line_;
    rec.cells = row;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string key = i < header_.size() ? header_[i] : std::to_string(i);
      rec.fields[key] = row[i];
    }
    return rec;
  }
  return std::nullopt;
}

std::optional<DocItem> DatasetReader::next() {
  auto rec = next_record();
  if (!rec) return std::nullopt;
  DocItem item;
  try {
    item = schema_.transform ? schema_.transform(*rec) : map_roles(schema_.roles, *rec);
  } catch (const ValidationError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(rec->line, e.what());
  }
  if (auto violated = check_invariants(item)) throw ValidationError(rec->line, *violated);
  if (item.id.empty()) item.id = task_name_ + ":" + zero_pad(index_, 6);
  ++index_;
  return item;
}

std::vector<DocItem> load_dataset(const std::filesystem::path& path,
                                  const std::string& schema_id,
                                  const std::string& task_name,
                                  const SchemaRegistry& registry) {
  DatasetReader reader(path, registry.get(schema_id), task_name);
  std::vector<DocItem> items;
  std::set<std::string> ids;
  while (auto item = reader.next()) {
    if (!ids.insert(item->id).second)
      throw ValidationError(reader.line(), "duplicate id '" + item->id + "'");
    items.push_back(std::move(*item));
  }
  return items;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<DocItem>& items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& item : items) out << dump_line(to_json(item)) << '\n';
}

FewshotSplit split_fewshot_pool(const std::vector<DocItem>& items,
                                std::size_t k_pool, std::uint64_t seed) {
  if (k_pool >= items.size())
    throw PoolTooLarge("pool of " + std::to_string(k_pool) + " leaves no items out of " +
                       std::to_string(items.size()));
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  DetRng rng(seed);
  for (std::size_t i = 0; i < k_pool; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> in_pool(items.size(), false);
  for (std::size_t i = 0; i < k_pool; ++i) in_pool[order[i]] = true;

  FewshotSplit split;
  for (std::size_t i = 0; i < items.size(); ++i)
    (in_pool[i] ? split.pool : split.eval_set).push_back(items[i]);
  return split;
}

}  // namespace evalkit
