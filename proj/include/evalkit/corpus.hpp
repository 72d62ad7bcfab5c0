// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace evalkit {

using ojson = nlohmann::ordered_json;

// Choice text -> 0/1, in source order.
using TargetScores = std::vector<std::pair<std::string, int>>;

// One normalized evaluation instance.
struct DocItem {
  std::string id;
  std::string passage;
  std::string question;
  TargetScores target_scores;
  std::string answer;
  std::map<std::string, std::string> metadata;

  bool is_multiple_choice() const { return !target_scores.empty(); }
  // Zero-based index of the gold choice, or -1 if not multiple choice.
  int gold_index() const;

  bool operator==(const DocItem&) const = default;
};

// A raw multiple-choice row: question, choice texts..., answer letter.
struct RawRecord {
  std::vector<std::string> cells;
};

// Returns the first violated invariant, or nullopt if the item is valid.
std::optional<std::string> check_invariants(const DocItem& item);

ojson to_json(const DocItem& item);
// Compact single-line JSON; invalid UTF-8 is replaced rather than thrown on.
std::string dump_line(const ojson& j);
// Throws ValidationError(line) on a schema or invariant violation.
DocItem doc_item_from_json(const ojson& j, std::size_t line = 0);

DocItem normalize_mc(const RawRecord& row);

// ---------------------------------------------------------------------------
// Schema registry

enum class SourceFormat { jsonl, csv };

// Maps source fields to DocItem roles. For CSV sources the keys are header
// names, or "0", "1", ... when the file has no header row.
struct ColumnRoles {
  std::string id;
  std::string passage;
  std::string question = "question";
  // One key per choice, or a single key naming an array field.
  std::vector<std::string> choices;
  // Field holding the gold letter (A, B, ...) into choices.
  std::string answer_letter;
  // Field holding free-form gold text.
  std::string answer;
  // Extra fields copied into metadata verbatim.
  std::vector<std::string> metadata;
};

// One source record with its fields addressed by key. For CSV the cells are
// also kept positionally so row-shaped transforms can use them.
struct SourceRecord {
  ojson fields = ojson::object();
  std::vector<std::string> cells;
  std::size_t line = 0;
};

using RecordTransform = std::function<DocItem(const SourceRecord&)>;

struct SchemaSpec {
  std::string schema_id;
  SourceFormat format = SourceFormat::jsonl;
  bool csv_header = true;
  ColumnRoles roles;
  // When set, replaces the declarative role mapping.
  RecordTransform transform;
};

SchemaSpec schema_spec_from_json(const ojson& j);

class SchemaRegistry {
 public:
  // Registry pre-loaded with "unified", "mmlu_csv", "mc_jsonl", "qa_jsonl".
  static SchemaRegistry with_builtins();

  void add(SchemaSpec spec);
  // Registers every schema in a JSON file holding one object or an array.
  void load_file(const std::filesystem::path& path);
  const SchemaSpec& get(const std::string& schema_id) const;
  bool contains(const std::string& schema_id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, SchemaSpec> specs_;
};

// Streams DocItems from a source file in file order. Items lacking an id get
// "<task>:<6-digit record index>".
class DatasetReader {
 public:
  DatasetReader(const std::filesystem::path& path, const SchemaSpec& schema,
                std::string task_name);

  std::optional<DocItem> next();
  // Physical line of the most recently read record.
  std::size_t line() const { return line_; }

 private:
  std::optional<SourceRecord> next_record();

  std::ifstream in_;
  SchemaSpec schema_;
  std::string task_name_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
  std::size_t index_ = 0;
};

std::vector<DocItem> load_dataset(const std::filesystem::path& path,
                                  const std::string& schema_id,
                                  const std::string& task_name,
                                  const SchemaRegistry& registry =
                                      SchemaRegistry::with_builtins());

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<DocItem>& items);

// RFC 4180 CSV row reader; quoted fields may span lines. Returns false at
// EOF. `line` is advanced by the number of physical lines consumed.
bool read_csv_row(std::istream& in, std::vector<std::string>& row,
                  std::size_t& line);

struct FewshotSplit {
  std::vector<DocItem> pool;
  std::vector<DocItem> eval_set;
};

// Seeded partition; both halves keep the input order.
FewshotSplit split_fewshot_pool(const std::vector<DocItem>& items,
                                std::size_t k_pool, std::uint64_t seed);

}  // namespace evalkit
