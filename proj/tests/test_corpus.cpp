// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "evalkit/corpus.hpp"
#include "evalkit/errors.hpp"

using namespace evalkit;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("evalkit_corpus_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return path_ / name;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST(NormalizeMc, TracedExample) {
  const auto item = normalize_mc({{"Capital of France?", "London", "Paris", "Rome", "Berlin", "B"}});
  const TargetScores expected{{"London", 0}, {"Paris", 1}, {"Rome", 0}, {"Berlin", 0}};
  EXPECT_EQ(item.target_scores, expected);
  EXPECT_EQ(item.question, "Capital of France?");
  EXPECT_EQ(item.passage, "");
  EXPECT_EQ(item.answer, "");
}

TEST(NormalizeMc, FirstChoiceAndErrors) {
  EXPECT_EQ(normalize_mc({{"Q?", "x", "y", "A"}}).target_scores, (TargetScores{{"x", 1}, {"y", 0}}));
  EXPECT_THROW(normalize_mc({{"Q?", "x", "y", "C"}}), AnswerOutOfRange);
  EXPECT_THROW(normalize_mc({{"Q?", "A"}}), MalformedRow);
  EXPECT_THROW(normalize_mc({{"Q?", "x", "b"}}), MalformedRow);
  EXPECT_THROW(normalize_mc({{"Q?", "x", "AB"}}), MalformedRow);
  EXPECT_THROW(normalize_mc({{"Q?", "x", "x", "A"}}), DuplicateChoice);
}

// Random well-formed rows: the output is valid and the single 1 sits on the
// choice at the letter's index.
TEST(NormalizeMc, PropertyOverRandomRows) {
  std::mt19937 rng(42);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 26;
    RawRecord row;
    row.cells.push_back("question " + std::to_string(t));
    for (std::size_t i = 0; i < n; ++i) row.cells.push_back("choice-" + std::to_string(i) + "-" + std::to_string(rng() % 1000));
    const std::size_t gold = rng() % n;
    row.cells.push_back(std::string(1, static_cast<char>('A' + gold)));
    const auto item = normalize_mc(row);
    EXPECT_FALSE(check_invariants(item).has_value());
    int ones = 0;
    for (const auto& [c, s] : item.target_scores) ones += s;
    EXPECT_EQ(ones, 1);
    EXPECT_EQ(item.target_scores[gold].first, row.cells[gold + 1]);
    EXPECT_EQ(item.target_scores[gold].second, 1);
  }
}

TEST(DocItem, JsonRoundTrip) {
  std::mt19937 rng(9);
  for (int t = 0; t < 200; ++t) {
    DocItem item;
    item.id = "task:" + std::to_string(t);
    item.passage = t % 3 ? "" : "passage \xc3\xa9 \"quoted\"\n";
    item.question = "q" + std::to_string(rng());
    if (t % 2) {
      const std::size_t n = 1 + rng() % 5;
      const std::size_t g = rng() % n;
      for (std::size_t i = 0; i < n; ++i)
        item.target_scores.emplace_back("c" + std::to_string(i), i == g ? 1 : 0);
    } else {
      item.answer = "free answer " + std::to_string(t);
    }
    if (t % 5 == 0) item.metadata["entry_point"] = "f";
    const auto line = dump_line(to_json(item));
    EXPECT_EQ(doc_item_from_json(ojson::parse(line)), item);
  }
}

TEST(DocItem, OutputHasExactlyTheUnifiedKeys) {
  const auto j = to_json(normalize_mc({{"Q", "a", "b", "A"}}));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "passage", "question", "target_scores",
                                            "answer", "metadata"}));
}

TEST(LoadDataset, AssignsPaddedIdsInFileOrder) {
  TempDir dir;
  const auto path = dir.file("a.jsonl",
                             R"({"question":"one","answer":"1"})"
                             "\n"
                             R"({"question":"two","answer":"2"})"
                             "\n"
                             R"({"question":"three","answer":"3"})"
                             "\n");
  const auto items = load_dataset(path, "unified", "toy");
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0].id, "toy:000000");
  EXPECT_EQ(items[1].id, "toy:000001");
  EXPECT_EQ(items[2].id, "toy:000002");
  EXPECT_EQ(items[1].question, "two");
}

TEST(LoadDataset, EmptyFileAndUnknownSchema) {
  TempDir dir;
  const auto path = dir.file("empty.jsonl", "");
  EXPECT_TRUE(load_dataset(path, "unified", "t").empty());
  EXPECT_THROW(load_dataset(path, "no_such_schema", "t"), UnknownSchema);
}

TEST(LoadDataset, MissingQuestionReportsLine) {
  TempDir dir;
  const auto path = dir.file("bad.jsonl",
                             R"({"question":"one","answer":"1"})"
                             "\n"
                             R"({"answer":"2"})"
                             "\n");
  try {
    load_dataset(path, "unified", "t");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(e.invariant().find("question"), std::string::npos);
  }
}

TEST(LoadDataset, BadJsonIsParseErrorWithLine) {
  TempDir dir;
  const auto path = dir.file("bad.jsonl", "{\"question\":\"q\",\"answer\":\"a\"}\n\n{oops\n");
  try {
    load_dataset(path, "unified", "t");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadDataset, DuplicateIdsRejected) {
  TempDir dir;
  const auto path = dir.file("dup.jsonl",
                             R"({"id":"x","question":"a","answer":"1"})"
                             "\n"
                             R"({"id":"x","question":"b","answer":"2"})"
                             "\n");
  EXPECT_THROW(load_dataset(path, "unified", "t"), ValidationError);
}

TEST(LoadDataset, MmluCsvWithQuotedFields) {
  TempDir dir;
  const auto path = dir.file("mmlu.csv",
                             "\"Capital of France?\",London,Paris,Rome,Berlin,B\n"
                             "\"Pick, carefully\",\"x \"\"quoted\"\"\",\"multi\nline\",B\n");
  const auto items = load_dataset(path, "mmlu_csv", "mmlu");
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].gold_index(), 1);
  EXPECT_EQ(items[0].id, "mmlu:000000");
  EXPECT_EQ(items[1].question, "Pick, carefully");
  EXPECT_EQ(items[1].target_scores[0].first, "x \"quoted\"");
  EXPECT_EQ(items[1].target_scores[1].first, "multi\nline");
}

TEST(LoadDataset, DeclarativeSchemaFromFile) {
  SchemaRegistry reg = SchemaRegistry::with_builtins();
  reg.load_file(fs::path(EVALKIT_DATA_DIR) / "schemas" / "arc_csv.json");
  ASSERT_TRUE(reg.contains("arc_csv"));
  TempDir dir;
  const auto path = dir.file("arc.csv",
                             "id,question,A,B,C,D,answerKey\n"
                             "q1,Which is a mammal?,Shark,Whale,Trout,,B\n");
  const auto items = load_dataset(path, "arc_csv", "arc", reg);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].id, "q1");
  EXPECT_EQ(items[0].target_scores.size(), 3u);
  EXPECT_EQ(items[0].gold_index(), 1);
}

TEST(LoadDataset, McAndQaJsonl) {
  TempDir dir;
  const auto mc = dir.file("mc.jsonl", R"({"question":"q","choices":["a","b","c"],"answer":"C"})" "\n");
  const auto items = load_dataset(mc, "mc_jsonl", "mc");
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].gold_index(), 2);

  const auto qa = dir.file(
      "qa.jsonl",
      R"({"id":"h0","question":"write add","answer":"","test":"assert add(1,2)==3","entry_point":"add","prompt_code":"def add(a, b):\n"})"
      "\n");
  EXPECT_THROW(load_dataset(qa, "qa_jsonl", "he"), ValidationError);  // no gold at all
  const auto qa2 = dir.file(
      "qa2.jsonl",
      R"({"id":"h0","question":"write add","answer":"ref","test":"assert add(1,2)==3","entry_point":"add","prompt_code":"def add(a, b):\n"})"
      "\n");
  const auto he = load_dataset(qa2, "qa_jsonl", "he");
  ASSERT_EQ(he.size(), 1u);
  EXPECT_EQ(he[0].metadata.at("entry_point"), "add");
  EXPECT_EQ(he[0].metadata.at("prompt_code"), "def add(a, b):\n");
}

TEST(WriteJsonl, RoundTripsThroughLoad) {
  TempDir dir;
  std::vector<DocItem> items;
  for (int i = 0; i < 4; ++i) {
    auto item = normalize_mc({{"Q" + std::to_string(i), "a", "b", i % 2 ? "A" : "B"}});
    item.id = "w:" + std::to_string(i);
    items.push_back(item);
  }
  write_jsonl(dir.path() / "out.jsonl", items);
  EXPECT_EQ(load_dataset(dir.path() / "out.jsonl", "unified", "w"), items);
}

TEST(SplitFewshotPool, DeterministicPartition) {
  std::vector<DocItem> items;
  for (int i = 0; i < 10; ++i) {
    DocItem d;
    d.id = "i" + std::to_string(i);
    d.question = "q";
    d.answer = "a";
    items.push_back(d);
  }
  const auto a = split_fewshot_pool(items, 5, 7);
  const auto b = split_fewshot_pool(items, 5, 7);
  EXPECT_EQ(a.pool, b.pool);
  EXPECT_EQ(a.eval_set, b.eval_set);
  EXPECT_EQ(a.pool.size(), 5u);
  std::set<std::string> ids;
  for (const auto& d : a.pool) ids.insert(d.id);
  for (const auto& d : a.eval_set) EXPECT_TRUE(ids.insert(d.id).second);
  EXPECT_EQ(ids.size(), 10u);

  const auto none = split_fewshot_pool(items, 0, 7);
  EXPECT_TRUE(none.pool.empty());
  EXPECT_EQ(none.eval_set, items);
  EXPECT_THROW(split_fewshot_pool(items, 10, 7), PoolTooLarge);
}
