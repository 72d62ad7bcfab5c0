// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "evalkit/errors.hpp"
#include "evalkit/prompting.hpp"
#include "oracles.hpp"

using namespace evalkit;
namespace fs = std::filesystem;

namespace {

DocItem mc(const std::string& id, const std::string& q, std::vector<std::string> choices,
           std::size_t gold) {
  DocItem d;
  d.id = id;
  d.question = q;
  for (std::size_t i = 0; i < choices.size(); ++i) d.target_scores.emplace_back(choices[i], i == gold);
  return d;
}

std::vector<DocItem> pool_of(int n) {
  std::vector<DocItem> pool;
  for (int i = 0; i < n; ++i)
    pool.push_back(mc("p" + std::to_string(i), "Pool question " + std::to_string(i),
                      {"yes", "no", "maybe"}, static_cast<std::size_t>(i % 3)));
  return pool;
}

}  // namespace

TEST(RenderMc, FixtureIsByteExact) {
  const fs::path dir = EVALKIT_FIXTURE_DIR;
  std::ifstream in(dir / "mmlu_prompt_item.json");
  const auto item = doc_item_from_json(ojson::parse(in));
  EXPECT_EQ(render_mc(item, PromptTemplate{}), oracle::read_file(dir / "mmlu_prompt_golden.txt"));
}

TEST(RenderMc, TwoChoiceExample) {
  EXPECT_EQ(render_mc(mc("i", "Q1", {"x", "y"}, 0), PromptTemplate{}),
            "Question:\nQ1\nRequirement:\nChoose and respond with the letter of the correct "
            "answer, including the parentheses.\nOptions:\n(A) x\n(B) y\nAnswer:\n");
}

TEST(RenderMc, SingleChoiceAndLimits) {
  const auto text = render_mc(mc("i", "Q", {"only"}, 0), PromptTemplate{});
  EXPECT_NE(text.find("Options:\n(A) only\nAnswer:\n"), std::string::npos);

  std::vector<std::string> many;
  for (int i = 0; i < 27; ++i) many.push_back("c" + std::to_string(i));
  EXPECT_THROW(render_mc(mc("i", "Q", many, 0), PromptTemplate{}), TooManyChoices);
  many.pop_back();
  const auto z = render_mc(mc("i", "Q", many, 0), PromptTemplate{});
  EXPECT_NE(z.find("(Z) c25\n"), std::string::npos);

  EXPECT_THROW(render_mc(mc("i", "", {"a"}, 0), PromptTemplate{}), EmptyQuestion);
  DocItem open;
  open.id = "o";
  open.question = "Q";
  open.answer = "a";
  EXPECT_THROW(render_mc(open, PromptTemplate{}), EmptyChoices);
}

TEST(RenderMc, SlotTextInChoicesIsNotReexpanded) {
  const auto text = render_mc(mc("i", "Q", {"{letter}", "{choice}"}, 0), PromptTemplate{});
  EXPECT_NE(text.find("(A) {letter}\n(B) {choice}\n"), std::string::npos);
}

TEST(RenderMc, EachChoiceAppearsOnceOnItsOwnLine) {
  std::mt19937 rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> choices;
    const std::size_t n = 1 + rng() % 26;
    for (std::size_t i = 0; i < n; ++i) choices.push_back("opt" + std::to_string(i) + "x" + std::to_string(rng() % 100));
    const auto text = render_mc(mc("i", "Question " + std::to_string(t), choices, rng() % n), PromptTemplate{});
    for (std::size_t i = 0; i < n; ++i) {
      const std::string line = "(" + std::string(1, static_cast<char>('A' + i)) + ") " + choices[i] + "\n";
      const auto first = text.find(line);
      ASSERT_NE(first, std::string::npos);
      EXPECT_EQ(text.find(line, first + 1), std::string::npos);
    }
  }
}

TEST(RenderMc, PassageBlockWhenPresent) {
  auto item = mc("i", "Q", {"a", "b"}, 1);
  item.passage = "Some context.";
  EXPECT_EQ(render_mc(item, PromptTemplate{}).rfind("Passage:\nSome context.\nQuestion:\nQ\n", 0), 0u);
}

TEST(AssembleFewshot, ZeroShotIsRenderMc) {
  const auto item = mc("t", "Target?", {"a", "b"}, 1);
  const auto r = assemble_fewshot(item, pool_of(5), 0, 1, PromptTemplate{});
  EXPECT_EQ(r.text, render_mc(item, PromptTemplate{}));
  EXPECT_TRUE(r.exemplar_ids.empty());
  EXPECT_EQ(r.instance_id, "t");
}

TEST(AssembleFewshot, DeterministicAndStructured) {
  const auto item = mc("t", "Target?", {"a", "b"}, 1);
  const auto pool = pool_of(5);
  const PromptTemplate tpl;
  const auto a = assemble_fewshot(item, pool, 2, 99, tpl);
  const auto b = assemble_fewshot(item, pool, 2, 99, tpl);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.exemplar_ids, b.exemplar_ids);
  ASSERT_EQ(a.exemplar_ids.size(), 2u);
  EXPECT_NE(a.exemplar_ids[0], a.exemplar_ids[1]);

  // Rebuild the expected text from its parts.
  std::string expected;
  for (const auto& id : a.exemplar_ids) {
    const auto it = std::find_if(pool.begin(), pool.end(), [&](const DocItem& d) { return d.id == id; });
    ASSERT_NE(it, pool.end());
    expected += render_mc(*it, tpl) + "(" + std::string(1, static_cast<char>('A' + it->gold_index())) +
                ")" + "\n\n";
  }
  expected += render_mc(item, tpl);
  EXPECT_EQ(a.text, expected);
  EXPECT_TRUE(a.text.ends_with(tpl.answer_header));
}

TEST(AssembleFewshot, NeverUsesTheItemItself) {
  auto pool = pool_of(3);
  const DocItem item = pool[1];
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = assemble_fewshot(item, pool, 2, seed, PromptTemplate{});
    for (const auto& id : r.exemplar_ids) EXPECT_NE(id, item.id);
  }
  EXPECT_THROW(assemble_fewshot(item, pool, 3, 0, PromptTemplate{}), InsufficientPool);
}

TEST(AssembleFewshot, DrawDependsOnSeed) {
  const auto item = mc("t", "Target?", {"a", "b"}, 1);
  const auto pool = pool_of(20);
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    seen.insert(assemble_fewshot(item, pool, 3, seed, PromptTemplate{}).exemplar_ids);
  EXPECT_GT(seen.size(), 1u);
}

TEST(AssembleFewshot, CotTriggerFollowsAnswerHeader) {
  const auto item = mc("t", "Target?", {"a", "b"}, 1);
  const PromptTemplate tpl;
  const auto r = assemble_fewshot(item, pool_of(4), 1, 3, tpl, true);
  EXPECT_TRUE(r.text.ends_with("Answer:\n" + tpl.cot_trigger));
}

TEST(LoglikelihoodPairs, SharedContextInOrder) {
  const auto item = mc("t", "Q?", {"red", "green", "blue", "cyan"}, 2);
  const auto pairs = render_loglikelihood_pairs(item, PromptTemplate{});
  ASSERT_EQ(pairs.size(), 4u);
  for (const auto& p : pairs) EXPECT_EQ(p.first, pairs[0].first);
  EXPECT_EQ(pairs[0].first, render_mc(item, PromptTemplate{}));
  EXPECT_EQ(pairs[0].second, " (A)");
  EXPECT_EQ(pairs[3].second, " (D)");

  PromptTemplate text_mode = template_from_json(ojson{{"template_id", "t"}, {"continuation", "text"}});
  const auto tp = render_loglikelihood_pairs(item, text_mode);
  EXPECT_EQ(tp[1].second, " green");

  DocItem open;
  open.id = "o";
  open.question = "Q";
  open.answer = "x";
  EXPECT_THROW(render_loglikelihood_pairs(open, PromptTemplate{}), EmptyChoices);
}

TEST(Templates, JsonRoundTripAndLibrary) {
  PromptTemplate t;
  t.template_id = "custom";
  t.question_header = "Q: ";
  EXPECT_EQ(template_from_json(to_json(t)), t);

  TemplateLibrary lib;
  EXPECT_EQ(lib.get("mc_default"), PromptTemplate{});
  EXPECT_THROW(lib.get("missing"), TemplateError);
  lib.load_dir(fs::path(EVALKIT_DATA_DIR) / "templates");
  EXPECT_EQ(lib.get("identity").question_header, "");
  EXPECT_THROW(template_from_json(ojson{{"question_header", "x"}}), TemplateError);
}

TEST(RenderOpen, IdentityTemplateIsTheQuestion) {
  TemplateLibrary lib;
  lib.load_dir(fs::path(EVALKIT_DATA_DIR) / "templates");
  DocItem d;
  d.id = "e";
  d.question = "the quick brown fox";
  d.answer = d.question;
  EXPECT_EQ(render_item(d, lib.get("identity")), "the quick brown fox\n");
}
