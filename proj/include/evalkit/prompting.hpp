// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evalkit/corpus.hpp"
#include "evalkit/task.hpp"

namespace evalkit {

// Every piece of literal prompt text lives here, so templates are data.
// "{letter}" and "{choice}" are the only slots; they are expanded in one
// pass, so choice text containing a slot name is left alone.
struct PromptTemplate {
  std::string template_id = "mc_default";
  std::string system_prefix;
  std::string passage_header = "Passage:\n";
  std::string question_header = "Question:\n";
  std::string instruction =
      "Requirement:\nChoose and respond with the letter of the correct answer, "
      "including the parentheses.\n";
  // Used instead of `instruction` for items without choices.
  std::string open_instruction;
  std::string options_header = "Options:\n";
  std::string option_format = "({letter}) {choice}\n";
  std::string answer_header = "Answer:\n";
  // Gold answer appended to multiple-choice exemplars.
  std::string exemplar_answer_format = "({letter})";
  std::string exemplar_separator = "\n\n";
  std::string cot_trigger = "Let's think step by step.";
  // Loglikelihood continuation per choice. " {choice}" scores the raw
  // choice text instead of the letter.
  std::string continuation_format = " ({letter})";

  bool operator==(const PromptTemplate&) const = default;
};

PromptTemplate template_from_json(const ojson& j);
ojson to_json(const PromptTemplate& t);

// Templates keyed by id; starts with the built-in "mc_default".
class TemplateLibrary {
 public:
  TemplateLibrary();
  void add(PromptTemplate t);
  // Loads every *.json file in dir.
  void load_dir(const std::filesystem::path& dir);
  const PromptTemplate& get(const std::string& template_id) const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

struct RenderedPrompt {
  std::string instance_id;
  std::string text;
  std::vector<std::string> exemplar_ids;
  EvalMode mode = EvalMode::generation;
};

// Question block, instruction, one option line per choice, answer header.
std::string render_mc(const DocItem& item, const PromptTemplate& tpl);
// Prompt for an item without choices: question block and answer header.
std::string render_open(const DocItem& item, const PromptTemplate& tpl);
// render_mc for multiple-choice items, render_open otherwise.
std::string render_item(const DocItem& item, const PromptTemplate& tpl);
// Gold answer text as it is appended to a solved exemplar.
std::string exemplar_answer(const DocItem& item, const PromptTemplate& tpl);

// k solved exemplars drawn from pool (never the item itself), joined by the
// template separator, then the unsolved target. The draw is seeded by
// (seed, hash of item.id). With cot the trigger follows the target's answer
// header.
RenderedPrompt assemble_fewshot(const DocItem& item, const std::vector<DocItem>& pool,
                                std::size_t k, std::uint64_t seed,
                                const PromptTemplate& tpl, bool cot = false,
                                EvalMode mode = EvalMode::generation);

std::vector<std::string> render_continuations(const DocItem& item,
                                              const PromptTemplate& tpl);

std::vector<std::pair<std::string, std::string>> render_loglikelihood_pairs(
    const DocItem& item, const PromptTemplate& tpl);

}  // namespace evalkit
