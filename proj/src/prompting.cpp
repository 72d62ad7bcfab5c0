// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/prompting.hpp"

#include <fstream>

#include "evalkit/errors.hpp"
#include "evalkit/util.hpp"

namespace evalkit {

namespace {

constexpr std::size_t kMaxChoices = 26;

std::string expand(const std::string& fmt, char letter, const std::string& choice) {
  std::string out;
  out.reserve(fmt.size() + choice.size());
  for (std::size_t i = 0; i < fmt.size();) {
    if (fmt.compare(i, 8, "{letter}") == 0) {
      out += letter;
      i += 8;
    } else if (fmt.compare(i, 8, "{choice}") == 0) {
      out += choice;
      i += 8;
    } else {
      out += fmt[i++];
    }
  }
  return out;
}

void check_choices(const DocItem& item) {
  if (item.target_scores.empty())
    throw EmptyChoices("item '" + item.id + "' has no choices");
  if (item.target_scores.size() > kMaxChoices)
    throw TooManyChoices("item '" + item.id + "' has " +
                         std::to_string(item.target_scores.size()) + " choices");
}

std::string question_block(const DocItem& item, const PromptTemplate& tpl) {
  if (item.question.empty())
    throw EmptyQuestion("item '" + item.id + "' has an empty question");
  std::string out;
  if (!item.passage.empty()) out += tpl.passage_header + item.passage + "\n";
  out += tpl.question_header + item.question + "\n";
  return out;
}

std::string mc_body(const DocItem& item, const PromptTemplate& tpl) {
  check_choices(item);
  std::string out = question_block(item, tpl);
  out += tpl.instruction;
  out += tpl.options_header;
  for (std::size_t idx = 0; idx < item.target_scores.size(); ++idx)
    out += expand(tpl.option_format, static_cast<char>('A' + idx),
                  item.target_scores[idx].first);
  out += tpl.answer_header;
  return out;
}

std::string open_body(const DocItem& item, const PromptTemplate& tpl) {
  return question_block(item, tpl) + tpl.open_instruction + tpl.answer_header;
}

std::string item_body(const DocItem& item, const PromptTemplate& tpl) {
  return item.is_multiple_choice() ? mc_body(item, tpl) : open_body(item, tpl);
}

}  // namespace

PromptTemplate template_from_json(const ojson& j) {
  PromptTemplate t;
  try {
    t.template_id = j.at("template_id").get<std::string>();
  } catch (const ojson::exception& e) {
    throw TemplateError(std::string("template without template_id: ") + e.what());
  }
  auto field = [&](const char* key, std::string& slot) {
    if (auto it = j.find(key); it != j.end()) slot = it->get<std::string>();
  };
  field("system_prefix", t.system_prefix);
  field("passage_header", t.passage_header);
  field("question_header", t.question_header);
  field("instruction", t.instruction);
  field("open_instruction", t.open_instruction);
  field("options_header", t.options_header);
  field("option_format", t.option_format);
  field("answer_header", t.answer_header);
  field("exemplar_answer_format", t.exemplar_answer_format);
  field("exemplar_separator", t.exemplar_separator);
  field("cot_trigger", t.cot_trigger);
  if (auto it = j.find("continuation"); it != j.end()) {
    const auto mode = it->get<std::string>();
    if (mode == "letter")
      t.continuation_format = " ({letter})";
    else if (mode == "text")
      t.continuation_format = " {choice}";
    else
      throw TemplateError("continuation must be 'letter' or 'text', got '" + mode + "'");
  }
  field("continuation_format", t.continuation_format);
  return t;
}

ojson to_json(const PromptTemplate& t) {
  return ojson{{"template_id", t.template_id},
               {"system_prefix", t.system_prefix},
               {"passage_header", t.passage_header},
               {"question_header", t.question_header},
               {"instruction", t.instruction},
               {"open_instruction", t.open_instruction},
               {"options_header", t.options_header},
               {"option_format", t.option_format},
               {"answer_header", t.answer_header},
               {"exemplar_answer_format", t.exemplar_answer_format},
               {"exemplar_separator", t.exemplar_separator},
               {"cot_trigger", t.cot_trigger},
               {"continuation_format", t.continuation_format}};
}

TemplateLibrary::TemplateLibrary() { add(PromptTemplate{}); }

void TemplateLibrary::add(PromptTemplate t) {
  std::string id = t.template_id;
  templates_.insert_or_assign(std::move(id), std::move(t));
}

void TemplateLibrary::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw TemplateError("template directory " + dir.string() + " does not exist");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    try {
      add(template_from_json(ojson::parse(in)));
    } catch (const ojson::exception& e) {
      throw TemplateError(entry.path().string() + ": " + e.what());
    }
  }
}

const PromptTemplate& TemplateLibrary::get(const std::string& template_id) const {
  auto it = templates_.find(template_id);
  if (it == templates_.end()) throw TemplateError("unknown template '" + template_id + "'");
  return it->second;
}

std::string render_mc(const DocItem& item, const PromptTemplate& tpl) {
  return tpl.system_prefix + mc_body(item, tpl);
}

std::string render_open(const DocItem& item, const PromptTemplate& tpl) {
  return tpl.system_prefix + open_body(item, tpl);
}

std::string render_item(const DocItem& item, const PromptTemplate& tpl) {
  return tpl.system_prefix + item_body(item, tpl);
}

std::string exemplar_answer(const DocItem& item, const PromptTemplate& tpl) {
  const int gold = item.gold_index();
  if (gold < 0) return item.answer;
  return expand(tpl.exemplar_answer_format, static_cast<char>('A' + gold),
                item.target_scores[static_cast<std::size_t>(gold)].first);
}

RenderedPrompt assemble_fewshot(const DocItem& item, const std::vector<DocItem>& pool,
                                std::size_t k, std::uint64_t seed,
                                const PromptTemplate& tpl, bool cot, EvalMode mode) {
  std::vector<const DocItem*> candidates;
  candidates.reserve(pool.size());
  for (const auto& p : pool)
    if (p.id != item.id) candidates.push_back(&p);
  if (k > candidates.size())
    throw InsufficientPool("need " + std::to_string(k) + " exemplars, pool has " +
                           std::to_string(candidates.size()));

  DetRng rng(mix_seed(seed, fnv1a64(item.id)));
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }

  RenderedPrompt out;
  out.instance_id = item.id;
  out.mode = mode;
  out.text = tpl.system_prefix;
  for (std::size_t i = 0; i < k; ++i) {
    const DocItem& ex = *candidates[i];
    out.exemplar_ids.push_back(ex.id);
    out.text += item_body(ex, tpl) + exemplar_answer(ex, tpl) + tpl.exemplar_separator;
  }
  out.text += item_body(item, tpl);
  if (cot) out.text += tpl.cot_trigger;
  return out;
}

std::vector<std::string> render_continuations(const DocItem& item,
                                              const PromptTemplate& tpl) {
  check_choices(item);
  std::vector<std::string> out;
  out.reserve(item.target_scores.size());
  for (std::size_t idx = 0; idx < item.target_scores.size(); ++idx)
    out.push_back(expand(tpl.continuation_format, static_cast<char>('A' + idx),
                         item.target_scores[idx].first));
  return out;
}

std::vector<std::pair<std::string, std::string>> render_loglikelihood_pairs(
    const DocItem& item, const PromptTemplate& tpl) {
  const std::string context = render_mc(item, tpl);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (auto& cont : render_continuations(item, tpl)) pairs.emplace_back(context, std::move(cont));
  return pairs;
}

}  // namespace evalkit
