// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/postproc.hpp"

#include <algorithm>
#include <regex>

#include "evalkit/errors.hpp"
#include "evalkit/util.hpp"

namespace evalkit {

namespace {

bool is_tag_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '+' || c == '-' || c == '.' || c == '#';
}

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '\'' || u >= 0x80;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < s.size()) lines.push_back(s.substr(start));
      break;
    }
    lines.push_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string_view leading_ws(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return line.substr(0, i);
}

bool is_blank(std::string_view line) { return py_strip(line).empty(); }

// True if `line` opens `def name(` (optionally async).
bool opens_definition(std::string_view line, std::string_view name) {
  std::string_view rest = line.substr(leading_ws(line).size());
  if (starts_with(rest, "async ")) rest = rest.substr(6);
  if (!starts_with(rest, "def")) return false;
  rest = rest.substr(3);
  const auto ws = leading_ws(rest).size();
  if (ws == 0) return false;
  rest = rest.substr(ws);
  if (!starts_with(rest, name)) return false;
  rest = rest.substr(name.size());
  rest = rest.substr(leading_ws(rest).size());
  return starts_with(rest, "(");
}

}  // namespace

std::string extract_code_block(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return std::string(text);
  std::size_t content_start = open + 3;

  const auto line_end = text.find('\n', content_start);
  std::string_view tag = text.substr(
      content_start, line_end == std::string_view::npos ? std::string_view::npos
                                                        : line_end - content_start);
  tag = rstrip_ws(tag);
  if (std::all_of(tag.begin(), tag.end(), is_tag_char))
    content_start = line_end == std::string_view::npos ? text.size() : line_end + 1;

  const auto close = text.find("```", content_start);
  std::string_view content =
      text.substr(content_start, close == std::string_view::npos
                                     ? std::string_view::npos
                                     : close - content_start);
  while (!content.empty() && (content.front() == '\n' || content.front() == '\r'))
    content.remove_prefix(1);
  return std::string(rstrip_ws(content));
}

std::string strip_after_docstring_tests(std::string_view text) {
  std::vector<std::size_t> quotes;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (text.compare(i, 3, R"(""")") == 0) quotes.push_back(i);

  if (quotes.size() % 2 == 0) {
    for (std::size_t i = 0; i < quotes.size(); i += 2) {
      const std::size_t start = quotes[i];
      const std::size_t end = quotes[i + 1];
      if (text.substr(end).find("def") != std::string_view::npos)
        return std::string(py_strip(text.substr(0, start)));
    }
    return std::string(py_strip(text));
  }
  return std::string(py_strip(text.substr(0, quotes.front())));
}

std::string extract_function_body(std::string_view code, std::string_view entry_name) {
  const auto lines = split_lines(code);
  std::size_t def_line = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (opens_definition(lines[i], entry_name)) {
      def_line = i;
      break;
    }
  }
  if (def_line == lines.size()) return std::string(code);

  const std::string_view indent = leading_ws(lines[def_line]);
  // The signature may wrap; the body starts after the line ending in ':'.
  std::size_t sig_end = def_line;
  while (sig_end < lines.size() && !rstrip_ws(lines[sig_end]).ends_with(':')) ++sig_end;
  if (sig_end == lines.size()) return std::string(code);

  std::vector<std::string_view> body;
  for (std::size_t j = sig_end + 1; j < lines.size(); ++j) {
    const auto line = lines[j];
    if (!is_blank(line) && leading_ws(line).size() <= indent.size()) break;
    body.push_back(line);
  }
  while (!body.empty() && is_blank(body.back())) body.pop_back();
  // One-line definitions have no indented body to return.
  if (body.empty()) return std::string(code);

  std::string out;
  for (const auto line : body) {
    if (!is_blank(line)) out += line.substr(indent.size());
    out += '\n';
  }
  return out;
}

std::string extract_mc_letter(std::string_view text, std::size_t num_choices) {
  const char last = num_choices >= 1 && num_choices <= 26
                        ? static_cast<char>('A' + num_choices - 1)
                        : 'Z';
  auto valid = [&](char c) { return c >= 'A' && c <= last; };

  for (std::size_t i = 0; i + 2 < text.size(); ++i)
    if (text[i] == '(' && valid(text[i + 1]) && text[i + 2] == ')')
      return std::string(1, text[i + 1]);

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!valid(c)) continue;
    if (i > 0 && is_word_byte(text[i - 1])) continue;
    if (i + 1 < text.size() && is_word_byte(text[i + 1])) continue;
    // The pronoun: "I think", "I am".
    if (c == 'I' && i + 2 < text.size() && text[i + 1] == ' ' && text[i + 2] >= 'a' &&
        text[i + 2] <= 'z')
      continue;
    return std::string(1, c);
  }
  return {};
}

std::string extract_last_number(std::string_view text) {
  static const std::regex number(R"(-?\d[\d,]*(?:\.\d+)?)");
  std::string last;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), number);
       it != std::sregex_iterator(); ++it)
    last = it->str();
  std::erase(last, ',');
  return last;
}

// ---------------------------------------------------------------------------

std::string PostprocChain::apply(std::string_view text, const RuleContext& ctx) const {
  std::string cur(text);
  for (const auto& rule : rules_) cur = rule.transform(cur, ctx);
  return cur;
}

std::vector<std::string> PostprocChain::ids() const {
  std::vector<std::string> out;
  for (const auto& r : rules_) out.push_back(r.rule_id);
  return out;
}

std::string apply_chain(const std::vector<PostprocRule>& rules, std::string_view text,
                        const RuleContext& ctx) {
  return PostprocChain(rules).apply(text, ctx);
}

RuleRegistry RuleRegistry::with_builtins() {
  RuleRegistry reg;
  reg.add_rule({"strip", [](std::string_view t, const RuleContext&) {
                  return std::string(py_strip(t));
                }});
  reg.add_rule({"first_line", [](std::string_view t, const RuleContext&) {
                  auto s = py_strip(t);
                  return std::string(py_strip(s.substr(0, s.find('\n'))));
                }});
  reg.add_rule({"extract_code_block", [](std::string_view t, const RuleContext&) {
                  return extract_code_block(t);
                }});
  reg.add_rule({"strip_after_docstring_tests", [](std::string_view t, const RuleContext&) {
                  return strip_after_docstring_tests(t);
                }});
  reg.add_rule({"extract_function_body", [](std::string_view t, const RuleContext& ctx) {
                  return ctx.entry_point.empty() ? std::string(t)
                                                 : extract_function_body(t, ctx.entry_point);
                }});
  reg.add_rule({"extract_mc_letter", [](std::string_view t, const RuleContext& ctx) {
                  return extract_mc_letter(t, ctx.num_choices);
                }});
  reg.add_rule({"last_number", [](std::string_view t, const RuleContext&) {
                  return extract_last_number(t);
                }});

  reg.bind("*", "*", {"strip"});
  reg.bind("mbpp*", "*", {"extract_code_block", "strip_after_docstring_tests"});
  reg.bind("humaneval*", "*", {"extract_code_block", "extract_function_body"});
  reg.bind("gsm8k*", "*", {"last_number"});
  reg.bind("math*", "*", {"last_number"});
  return reg;
}

void RuleRegistry::add_rule(PostprocRule rule) {
  std::string id = rule.rule_id;
  rules_.insert_or_assign(std::move(id), std::move(rule));
}

void RuleRegistry::bind(std::string task_pattern, std::string model_pattern,
                        std::vector<std::string> chain) {
  for (const auto& id : chain) (void)rule(id);
  bindings_.push_back({std::move(task_pattern), std::move(model_pattern), std::move(chain)});
}

const PostprocRule& RuleRegistry::rule(const std::string& rule_id) const {
  auto it = rules_.find(rule_id);
  if (it == rules_.end()) throw UnknownRuleId("unknown post-processing rule '" + rule_id + "'");
  return it->second;
}

PostprocChain RuleRegistry::build(const std::vector<std::string>& rule_ids) const {
  std::vector<PostprocRule> rules;
  rules.reserve(rule_ids.size());
  for (const auto& id : rule_ids) rules.push_back(rule(id));
  return PostprocChain(std::move(rules));
}

std::vector<std::string> RuleRegistry::resolve(const std::string& task,
                                               const std::string& model_family) const {
  auto literal_chars = [](const std::string& p) {
    return std::count_if(p.begin(), p.end(), [](char c) { return c != '*' && c != '?'; });
  };
  const Binding* best = nullptr;
  long best_score = -1;
  for (const auto& b : bindings_) {
    if (!glob_match(b.task_pattern, task) || !glob_match(b.model_pattern, model_family))
      continue;
    const long score = literal_chars(b.task_pattern) + literal_chars(b.model_pattern);
    if (score > best_score) {
      best = &b;
      best_score = score;
    }
  }
  return best ? best->chain : std::vector<std::string>{};
}

std::vector<std::string> RuleRegistry::rule_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : rules_) out.push_back(id);
  return out;
}

}  // namespace evalkit
