// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evalkit {

// Per-instance facts some rules need.
struct RuleContext {
  std::string entry_point;
  // Valid option letters are the first num_choices of A-Z; 0 means unknown.
  std::size_t num_choices = 0;
};

using RuleFn = std::function<std::string(std::string_view, const RuleContext&)>;

struct PostprocRule {
  std::string rule_id;
  RuleFn transform;
};

// Content of the first fenced block. An optional language tag on the opening
// fence is skipped. Unclosed fences yield everything after the opening one.
std::string extract_code_block(std::string_view text);

// Cuts generated text before a trailing docstring that is followed by test
// code ("def ..."); see the rule docs in README for the exact branches.
std::string strip_after_docstring_tests(std::string_view text);

// Body lines of `def entry_name(...)`, with the def's own indentation removed
// so the body sits one level deep. Returns code unchanged if absent.
std::string extract_function_body(std::string_view code, std::string_view entry_name);

// First "(L)", else the first standalone capital letter, else "".
std::string extract_mc_letter(std::string_view text, std::size_t num_choices = 0);

// Last integer or decimal number in the text (commas dropped), else "".
std::string extract_last_number(std::string_view text);

// An ordered, pre-resolved rule list.
class PostprocChain {
 public:
  PostprocChain() = default;
  explicit PostprocChain(std::vector<PostprocRule> rules) : rules_(std::move(rules)) {}

  std::string apply(std::string_view text, const RuleContext& ctx = {}) const;
  std::vector<std::string> ids() const;
  bool empty() const { return rules_.empty(); }

 private:
  std::vector<PostprocRule> rules_;
};

// Immutable after setup. Chains can also be bound to (task, model family)
// glob patterns; resolve() picks the most specific binding, earliest
// registration winning ties.
class RuleRegistry {
 public:
  // All built-in rules plus default bindings.
  static RuleRegistry with_builtins();

  void add_rule(PostprocRule rule);
  void bind(std::string task_pattern, std::string model_pattern,
            std::vector<std::string> chain);

  const PostprocRule& rule(const std::string& rule_id) const;
  // Throws UnknownRuleId for any id not registered.
  PostprocChain build(const std::vector<std::string>& rule_ids) const;
  std::vector<std::string> resolve(const std::string& task,
                                   const std::string& model_family) const;
  std::vector<std::string> rule_ids() const;

 private:
  struct Binding {
    std::string task_pattern;
    std::string model_pattern;
    std::vector<std::string> chain;
  };
  std::map<std::string, PostprocRule> rules_;
  std::vector<Binding> bindings_;
};

std::string apply_chain(const std::vector<PostprocRule>& rules, std::string_view text,
                        const RuleContext& ctx = {});

}  // namespace evalkit
