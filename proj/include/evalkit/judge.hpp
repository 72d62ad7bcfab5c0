// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "evalkit/gateway.hpp"

namespace evalkit {

enum class Verdict { win, tie, loss };
std::string to_string(Verdict v);

struct JudgeResult {
  std::optional<Verdict> verdict;  // set for "VERDICT:" replies
  double score = 0.0;              // win=1, tie=0.5, loss=0 for verdicts
  std::string rationale;
};

inline constexpr std::string_view kDefaultRubric =
    "Score 1 if the candidate answer is correct and means the same as the "
    "reference answer, otherwise score 0.";

std::string render_judge_prompt(std::string_view pred, std::string_view reference,
                                std::string_view rubric);

// Reads the leading "SCORE: x" (x in [0, 1]) or "VERDICT: win|tie|loss"
// line. Anything else throws UnparseableVerdict.
JudgeResult parse_verdict(std::string_view reply);

struct JudgeOptions {
  ClientOptions client;
  GenerationParams params;
  // Request key; derived from a hash of the inputs when empty.
  std::string instance_id;
};

// Sends the judge prompt through the gateway wire protocol. Transport and
// backend failures throw JudgeUnavailable.
JudgeResult judge(std::string_view pred, std::string_view reference, std::string_view rubric,
                  const std::string& judge_endpoint, const JudgeOptions& options = {});

}  // namespace evalkit
