// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/judge.hpp"

#include <charconv>
#include <cmath>

#include "evalkit/errors.hpp"
#include "evalkit/util.hpp"

namespace evalkit {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::win:
      return "win";
    case Verdict::tie:
      return "tie";
    case Verdict::loss:
      return "loss";
  }
  return "loss";
}

std::string render_judge_prompt(std::string_view pred, std::string_view reference,
                                std::string_view rubric) {
  std::string out;
  out += "You are grading a candidate answer against a reference answer.\n";
  out += "Rubric:\n";
  out += rubric;
  out += "\nReference answer:\n";
  out += reference;
  out += "\nCandidate answer:\n";
  out += pred;
  out +=
      "\nReply with a first line \"SCORE: <number from 0 to 1>\" or "
      "\"VERDICT: win|tie|loss\", then a short rationale.\n";
  return out;
}

namespace {

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char a = s[i];
    if (a >= 'a' && a <= 'z') a = static_cast<char>(a - 'a' + 'A');
    if (a != prefix[i]) return false;
  }
  return true;
}

}  // namespace

JudgeResult parse_verdict(std::string_view reply) {
  const auto body = py_strip(reply);
  const auto nl = body.find('\n');
  const auto first = py_strip(body.substr(0, nl));
  JudgeResult result;
  if (nl != std::string_view::npos) result.rationale = std::string(py_strip(body.substr(nl)));

  if (iequals_prefix(first, "SCORE:")) {
    const auto num = py_strip(first.substr(6));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc{} || ptr == num.data() || !std::isfinite(v) || v < 0.0 || v > 1.0)
      throw UnparseableVerdict("judge score is not a number in [0, 1]: '" +
                               std::string(first) + "'");
    result.score = v;
    return result;
  }
  if (iequals_prefix(first, "VERDICT:")) {
    std::string word(py_strip(first.substr(8)));
    for (char& c : word)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    while (!word.empty() && (word.back() == '.' || word.back() == '!')) word.pop_back();
    if (word == "win") {
      result.verdict = Verdict::win;
      result.score = 1.0;
    } else if (word == "tie") {
      result.verdict = Verdict::tie;
      result.score = 0.5;
    } else if (word == "loss") {
      result.verdict = Verdict::loss;
      result.score = 0.0;
    } else {
      throw UnparseableVerdict("unknown verdict '" + word + "'");
    }
    return result;
  }
  throw UnparseableVerdict("judge reply has no SCORE or VERDICT line: '" +
                           std::string(first.substr(0, 80)) + "'");
}

JudgeResult judge(std::string_view pred, std::string_view reference, std::string_view rubric,
                  const std::string& judge_endpoint, const JudgeOptions& options) {
  if (judge_endpoint.empty()) throw JudgeUnavailable("no judge endpoint configured");
  GenerationRequest req;
  req.prompt = render_judge_prompt(pred, reference, rubric);
  req.params = options.params;
  req.instance_id = options.instance_id.empty()
                        ? "judge:" + to_hex(fnv1a64(req.prompt))
                        : options.instance_id;
  GenerationResponse resp;
  try {
    resp = generate(judge_endpoint, req, options.client);
  } catch (const TransportError& e) {
    throw JudgeUnavailable(e.what());
  } catch (const BackendError& e) {
    throw JudgeUnavailable(e.what());
  } catch (const ProtocolError& e) {
    throw JudgeUnavailable(e.what());
  }
  return parse_verdict(resp.text.value_or(""));
}

}  // namespace evalkit
