// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/metrics.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>

#include "evalkit/errors.hpp"
#include "evalkit/util.hpp"

namespace evalkit {

namespace {

std::string to_nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return std::string(text);
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (nfc->isNormalized(u, status) && U_SUCCESS(status)) return std::string(text);
  status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc->normalize(u, status);
  if (U_FAILURE(status)) return std::string(text);
  std::string utf8;
  out.toUTF8String(utf8);
  return utf8;
}

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) ||
         (c >= 0x5b && c <= 0x60) || (c >= 0x7b && c <= 0x7e);
}

}  // namespace

std::string normalize(std::string_view text, const NormalizationSpec& spec) {
  std::string s = spec.unicode_nfc ? to_nfc(text) : std::string(text);
  if (spec.lowercase)
    for (char& c : s)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  if (spec.strip_punct)
    std::erase_if(s, [](char c) { return is_ascii_punct(static_cast<unsigned char>(c)); });
  if (spec.collapse_ws) {
    std::string joined;
    for (const auto& tok : split_whitespace(s)) {
      if (!joined.empty()) joined += ' ';
      joined += tok;
    }
    s = std::move(joined);
  }
  return s;
}

int exact_match(std::string_view pred, std::string_view gold,
                const NormalizationSpec& spec) {
  return normalize(pred, spec) == normalize(gold, spec) ? 1 : 0;
}

int in_match(std::string_view pred, std::string_view gold,
             const NormalizationSpec& spec) {
  return normalize(pred, spec).find(normalize(gold, spec)) != std::string::npos ? 1 : 0;
}

int prefix_match(std::string_view pred, std::string_view gold,
                 const NormalizationSpec& spec) {
  return starts_with(normalize(pred, spec), normalize(gold, spec)) ? 1 : 0;
}

double harmonic_f1(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

PrecisionRecall prf_from_counts(double tp, double fp, double fn) {
  PrecisionRecall r;
  r.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  r.f1 = harmonic_f1(r.precision, r.recall);
  return r;
}

PrecisionRecall f1_binary(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size())
    throw LengthMismatch("preds has " + std::to_string(preds.size()) +
                         " labels, golds has " + std::to_string(golds.size()));
  if (preds.empty()) throw EmptyInput("f1_binary needs at least one label");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0, g = golds[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  return prf_from_counts(tp, fp, fn);
}

namespace {

std::map<std::string, int> ngram_counts(std::span<const std::string> toks, int n) {
  std::map<std::string, int> counts;
  const auto un = static_cast<std::size_t>(n);
  if (toks.size() < un) return counts;
  for (std::size_t i = 0; i + un <= toks.size(); ++i) {
    std::string key = toks[i];
    for (std::size_t j = 1; j < un; ++j) {
      key += '\x1f';
      key += toks[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

PrecisionRecall rouge_n(std::span<const std::string> pred,
                        std::span<const std::string> gold, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n needs n >= 1");
  const auto pc = ngram_counts(pred, n);
  const auto gc = ngram_counts(gold, n);
  double overlap = 0, pred_total = 0, gold_total = 0;
  for (const auto& [g, c] : pc) {
    pred_total += c;
    if (auto it = gc.find(g); it != gc.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [g, c] : gc) gold_total += c;
  PrecisionRecall r;
  r.precision = pred_total > 0 ? overlap / pred_total : 0.0;
  r.recall = gold_total > 0 ? overlap / gold_total : 0.0;
  r.f1 = harmonic_f1(r.precision, r.recall);
  return r;
}

PrecisionRecall rouge_n(std::string_view pred, std::string_view gold, int n) {
  const auto p = split_whitespace(pred);
  const auto g = split_whitespace(gold);
  return rouge_n(std::span<const std::string>(p), std::span<const std::string>(g), n);
}

PrecisionRecall rouge_l(std::string_view pred, std::string_view gold) {
  const auto p = split_whitespace(pred);
  const auto g = split_whitespace(gold);
  return rouge_l(std::span<const std::string>(p), std::span<const std::string>(g));
}

double pass_at_k(const PassAtKInput& in) {
  const auto [n, c, k] = in;
  if (n < 1 || c < 0 || c > n || k < 1 || k > n)
    throw InvalidCounts("pass@k needs n >= 1, 0 <= c <= n, 1 <= k <= n; got n=" +
                        std::to_string(n) + " c=" + std::to_string(c) +
                        " k=" + std::to_string(k));
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (std::int64_t j = n - c + 1; j <= n; ++j)
    miss *= 1.0 - static_cast<double>(k) / static_cast<double>(j);
  return std::clamp(1.0 - miss, 0.0, 1.0);
}

int mc_accuracy(std::span<const double> logprob_sums,
                std::span<const std::int64_t> token_counts,
                const TargetScores& target_scores, bool length_normalize) {
  if (target_scores.empty()) throw EmptyInput("mc_accuracy needs target_scores");
  if (logprob_sums.size() != target_scores.size() ||
      (length_normalize && token_counts.size() != target_scores.size()))
    throw LengthMismatch("score vectors do not match " +
                         std::to_string(target_scores.size()) + " choices");
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < logprob_sums.size(); ++i) {
    double s = logprob_sums[i];
    if (length_normalize) {
      if (token_counts[i] == 0)
        throw ZeroTokenCount("choice " + std::to_string(i) + " has zero tokens");
      s /= static_cast<double>(token_counts[i]);
    }
    if (i == 0 || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return target_scores[best].second == 1 ? 1 : 0;
}

}  // namespace evalkit
