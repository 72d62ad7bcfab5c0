// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evalkit/corpus.hpp"

namespace evalkit {

struct NormalizationSpec {
  bool lowercase = true;
  bool strip_punct = true;
  bool collapse_ws = true;
  bool unicode_nfc = true;

  static NormalizationSpec none() { return {false, false, false, false}; }
  bool operator==(const NormalizationSpec&) const = default;
};

// Applied in fixed order: NFC, lowercase, punctuation removal, whitespace
// collapse (which also trims). Lowercasing and punctuation removal touch
// ASCII only; other code points pass through.
std::string normalize(std::string_view text, const NormalizationSpec& spec);

int exact_match(std::string_view pred, std::string_view gold,
                const NormalizationSpec& spec = {});
int in_match(std::string_view pred, std::string_view gold,
             const NormalizationSpec& spec = {});
int prefix_match(std::string_view pred, std::string_view gold,
                 const NormalizationSpec& spec = {});

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// 0/0 is taken as 0 for every ratio.
PrecisionRecall prf_from_counts(double tp, double fp, double fn);
double harmonic_f1(double precision, double recall);

// Corpus-level binary F1 over pooled counts.
PrecisionRecall f1_binary(std::span<const int> preds, std::span<const int> golds);

// Clipped n-gram overlap over whitespace tokens.
PrecisionRecall rouge_n(std::string_view pred, std::string_view gold, int n);
PrecisionRecall rouge_n(std::span<const std::string> pred,
                        std::span<const std::string> gold, int n);

// Longest common subsequence length. Bit-parallel over the shorter sequence
// (one machine word per 64 tokens), O(|a| * |b| / 64).
template <class Token>
std::size_t lcs_length(std::span<const Token> a, std::span<const Token> b);

PrecisionRecall rouge_l(std::string_view pred, std::string_view gold);
template <class Token>
PrecisionRecall rouge_l(std::span<const Token> pred, std::span<const Token> gold) {
  const double lcs = static_cast<double>(lcs_length(pred, gold));
  PrecisionRecall r;
  r.precision = pred.empty() ? 0.0 : lcs / static_cast<double>(pred.size());
  r.recall = gold.empty() ? 0.0 : lcs / static_cast<double>(gold.size());
  r.f1 = harmonic_f1(r.precision, r.recall);
  return r;
}

struct PassAtKInput {
  std::int64_t n = 0;  // samples generated
  std::int64_t c = 0;  // samples passing
  std::int64_t k = 0;
};

// Unbiased estimator 1 - C(n-c, k) / C(n, k), evaluated as a running product.
double pass_at_k(const PassAtKInput& in);

// 1 iff the highest-scoring choice (lowest index on ties) is the gold one.
int mc_accuracy(std::span<const double> logprob_sums,
                std::span<const std::int64_t> token_counts,
                const TargetScores& target_scores, bool length_normalize);

// Per-instance and aggregate values of one metric over a task.
struct MetricScore {
  std::string metric_id;
  std::map<std::string, double> per_instance;
  double aggregate = 0.0;
};

// ---------------------------------------------------------------------------

namespace detail {

// Hyyrö's bit-vector LCS. `pattern` is the shorter sequence.
template <class Token>
std::size_t lcs_bitparallel(std::span<const Token> pattern,
                            std::span<const Token> text) {
  const std::size_t m = pattern.size();
  if (m == 0 || text.empty()) return 0;
  const std::size_t words = (m + 63) / 64;

  std::unordered_map<Token, std::vector<std::uint64_t>> match;
  for (std::size_t i = 0; i < m; ++i) {
    auto& bits = match[pattern[i]];
    if (bits.empty()) bits.assign(words, 0);
    bits[i / 64] |= std::uint64_t{1} << (i % 64);
  }

  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  for (const auto& tok : text) {
    auto it = match.find(tok);
    if (it == match.end()) continue;
    const auto& mask = it->second;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & mask[w];
      // v' = (v + u) | (v - u), with multiword carry on the sum.
      const std::uint64_t sum1 = v[w] + u;
      const std::uint64_t c1 = sum1 < v[w] ? 1 : 0;
      const std::uint64_t sum = sum1 + carry;
      const std::uint64_t c2 = sum < sum1 ? 1 : 0;
      v[w] = sum | (v[w] - u);
      carry = c1 | c2;
    }
  }

  std::size_t zeros = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t word = ~v[w];
    if (w == words - 1 && m % 64 != 0) word &= (std::uint64_t{1} << (m % 64)) - 1;
    zeros += static_cast<std::size_t>(__builtin_popcountll(word));
  }
  return zeros;
}

}  // namespace detail

template <class Token>
std::size_t lcs_length(std::span<const Token> a, std::span<const Token> b) {
  return a.size() <= b.size() ? detail::lcs_bitparallel(a, b)
                              : detail::lcs_bitparallel(b, a);
}

}  // namespace evalkit
