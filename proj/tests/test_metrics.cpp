// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "evalkit/errors.hpp"
#include "evalkit/metrics.hpp"
#include "evalkit/util.hpp"
#include "oracles.hpp"

using namespace evalkit;

TEST(Normalize, AllFlags) {
  EXPECT_EQ(normalize(" Paris. ", {}), "paris");
  EXPECT_EQ(normalize("Hello,   World!\n", {}), "hello world");
}

TEST(Normalize, CollapseOnly) {
  NormalizationSpec s = NormalizationSpec::none();
  s.collapse_ws = true;
  EXPECT_EQ(normalize("A  B", s), "A B");
  EXPECT_EQ(normalize("A  B", NormalizationSpec::none()), "A  B");
}

TEST(Normalize, NfcComposesDecomposedForms) {
  // "e" + combining acute vs precomposed U+00E9.
  EXPECT_EQ(normalize("caf\x65\xcc\x81", {}), "caf\xc3\xa9");
  EXPECT_EQ(exact_match("cafe\xcc\x81", "caf\xc3\xa9"), 1);
}

TEST(Normalize, IdempotentOnRandomText) {
  std::mt19937 rng(7);
  const std::string alphabet = "aB ,.!?\t\n-xYz'\"";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 30);
    for (int j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
    for (NormalizationSpec spec : {NormalizationSpec{}, NormalizationSpec::none()}) {
      const auto once = normalize(s, spec);
      EXPECT_EQ(normalize(once, spec), once) << s;
    }
  }
}

TEST(MatchFamily, Examples) {
  EXPECT_EQ(exact_match("Paris", "Paris"), 1);
  EXPECT_EQ(exact_match("paris.", "Paris"), 1);
  EXPECT_EQ(exact_match("London", "Paris"), 0);
  EXPECT_EQ(in_match("The answer is Paris, obviously", "Paris"), 1);
  EXPECT_EQ(prefix_match("Paris is the capital", "Paris"), 1);
  EXPECT_EQ(prefix_match("Well, Paris", "Paris"), 0);
  EXPECT_EQ(in_match("Well, Paris", "Paris"), 1);
}

TEST(MatchFamily, PrefixImpliesInAndSelfMatch) {
  std::mt19937 rng(11);
  const std::string alphabet = "ab c.";
  for (int i = 0; i < 1000; ++i) {
    std::string p, g;
    for (int j = static_cast<int>(rng() % 8); j > 0; --j) p += alphabet[rng() % alphabet.size()];
    for (int j = static_cast<int>(rng() % 4); j > 0; --j) g += alphabet[rng() % alphabet.size()];
    EXPECT_EQ(exact_match(p, p), 1);
    if (prefix_match(p, g)) EXPECT_EQ(in_match(p, g), 1);
  }
}

TEST(F1Binary, HandCountedExample) {
  const std::vector<int> preds{1, 1, 0, 1}, golds{1, 0, 0, 1};
  const auto r = f1_binary(preds, golds);
  // TP=2, FP=1, FN=0.
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_NEAR(r.f1, 0.8, 1e-15);
}

TEST(F1Binary, EdgeCases) {
  const std::vector<int> same{0, 1, 1};
  EXPECT_DOUBLE_EQ(f1_binary(same, same).f1, 1.0);
  const std::vector<int> zeros{0, 0, 0};
  EXPECT_DOUBLE_EQ(f1_binary(zeros, same).f1, 0.0);
  EXPECT_THROW(f1_binary(std::vector<int>{1}, std::vector<int>{1, 0}), LengthMismatch);
  EXPECT_THROW(f1_binary(std::vector<int>{}, std::vector<int>{}), EmptyInput);
}

TEST(F1Binary, PermutationInvariant) {
  std::mt19937 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<int> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % 2);
      g[i] = static_cast<int>(rng() % 2);
    }
    const auto base = f1_binary(p, g);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pp(n), gg(n);
    for (std::size_t i = 0; i < n; ++i) {
      pp[i] = p[perm[i]];
      gg[i] = g[perm[i]];
    }
    EXPECT_DOUBLE_EQ(f1_binary(pp, gg).f1, base.f1);
  }
}

TEST(RougeN, Examples) {
  auto same = rouge_n("the cat sat", "the cat sat", 2);
  EXPECT_DOUBLE_EQ(same.f1, 1.0);
  auto uni = rouge_n("a b c", "a b d", 1);
  EXPECT_DOUBLE_EQ(uni.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(uni.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rouge_n("a b c", "a", 2).recall, 0.0);
  EXPECT_THROW(rouge_n("a", "a", 0), std::invalid_argument);
}

TEST(RougeN, CountsAreClipped) {
  // Pred repeats "the" 3 times, gold has it twice: overlap 2.
  auto r = rouge_n("the the the", "the cat the", 1);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
}

TEST(RougeL, PoliceExample) {
  const auto r = rouge_l("police killed the gunman", "the gunman was killed by police");
  // Oracle LCS on the same tokens.
  const auto a = split_whitespace("police killed the gunman");
  const auto b = split_whitespace("the gunman was killed by police");
  ASSERT_EQ(oracle::lcs_quadratic(a, b), 2u);
  EXPECT_DOUBLE_EQ(r.recall, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_NEAR(r.f1, 0.4, 1e-15);
}

TEST(RougeL, EmptyAndIdentical) {
  const auto e = rouge_l("", "a b");
  EXPECT_EQ(e.precision, 0.0);
  EXPECT_EQ(e.recall, 0.0);
  EXPECT_EQ(e.f1, 0.0);
  EXPECT_DOUBLE_EQ(rouge_l("x y z", "x y z").f1, 1.0);
}

TEST(RougeL, F1IsOneOnlyForIdenticalSequences) {
  std::mt19937 rng(5);
  for (int t = 0; t < 500; ++t) {
    std::vector<int> a(rng() % 6), b(rng() % 6);
    for (auto& x : a) x = static_cast<int>(rng() % 2);
    for (auto& x : b) x = static_cast<int>(rng() % 2);
    const auto r = rouge_l(std::span<const int>(a), std::span<const int>(b));
    EXPECT_EQ(r.f1 == 1.0, a == b && !a.empty());
  }
}

TEST(Lcs, BitParallelMatchesQuadraticAcrossWordBoundaries) {
  std::mt19937 rng(17);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> a(rng() % 200), b(rng() % 200);
    for (auto& x : a) x = static_cast<int>(rng() % 4);
    for (auto& x : b) x = static_cast<int>(rng() % 4);
    EXPECT_EQ(lcs_length(std::span<const int>(a), std::span<const int>(b)),
              oracle::lcs_quadratic(a, b));
  }
}

TEST(PassAtK, Examples) {
  EXPECT_NEAR(pass_at_k({5, 2, 1}), 0.4, 1e-15);
  for (int k = 1; k <= 10; ++k) EXPECT_EQ(pass_at_k({10, 0, k}), 0.0);
  EXPECT_EQ(pass_at_k({4, 2, 3}), 1.0);
}

TEST(PassAtK, InvalidCounts) {
  EXPECT_THROW(pass_at_k({0, 0, 1}), InvalidCounts);
  EXPECT_THROW(pass_at_k({3, 4, 1}), InvalidCounts);
  EXPECT_THROW(pass_at_k({3, 1, 4}), InvalidCounts);
  EXPECT_THROW(pass_at_k({3, 1, 0}), InvalidCounts);
  EXPECT_THROW(pass_at_k({3, -1, 1}), InvalidCounts);
}

TEST(PassAtK, MatchesEnumerationSmall) {
  for (int n = 1; n <= 8; ++n)
    for (int c = 0; c <= n; ++c)
      for (int k = 1; k <= n; ++k)
        EXPECT_NEAR(pass_at_k({n, c, k}), oracle::pass_at_k_enumerated(n, c, k), 1e-12);
}

TEST(PassAtK, MonotoneInKAndC) {
  for (int n = 1; n <= 20; ++n)
    for (int c = 0; c <= n; ++c)
      for (int k = 1; k <= n; ++k) {
        const double v = pass_at_k({n, c, k});
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        if (k < n) EXPECT_LE(v, pass_at_k({n, c, k + 1}) + 1e-15);
        if (c < n) EXPECT_LE(v, pass_at_k({n, c + 1, k}) + 1e-15);
      }
}

TEST(PassAtK, LargeNStaysFinite) {
  const double v = pass_at_k({1000000, 3, 100});
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
}

TEST(McAccuracy, Examples) {
  const TargetScores four{{"a", 0}, {"b", 1}, {"c", 0}, {"d", 0}};
  const std::vector<std::int64_t> ones{1, 1, 1, 1};
  EXPECT_EQ(mc_accuracy(std::vector<double>{-5, -1, -9, -9}, ones, four, false), 1);

  const TargetScores gold0{{"a", 1}, {"b", 0}}, gold1{{"a", 0}, {"b", 1}};
  const std::vector<std::int64_t> two{1, 1};
  EXPECT_EQ(mc_accuracy(std::vector<double>{-1, -1}, two, gold0, false), 1);
  EXPECT_EQ(mc_accuracy(std::vector<double>{-1, -1}, two, gold1, false), 0);

  // Per-token [-1, -2]: argmax 0. Unnormalized [-10, -4]: argmax 1.
  const std::vector<double> sums{-10, -4};
  const std::vector<std::int64_t> counts{10, 2};
  EXPECT_EQ(mc_accuracy(sums, counts, gold0, true), 1);
  EXPECT_EQ(mc_accuracy(sums, counts, gold0, false), 0);
}

TEST(McAccuracy, Errors) {
  const TargetScores two{{"a", 1}, {"b", 0}};
  EXPECT_THROW(mc_accuracy(std::vector<double>{-1}, std::vector<std::int64_t>{1}, two, false),
               LengthMismatch);
  EXPECT_THROW(
      mc_accuracy(std::vector<double>{-1, -2}, std::vector<std::int64_t>{1, 0}, two, true),
      ZeroTokenCount);
}
