// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

// Published scores for three open models on eight benchmarks, used to check
// that the report schema carries a full model x benchmark grid.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "evalkit/report.hpp"

namespace refscores {

struct Benchmark {
  const char* name;
  const char* capability;
};

inline constexpr std::array<Benchmark, 8> kBenchmarks{{
    {"arc_challenge", "reasoning"},
    {"hellaswag", "reasoning"},
    {"bbh", "reasoning"},
    {"math", "math"},
    {"gsm8k", "math"},
    {"humaneval", "code"},
    {"mbpp", "code"},
    {"mmlu", "knowledge"},
}};

inline constexpr std::array<const char*, 3> kModels{"llama2-7b", "llama2-13b", "mistral-7b"};

// Percent, rows follow kModels, columns follow kBenchmarks.
inline constexpr double kPercent[3][8] = {
    {43.2, 75.6, 32.8, 2.8, 14.8, 12.8, 20.8, 45.1},
    {47.4, 79.1, 39.2, 4.8, 22.6, 17.1, 29.0, 55.2},
    {50.8, 80.4, 40.4, 10.2, 31.9, 26.8, 47.3, 63.1},
};

inline std::vector<evalkit::RunReport> reports() {
  std::vector<evalkit::RunReport> out;
  for (std::size_t m = 0; m < kModels.size(); ++m) {
    evalkit::RunReport r;
    r.model = kModels[m];
    r.model_family = "base";
    r.config = evalkit::ojson::object();
    for (std::size_t b = 0; b < kBenchmarks.size(); ++b) {
      evalkit::TaskReport t;
      t.task = kBenchmarks[b].name;
      t.capability = kBenchmarks[b].capability;
      t.n_instances = 1000;
      t.metrics = {{b == 5 || b == 6 ? "pass@1" : "accuracy", kPercent[m][b] / 100.0}};
      r.tasks.push_back(t);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace refscores
