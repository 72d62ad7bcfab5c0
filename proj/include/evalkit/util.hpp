// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace evalkit {

// 64-bit FNV-1a. Stable across platforms, used for exemplar seeding and
// cache keys.
constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

// Portable seeded generator. std::uniform_int_distribution is allowed to
// differ between standard libraries, so bounded draws are done here with
// rejection sampling on the raw (standardized) mt19937_64 stream.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform real in [0, 1).
  double unit();

 private:
  std::mt19937_64 engine_;
};

// Mixes two seeds; splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Python str.strip() on UTF-8 text: ASCII whitespace (space, \t \n \v \f \r,
// \x1c-\x1f) and the Unicode space separators.
std::string_view py_strip(std::string_view s);
std::string_view rstrip_ws(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

// Shell-style glob with '*' and '?' only.
bool glob_match(std::string_view pattern, std::string_view text);

std::string zero_pad(std::size_t v, int width);

}  // namespace evalkit
