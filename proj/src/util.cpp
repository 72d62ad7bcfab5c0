// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "evalkit/util.hpp"

#include <limits>

namespace evalkit {

std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::uint64_t DetRng::below(std::uint64_t bound) {
  // Largest multiple of bound that fits; draws above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double DetRng::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
constexpr bool is_py_space(unsigned char c) {
  return c == ' ' || (c >= '\t' && c <= '\r') || (c >= 0x1c && c <= 0x1f);
}

// UTF-8 encodings of the non-ASCII code points Python counts as whitespace.
constexpr std::string_view kWideSpaces[] = {
    "\xc2\x85",         "\xc2\xa0",         "\xe1\x9a\x80",     "\xe2\x80\x80",
    "\xe2\x80\x81",     "\xe2\x80\x82",     "\xe2\x80\x83",     "\xe2\x80\x84",
    "\xe2\x80\x85",     "\xe2\x80\x86",     "\xe2\x80\x87",     "\xe2\x80\x88",
    "\xe2\x80\x89",     "\xe2\x80\x8a",     "\xe2\x80\xa8",     "\xe2\x80\xa9",
    "\xe2\x80\xaf",     "\xe2\x81\x9f",     "\xe3\x80\x80"};

std::size_t leading_space_len(std::string_view s) {
  if (s.empty()) return 0;
  if (is_py_space(static_cast<unsigned char>(s.front()))) return 1;
  for (auto w : kWideSpaces)
    if (s.starts_with(w)) return w.size();
  return 0;
}

std::size_t trailing_space_len(std::string_view s) {
  if (s.empty()) return 0;
  if (is_py_space(static_cast<unsigned char>(s.back()))) return 1;
  for (auto w : kWideSpaces)
    if (s.ends_with(w)) return w.size();
  return 0;
}

}  // namespace

std::string_view py_strip(std::string_view s) {
  while (std::size_t n = leading_space_len(s)) s.remove_prefix(n);
  return rstrip_ws(s);
}

std::string_view rstrip_ws(std::string_view s) {
  while (std::size_t n = trailing_space_len(s)) s.remove_suffix(n);
  return s;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_py_space(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_py_space(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::string zero_pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width)
    s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

}  // namespace evalkit
