#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tcmbench/util/hash.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::shingle {

/// Sorted, distinct 64-bit hashes of the character k-grams of `text`.
/// A nonempty text shorter than k yields a single gram: the whole text.
inline std::vector<std::uint64_t> char_grams(std::u32string_view text, std::size_t k = 5) {
  std::vector<std::uint64_t> out;
  if (text.empty()) return out;
  auto gram_hash = [](std::u32string_view g) { return hash::fnv1a64(utf8::encode(g)); };
  if (text.size() < k) {
    out.push_back(gram_hash(text));
    return out;
  }
  out.reserve(text.size() - k + 1);
  for (std::size_t i = 0; i + k <= text.size(); ++i) out.push_back(gram_hash(text.substr(i, k)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// |a ∩ b| / |a ∪ b| for sorted distinct sets; two empty sets give 1.
inline double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace tcmbench::shingle
