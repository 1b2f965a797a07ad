#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcmbench/metrics/types.hpp"

namespace tcmbench::metrics {

using NGram = std::vector<std::string>;

/// Multiset of the contiguous n-grams of one sequence.
struct NGramBag {
  std::size_t order = 1;
  std::map<NGram, std::size_t> counts;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [_, c] : counts) t += c;
    return t;
  }

  std::size_t count(const NGram& g) const {
    auto it = counts.find(g);
    return it == counts.end() ? 0 : it->second;
  }
};

inline NGramBag ngrams(const TokenSequence& seq, std::size_t n) {
  if (n == 0) throw std::invalid_argument("n-gram order must be >= 1");
  NGramBag bag{n, {}};
  const auto& t = seq.tokens();
  if (t.size() < n) return bag;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    ++bag.counts[NGram(t.begin() + static_cast<std::ptrdiff_t>(i),
                       t.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return bag;
}

/// Sum over n-grams of min(candidate count, reference count).
inline std::size_t clipped_matches(const NGramBag& candidate,
                                   const NGramBag& reference) {
  std::size_t m = 0;
  for (const auto& [g, c] : candidate.counts) m += std::min(c, reference.count(g));
  return m;
}

}  // namespace tcmbench::metrics
