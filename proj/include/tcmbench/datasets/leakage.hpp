#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/hash.hpp"
#include "tcmbench/util/shingle.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::datasets {

struct TextRecord {
  std::string id;
  std::string text;
};

struct ExactMatch {
  std::string train_id;
  std::string test_id;
  friend bool operator==(const ExactMatch&, const ExactMatch&) = default;
};

struct NearMatch {
  std::string train_id;
  std::string test_id;
  double score = 0.0;
};

struct LeakageReport {
  std::vector<ExactMatch> exact_matches;
  std::vector<NearMatch> near_matches;  // score descending
  double threshold = 0.8;
};

/// Drops whitespace, folds full-width forms and lowercases Latin letters.
inline std::u32string leakage_normalize(std::string_view text) {
  std::u32string out;
  for (char32_t c : utf8::decode(text)) {
    c = utf8::fold_width(c);
    if (utf8::is_space(c)) continue;
    out.push_back(utf8::ascii_lower(c));
  }
  return out;
}

/// Flags test texts that duplicate (same normalized digest) or nearly
/// duplicate (character 5-gram Jaccard >= threshold) a training text.
/// Texts that normalize to nothing are ignored.
inline LeakageReport leakage_check(const std::vector<TextRecord>& train,
                                   const std::vector<TextRecord>& test, double threshold = 0.8) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError("leakage threshold must be in (0, 1]");
  LeakageReport report;
  report.threshold = threshold;

  std::vector<std::string> train_digest(train.size());
  std::vector<std::vector<std::uint64_t>> train_grams(train.size());
  std::unordered_multimap<std::string, std::size_t> by_digest;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto norm = leakage_normalize(train[i].text);
    if (norm.empty()) continue;
    train_digest[i] = hash::sha256_hex(utf8::encode(norm));
    by_digest.emplace(train_digest[i], i);
    train_grams[i] = shingle::char_grams(norm);
    for (auto g : train_grams[i]) index[g].push_back(i);
  }

  std::vector<std::size_t> shared(train.size(), 0);
  std::vector<std::size_t> touched;
  for (const auto& t : test) {
    const auto norm = leakage_normalize(t.text);
    if (norm.empty()) continue;
    const auto digest = hash::sha256_hex(utf8::encode(norm));
    const auto grams = shingle::char_grams(norm);

    touched.clear();
    for (auto g : grams) {
      auto it = index.find(g);
      if (it == index.end()) continue;
      for (auto i : it->second)
        if (shared[i]++ == 0) touched.push_back(i);
    }
    for (auto i : touched) {
      const auto inter = shared[i];
      shared[i] = 0;
      if (train_digest[i] == digest) continue;  // reported as exact below
      const double score = static_cast<double>(inter) /
                           static_cast<double>(grams.size() + train_grams[i].size() - inter);
      if (score >= threshold) report.near_matches.push_back({train[i].id, t.id, score});
    }
    auto [lo, hi] = by_digest.equal_range(digest);
    for (auto it = lo; it != hi; ++it) report.exact_matches.push_back({train[it->second].id, t.id});
  }

  std::sort(report.exact_matches.begin(), report.exact_matches.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.train_id, a.test_id) < std::tie(b.train_id, b.test_id);
            });
  std::sort(report.near_matches.begin(), report.near_matches.end(),
            [](const auto& a, const auto& b) {
              if (a.score != b.score) return a.score > b.score;
              return std::tie(a.train_id, a.test_id) < std::tie(b.train_id, b.test_id);
            });
  return report;
}

}  // namespace tcmbench::datasets
