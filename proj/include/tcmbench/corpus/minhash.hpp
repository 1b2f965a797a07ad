#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tcmbench/corpus/document.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/hash.hpp"
#include "tcmbench/util/shingle.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::corpus {

/// MinHash over character 5-grams with LSH banding.
class MinHasher {
 public:
  explicit MinHasher(std::size_t slots = 128, std::size_t bands = 32, std::uint64_t seed = 0x7cb1)
      : bands_(bands) {
    if (slots == 0 || bands == 0 || slots % bands != 0)
      throw ConfigError("minhash slots must be a positive multiple of bands");
    seeds_.reserve(slots);
    std::uint64_t s = seed;
    for (std::size_t i = 0; i < slots; ++i) seeds_.push_back(s = hash::splitmix64(s));
  }

  std::size_t slots() const noexcept { return seeds_.size(); }
  std::size_t bands() const noexcept { return bands_; }

  std::vector<std::uint64_t> signature(const std::vector<std::uint64_t>& grams) const {
    std::vector<std::uint64_t> sig(seeds_.size(), std::numeric_limits<std::uint64_t>::max());
    for (auto g : grams)
      for (std::size_t i = 0; i < seeds_.size(); ++i)
        sig[i] = std::min(sig[i], hash::splitmix64(g ^ seeds_[i]));
    return sig;
  }

  void sign(CorpusDocument& d) const {
    d.signature = signature(shingle::char_grams(utf8::decode(d.normalized)));
  }

 private:
  std::size_t bands_;
  std::vector<std::uint64_t> seeds_;
};

struct NearDuplicate {
  std::string first;   // earlier in input order
  std::string second;
  double estimated = 0.0;  // fraction of agreeing signature slots
  double jaccard = 0.0;    // exact, over character 5-gram sets
};

/// Candidate pairs share at least one signature band; each candidate is
/// confirmed with the exact 5-gram Jaccard, so nothing below `threshold`
/// is reported. Sorted by Jaccard descending, then by id.
inline std::vector<NearDuplicate> near_dup_scan(const std::vector<CorpusDocument>& docs,
                                                double threshold = 0.9, std::size_t bands = 32) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError("near-duplicate threshold must be in (0, 1]");
  if (docs.empty()) return {};
  const auto width = docs.front().signature.size();
  for (const auto& d : docs)
    if (d.signature.size() != width)
      throw ValidationError("signature width mismatch: '" + d.id + "' has " +
                            std::to_string(d.signature.size()) + " slots, expected " +
                            std::to_string(width));
  if (width == 0 || bands == 0 || width % bands != 0)
    throw ValidationError("signature width must be a positive multiple of the band count");
  const auto rows = width / bands;

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t b = 0; b < bands; ++b) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i].normalized.empty()) continue;
      std::uint64_t h = hash::splitmix64(b);
      for (std::size_t r = 0; r < rows; ++r) h = hash::splitmix64(h ^ docs[i].signature[b * rows + r]);
      buckets[h].push_back(i);
    }
    for (const auto& [_, members] : buckets)
      for (std::size_t x = 0; x < members.size(); ++x)
        for (std::size_t y = x + 1; y < members.size(); ++y)
          candidates.emplace_back(members[x], members[y]);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::map<std::size_t, std::vector<std::uint64_t>> grams;
  auto grams_of = [&](std::size_t i) -> const std::vector<std::uint64_t>& {
    auto it = grams.find(i);
    if (it == grams.end())
      it = grams.emplace(i, shingle::char_grams(utf8::decode(docs[i].normalized))).first;
    return it->second;
  };

  std::vector<NearDuplicate> out;
  for (auto [i, j] : candidates) {
    const double jac = shingle::jaccard(grams_of(i), grams_of(j));
    if (jac < threshold) continue;
    std::size_t agree = 0;
    for (std::size_t s = 0; s < width; ++s) agree += docs[i].signature[s] == docs[j].signature[s];
    out.push_back({docs[i].id, docs[j].id, static_cast<double>(agree) / static_cast<double>(width),
                   jac});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.jaccard != b.jaccard) return a.jaccard > b.jaccard;
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  return out;
}

}  // namespace tcmbench::corpus
