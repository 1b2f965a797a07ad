#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>

#include "tcmbench/metrics/types.hpp"
#include "tcmbench/util/errors.hpp"

namespace tcmbench::metrics {

using LabelPair = std::pair<std::string, std::string>;  // (predicted, gold)

/// Exact-match fraction. For single-label multi-class prediction this is the
/// (TP+TN)/(TP+TN+FP+FN) reduction of the confusion framing.
inline double accuracy(std::span<const LabelPair> pairs) {
  if (pairs.empty()) throw ValidationError("no samples");
  std::size_t hits = 0;
  for (const auto& [pred, gold] : pairs) hits += (pred == gold) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

inline double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw ValidationError("no samples");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// Set-overlap precision/recall/F1. An empty denominator yields 0.
inline PRF prf_sets(const std::set<std::string>& predicted,
                    const std::set<std::string>& gold) {
  std::size_t tp = 0;
  for (const auto& p : predicted) tp += gold.count(p);
  const std::size_t fp = predicted.size() - tp;
  const std::size_t fn = gold.size() - tp;
  const double p = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double r = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return PRF::from(p, r);
}

}  // namespace tcmbench::metrics
