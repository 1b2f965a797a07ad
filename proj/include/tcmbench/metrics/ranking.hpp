#pragma once

// Ranking metrics over recommendation lists with binary relevance. Batch
// variants macro-average per query.

#include <algorithm>
#include <cmath>
#include <span>

#include "tcmbench/metrics/types.hpp"
#include "tcmbench/util/errors.hpp"

namespace tcmbench::metrics {

namespace detail {
inline void require_gold(const RelevanceSet& gold) {
  if (gold.empty()) throw ValidationError("empty relevance set");
}
}  // namespace detail

/// 1/rank of the first relevant item, 0 if none is retrieved.
inline double reciprocal_rank(const RankingQuery& q) {
  detail::require_gold(q.gold);
  const auto& items = q.ranked.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (q.gold.contains(items[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

inline double mrr(std::span<const RankingQuery> queries) {
  if (queries.empty()) throw ValidationError("no samples");
  double sum = 0.0;
  for (const auto& q : queries) sum += reciprocal_rank(q);
  return sum / static_cast<double>(queries.size());
}

struct TopK {
  double precision = 0.0;
  double recall = 0.0;
  double hit_rate = 0.0;
};

inline TopK topk_metrics(const RankingQuery& q, std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  detail::require_gold(q.gold);
  const auto& items = q.ranked.items();
  const std::size_t depth = std::min(k, items.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) hits += q.gold.contains(items[i]) ? 1 : 0;
  return {static_cast<double>(hits) / static_cast<double>(k),
          static_cast<double>(hits) / static_cast<double>(q.gold.size()),
          hits > 0 ? 1.0 : 0.0};
}

inline TopK topk_metrics(std::span<const RankingQuery> queries, std::size_t k) {
  if (queries.empty()) throw ValidationError("no samples");
  TopK acc;
  for (const auto& q : queries) {
    const auto t = topk_metrics(q, k);
    acc.precision += t.precision;
    acc.recall += t.recall;
    acc.hit_rate += t.hit_rate;
  }
  const auto n = static_cast<double>(queries.size());
  return {acc.precision / n, acc.recall / n, acc.hit_rate / n};
}

/// DCG with gains 2^rel - 1 over the whole list, normalized by the DCG of
/// min(|gold|, |list|) relevant items placed first.
inline double ndcg(const RankingQuery& q) {
  detail::require_gold(q.gold);
  const auto& items = q.ranked.items();
  double dcg = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (q.gold.contains(items[i])) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  const std::size_t ideal = std::min(q.gold.size(), items.size());
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i + 2));
  if (idcg == 0.0) return 0.0;
  return std::clamp(dcg / idcg, 0.0, 1.0);
}

inline double ndcg(std::span<const RankingQuery> queries) {
  if (queries.empty()) throw ValidationError("no samples");
  double sum = 0.0;
  for (const auto& q : queries) sum += ndcg(q);
  return sum / static_cast<double>(queries.size());
}

}  // namespace tcmbench::metrics
