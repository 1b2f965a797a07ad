#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tcmbench/metrics/types.hpp"
#include "tcmbench/util/errors.hpp"

namespace tcmbench::metrics {

/// Greedy-matching BERTScore on unit-normalized token embeddings.
/// Precision averages each candidate row's best cosine against the
/// reference; recall is the mirror image. P and R are clipped to [0,1].
inline PRF bert_score(const EmbeddingMatrix& candidate, const EmbeddingMatrix& reference) {
  if (candidate.empty() || reference.empty())
    throw ValidationError("bert_score needs nonempty embedding matrices");
  if (candidate.dim() != reference.dim())
    throw ValidationError("embedding dimension mismatch");

  auto normalized = [](const EmbeddingMatrix& m) {
    std::vector<std::vector<double>> out;
    out.reserve(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      auto row = m.row(i);
      double norm = 0.0;
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      if (!(norm > 0.0)) throw ValidationError("zero-norm embedding row");
      for (double& v : row) v /= norm;
      out.push_back(std::move(row));
    }
    return out;
  };
  const auto c = normalized(candidate);
  const auto r = normalized(reference);

  std::vector<double> best_c(c.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> best_r(r.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < c[i].size(); ++d) dot += c[i][d] * r[j][d];
      best_c[i] = std::max(best_c[i], dot);
      best_r[j] = std::max(best_r[j], dot);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  return PRF::from(std::clamp(mean(best_c), 0.0, 1.0),
                   std::clamp(mean(best_r), 0.0, 1.0));
}

}  // namespace tcmbench::metrics
