#pragma once

// Reference-based text generation metrics over token sequences: BLEU,
// METEOR (exact-match alignment), ROUGE-N and ROUGE-L.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "tcmbench/metrics/ngram.hpp"
#include "tcmbench/metrics/types.hpp"

namespace tcmbench::metrics {

/// BLEU = BP * exp(sum_n w_n log P_n) with clipped n-gram precision P_n.
///
/// P_n of zero is floored at `smoothing_floor`. An order at which neither
/// side has any n-gram (both shorter than n) is vacuously matched (P_n = 1).
/// BP = 1 when |cand| >= |ref|, else exp(1 - |ref|/|cand|).
inline Score bleu(const TokenSequence& candidate, const TokenSequence& reference,
                  const BleuParams& params = {}) {
  params.validate();
  if (candidate.empty()) return Score::degenerate_zero();

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= params.order(); ++n) {
    const auto cand = ngrams(candidate, n);
    const auto ref = ngrams(reference, n);
    const auto cand_total = cand.total();
    double p = 0.0;
    if (cand_total == 0) {
      p = ref.total() == 0 ? 1.0 : 0.0;
    } else {
      p = static_cast<double>(clipped_matches(cand, ref)) /
          static_cast<double>(cand_total);
    }
    if (p <= 0.0) p = params.smoothing_floor;
    log_sum += params.weights[n - 1] * std::log(p);
  }

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return {std::clamp(bp * std::exp(log_sum), 0.0, 1.0), false};
}

/// Matched unigram pairs (candidate position, reference position), sorted by
/// candidate position.
using Alignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Number of maximal runs that are contiguous in both sequences.
inline std::size_t count_chunks(const Alignment& a) {
  std::size_t chunks = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k == 0 || a[k].first != a[k - 1].first + 1 ||
        a[k].second != a[k - 1].second + 1)
      ++chunks;
  }
  return chunks;
}

namespace detail {

inline void intern(const TokenSequence& a, const TokenSequence& b,
                   std::vector<int>& ia, std::vector<int>& ib, int& types) {
  std::map<std::string, int> ids;
  auto id = [&](const std::string& s) {
    return ids.emplace(s, static_cast<int>(ids.size())).first->second;
  };
  ia.clear();
  ib.clear();
  for (const auto& t : a) ia.push_back(id(t));
  for (const auto& t : b) ib.push_back(id(t));
  types = static_cast<int>(ids.size());
}

// Greedy tiling: repeatedly take the longest common run of unmatched
// positions. Always reaches the maximum match count, since any leftover
// equal pair is a tile of length one.
inline Alignment greedy_tiling(const std::vector<int>& c, const std::vector<int>& r) {
  std::vector<bool> cu(c.size(), false), ru(r.size(), false);
  // run[i][j]: length of the common unmatched run starting at (i, j)
  std::vector<std::vector<std::size_t>> run(c.size() + 1,
                                            std::vector<std::size_t>(r.size() + 1, 0));
  Alignment out;
  for (;;) {
    std::size_t best_len = 0, bi = 0, bj = 0;
    for (std::size_t i = c.size(); i-- > 0;) {
      for (std::size_t j = r.size(); j-- > 0;) {
        run[i][j] = (!cu[i] && !ru[j] && c[i] == r[j]) ? run[i + 1][j + 1] + 1 : 0;
      }
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (run[i][j] > best_len) {
          best_len = run[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t k = 0; k < best_len; ++k) {
      cu[bi + k] = true;
      ru[bj + k] = true;
      out.emplace_back(bi + k, bj + k);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Depth-first search over maximum-size alignments for the fewest chunks,
// bounded by the best known solution and a node budget.
class ChunkSearch {
 public:
  ChunkSearch(const std::vector<int>& c, const std::vector<int>& r, int types,
              Alignment seed, std::size_t budget)
      : c_(c), r_(r), best_(std::move(seed)), budget_(budget) {
    best_chunks_ = count_chunks(best_);
    std::vector<std::size_t> cc(types, 0), rc(types, 0);
    for (int t : c_) ++cc[t];
    for (int t : r_) ++rc[t];
    need_.resize(types);
    for (int t = 0; t < types; ++t) need_[t] = std::min(cc[t], rc[t]);
    // remaining_[i][t]: occurrences of t in c[i..]
    remaining_.assign(c_.size() + 1, std::vector<std::size_t>(types, 0));
    for (std::size_t i = c_.size(); i-- > 0;) {
      remaining_[i] = remaining_[i + 1];
      ++remaining_[i][c_[i]];
    }
    used_.assign(r_.size(), false);
    positions_.resize(types);
    for (std::size_t j = 0; j < r_.size(); ++j) positions_[r_[j]].push_back(j);
  }

  /// True when the search space was exhausted (result is optimal).
  bool run() {
    dfs(0, kNone, 0);
    return !exhausted_;
  }
  const Alignment& best() const { return best_; }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void dfs(std::size_t i, std::size_t prev_ref, std::size_t chunks) {
    if (exhausted_) return;
    if (++nodes_ > budget_) {
      exhausted_ = true;
      return;
    }
    if (chunks >= best_chunks_) return;
    if (i == c_.size()) {
      best_ = current_;
      best_chunks_ = chunks;
      return;
    }
    const int t = c_[i];
    if (need_[t] > 0) {
      // prefer continuing the current chunk
      if (prev_ref != kNone && prev_ref + 1 < r_.size() && !used_[prev_ref + 1] &&
          r_[prev_ref + 1] == t)
        take(i, prev_ref + 1, chunks);
      for (std::size_t j : positions_[t]) {
        if (used_[j]) continue;
        if (prev_ref != kNone && j == prev_ref + 1) continue;
        take(i, j, chunks + 1);
      }
    }
    // leave c[i] unmatched only if later occurrences can still satisfy need
    if (remaining_[i + 1][t] >= need_[t]) dfs(i + 1, kNone, chunks);
  }

  void take(std::size_t i, std::size_t j, std::size_t chunks) {
    const int t = c_[i];
    used_[j] = true;
    --need_[t];
    current_.emplace_back(i, j);
    dfs(i + 1, j, chunks);
    current_.pop_back();
    ++need_[t];
    used_[j] = false;
  }

  const std::vector<int>& c_;
  const std::vector<int>& r_;
  Alignment best_;
  Alignment current_;
  std::size_t best_chunks_;
  std::vector<std::size_t> need_;
  std::vector<std::vector<std::size_t>> remaining_;
  std::vector<bool> used_;
  std::vector<std::vector<std::size_t>> positions_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  bool exhausted_ = false;
};

}  // namespace detail

/// Maximum-match exact alignment with the fewest chunks. The search is exact
/// until `search_budget` nodes are visited; past that the best alignment
/// found so far (never worse than greedy tiling) is returned.
inline Alignment meteor_alignment(const TokenSequence& candidate,
                                  const TokenSequence& reference,
                                  std::size_t search_budget = 100000) {
  std::vector<int> c, r;
  int types = 0;
  detail::intern(candidate, reference, c, r, types);
  auto seed = detail::greedy_tiling(c, r);
  if (seed.size() <= 1) return seed;
  detail::ChunkSearch search(c, r, types, std::move(seed), search_budget);
  search.run();
  return search.best();
}

/// METEOR = (1 - Pen) * F, F = P R / (alpha P + (1 - alpha) R),
/// Pen = gamma (chunks / matches)^beta.
inline Score meteor(const TokenSequence& candidate, const TokenSequence& reference,
                    const MeteorParams& params = {}) {
  params.validate();
  if (candidate.empty() || reference.empty()) return Score::degenerate_zero();
  const auto align = meteor_alignment(candidate, reference);
  if (align.empty()) return {0.0, false};
  const double ch = static_cast<double>(align.size());
  const double m = static_cast<double>(count_chunks(align));
  const double p = ch / static_cast<double>(candidate.size());
  const double r = ch / static_cast<double>(reference.size());
  const double f = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double pen = params.gamma * std::pow(m / ch, params.beta);
  return {std::clamp((1.0 - pen) * f, 0.0, 1.0), false};
}

/// Recall-oriented n-gram overlap: clipped matches over reference n-grams.
inline Score rouge_n(const TokenSequence& candidate, const TokenSequence& reference,
                     std::size_t n) {
  const auto ref = ngrams(reference, n);
  const auto ref_total = ref.total();
  if (ref_total == 0) return Score::degenerate_zero();
  const auto cand = ngrams(candidate, n);
  return {static_cast<double>(clipped_matches(cand, ref)) /
              static_cast<double>(ref_total),
          false};
}

inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// ROUGE-L = (1 + b^2) LCS / (len(reference) + b^2 len(candidate)).
inline Score rouge_l(const TokenSequence& candidate, const TokenSequence& reference,
                     RougeLBeta beta = {}) {
  beta.validate();
  if (candidate.empty() && reference.empty()) return Score::degenerate_zero();
  const double b2 = beta.beta * beta.beta;
  const double lcs = static_cast<double>(lcs_length(reference, candidate));
  const double denom = static_cast<double>(reference.size()) +
                       b2 * static_cast<double>(candidate.size());
  return {std::clamp((1.0 + b2) * lcs / denom, 0.0, 1.0), false};
}

}  // namespace tcmbench::metrics
