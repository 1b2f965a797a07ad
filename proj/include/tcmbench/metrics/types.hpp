#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tcmbench/util/utf8.hpp"

namespace tcmbench::metrics {

/// A metric value in [0,1]. `degenerate` marks inputs for which the formula
/// is undefined (empty candidate, empty reference) and a convention was used.
struct Score {
  double value = 0.0;
  bool degenerate = false;

  static Score degenerate_zero() { return {0.0, true}; }
};

/// Ordered non-empty tokens without whitespace.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> tokens)
      : tokens_(std::move(tokens)) {
    for (const auto& t : tokens_) {
      if (t.empty()) throw std::invalid_argument("empty token");
      for (char32_t c : utf8::decode(t)) {
        if (utf8::is_space(c))
          throw std::invalid_argument("token contains whitespace: " + t);
      }
    }
  }
  TokenSequence(std::initializer_list<std::string> tokens)
      : TokenSequence(std::vector<std::string>(tokens)) {}

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PRF from(double p, double r) {
    return {p, r, (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0};
  }
};

/// Recommendation output; items are pairwise distinct.
class RankedList {
 public:
  RankedList() = default;
  explicit RankedList(std::vector<std::string> items) : items_(std::move(items)) {
    std::set<std::string> seen;
    for (const auto& it : items_) {
      if (!seen.insert(it).second)
        throw std::invalid_argument("duplicate ranked item: " + it);
    }
  }
  RankedList(std::initializer_list<std::string> items)
      : RankedList(std::vector<std::string>(items)) {}

  const std::vector<std::string>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }

 private:
  std::vector<std::string> items_;
};

/// Ground-truth items for one query.
class RelevanceSet {
 public:
  RelevanceSet() = default;
  explicit RelevanceSet(std::set<std::string> gold) : gold_(std::move(gold)) {}
  RelevanceSet(std::initializer_list<std::string> gold) : gold_(gold) {}

  bool contains(const std::string& s) const { return gold_.count(s) != 0; }
  std::size_t size() const noexcept { return gold_.size(); }
  bool empty() const noexcept { return gold_.empty(); }
  const std::set<std::string>& items() const noexcept { return gold_; }

 private:
  std::set<std::string> gold_;
};

struct RankingQuery {
  RankedList ranked;
  RelevanceSet gold;
};

struct BleuParams {
  std::vector<double> weights{0.25, 0.25, 0.25, 0.25};
  double smoothing_floor = 1e-9;

  std::size_t order() const noexcept { return weights.size(); }

  static BleuParams uniform(std::size_t order, double floor = 1e-9) {
    if (order == 0) throw std::invalid_argument("BLEU order must be >= 1");
    return {std::vector<double>(order, 1.0 / static_cast<double>(order)),
            floor};
  }

  void validate() const {
    if (weights.empty()) throw std::invalid_argument("BLEU order must be >= 1");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("negative BLEU weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("BLEU weights must sum to 1");
    if (!(smoothing_floor > 0.0))
      throw std::invalid_argument("BLEU smoothing floor must be positive");
  }
};

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw std::invalid_argument("METEOR alpha must lie in [0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw std::invalid_argument("METEOR gamma must lie in [0,1]");
    if (!(beta >= 0.0)) throw std::invalid_argument("METEOR beta must be >= 0");
  }
};

struct RougeLBeta {
  double beta = 1.0;

  void validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("ROUGE-L beta must be > 0");
  }
};

/// One embedding row per token, all of width `dim()`.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(std::vector<std::vector<double>> rows)
      : rows_(std::move(rows)) {
    if (rows_.empty()) return;
    dim_ = rows_.front().size();
    if (dim_ == 0) throw std::invalid_argument("embedding dim must be positive");
    for (const auto& r : rows_) {
      if (r.size() != dim_)
        throw std::invalid_argument("ragged embedding matrix");
      bool nonzero = false;
      for (double v : r) {
        if (!std::isfinite(v))
          throw std::invalid_argument("non-finite embedding value");
        nonzero = nonzero || v != 0.0;
      }
      if (!nonzero) throw std::invalid_argument("zero-norm embedding row");
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::vector<double>& row(std::size_t i) const { return rows_[i]; }

 private:
  std::vector<std::vector<double>> rows_;
  std::size_t dim_ = 0;
};

}  // namespace tcmbench::metrics
