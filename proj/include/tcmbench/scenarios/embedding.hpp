#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/metrics/tokenize.hpp"
#include "tcmbench/metrics/types.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"
#include "tcmbench/util/hash.hpp"

namespace tcmbench::scenarios {

/// Source of token-aligned embeddings for BERTScore.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One matrix per input text, rows aligned to that text's tokens.
  virtual std::vector<metrics::EmbeddingMatrix> embed(std::span<const std::string> texts) = 0;
  virtual std::string model_id() const = 0;
};

/// Precomputed embeddings read from a JSON file:
///   {"model": "...", "dim": 2,
///    "texts": {"<text>": {"tokens": [...], "embeddings": [[...], ...]}}}
class FixtureEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FixtureEmbeddingProvider(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(fsutil::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("embedding fixture " + path.string() + ": " + e.what());
    }
    model_ = doc.value("model", std::string("fixture"));
    const auto dim = doc.at("dim").get<std::size_t>();
    for (const auto& [text, entry] : doc.at("texts").items()) {
      auto rows = entry.at("embeddings").get<std::vector<std::vector<double>>>();
      const auto tokens = entry.at("tokens").get<std::vector<std::string>>();
      if (rows.size() != tokens.size())
        throw ValidationError("embedding fixture: token/row count mismatch for '" + text + "'");
      metrics::EmbeddingMatrix m(std::move(rows));
      if (!m.empty() && m.dim() != dim)
        throw ValidationError("embedding fixture: dim mismatch for '" + text + "'");
      entries_.emplace(text, std::move(m));
    }
  }

  std::vector<metrics::EmbeddingMatrix> embed(std::span<const std::string> texts) override {
    std::vector<metrics::EmbeddingMatrix> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      auto it = entries_.find(t);
      if (it == entries_.end()) throw ValidationError("no fixture embedding for text: " + t);
      out.push_back(it->second);
    }
    return out;
  }

  std::string model_id() const override { return model_; }

 private:
  std::string model_;
  std::map<std::string, metrics::EmbeddingMatrix> entries_;
};

/// Deterministic, dependency-free embeddings: each token maps to a hashed
/// pseudo-random direction blended with its neighbours. Not a language
/// model; intended for offline dry runs and tests of the scoring path.
class HashedEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashedEmbeddingProvider(std::size_t dim = 64) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("embedding dim must be positive");
  }

  std::vector<metrics::EmbeddingMatrix> embed(std::span<const std::string> texts) override {
    std::vector<metrics::EmbeddingMatrix> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      const auto tokens = metrics::tokenize(text);
      std::vector<std::vector<double>> base;
      for (const auto& tok : tokens) base.push_back(direction(tok));
      std::vector<std::vector<double>> rows(base.size(), std::vector<double>(dim_, 0.0));
      for (std::size_t i = 0; i < base.size(); ++i) {
        for (std::size_t d = 0; d < dim_; ++d) {
          double v = base[i][d];
          if (i > 0) v += 0.25 * base[i - 1][d];
          if (i + 1 < base.size()) v += 0.25 * base[i + 1][d];
          rows[i][d] = v;
        }
      }
      out.emplace_back(std::move(rows));
    }
    return out;
  }

  std::string model_id() const override { return "hashed-" + std::to_string(dim_); }

 private:
  std::vector<double> direction(const std::string& token) const {
    std::vector<double> v(dim_);
    std::uint64_t state = hash::fnv1a64(token);
    double norm = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      state = hash::splitmix64(state);
      v[d] = static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      norm += v[d] * v[d];
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  }

  std::size_t dim_;
};

}  // namespace tcmbench::scenarios
