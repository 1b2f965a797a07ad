#pragma once

#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "tcmbench/metrics/types.hpp"
#include "tcmbench/modelclient/client.hpp"
#include "tcmbench/modelclient/throttle.hpp"
#include "tcmbench/modelclient/types.hpp"
#include "tcmbench/scenarios/embedding.hpp"
#include "tcmbench/util/errors.hpp"

namespace tcmbench::modelclient {

struct EmbedderInfo {
  std::string model;
  std::size_t dim = 0;
  std::size_t max_batch = 0;
  bool healthy = false;
};

/// Client for the embedding sidecar:
///   POST /embed  {"texts": [...], "max_tokens": n}
///     -> {"model", "dim", "results": [{"tokens", "embeddings", "truncated"}]}
///   GET  /info   -> {"model", "dim", "max_batch", "healthy"}
///   GET  /health -> 200 when ready
/// Empty texts are not sent; they map to an empty matrix.
class HttpEmbeddingProvider final : public scenarios::EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(const std::string& base_url, int max_tokens = 512,
                                 RetryPolicy policy = {}, Sleeper sleeper = real_sleeper(),
                                 double timeout_s = 120.0)
      : url_(parse_url(base_url)),
        max_tokens_(max_tokens),
        policy_(policy),
        sleeper_(std::move(sleeper)),
        timeout_s_(timeout_s) {
    if (max_tokens_ <= 0) throw ConfigError("embedder max_tokens must be positive");
  }

  bool health() {
    auto cli = client();
    auto res = cli.Get(url_.path_prefix + "/health");
    return res && res->status == 200;
  }

  EmbedderInfo info() {
    const auto j = call([&](httplib::Client& c) { return c.Get(url_.path_prefix + "/info"); });
    EmbedderInfo i;
    try {
      i.model = j.at("model").get<std::string>();
      i.dim = j.at("dim").get<std::size_t>();
      i.max_batch = j.value("max_batch", std::size_t{0});
      i.healthy = j.value("healthy", false);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("embedder /info: ") + e.what());
    }
    return i;
  }

  std::string model_id() const override {
    std::lock_guard lk(mu_);
    return model_.value_or("http-embedder");
  }

  std::vector<metrics::EmbeddingMatrix> embed(std::span<const std::string> texts) override {
    std::vector<metrics::EmbeddingMatrix> out(texts.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < texts.size(); ++i)
      if (!texts[i].empty()) pending.push_back(i);
    const std::size_t batch = max_batch();
    for (std::size_t start = 0; start < pending.size(); start += batch) {
      const auto end = std::min(pending.size(), start + batch);
      nlohmann::json body;
      body["texts"] = nlohmann::json::array();
      for (auto k = start; k < end; ++k) body["texts"].push_back(texts[pending[k]]);
      body["max_tokens"] = max_tokens_;
      const auto payload = body.dump();
      const auto j = call([&](httplib::Client& c) {
        return c.Post(url_.path_prefix + "/embed", payload, "application/json");
      });
      auto mats = parse_embed(j, end - start);
      for (auto k = start; k < end; ++k) out[pending[k]] = std::move(mats[k - start]);
    }
    return out;
  }

 private:
  httplib::Client client() const {
    httplib::Client c(url_.origin());
    detail::configure(c, timeout_s_);
    return c;
  }

  std::size_t max_batch() {
    {
      std::lock_guard lk(mu_);
      if (max_batch_) return *max_batch_;
    }
    const auto i = info();
    std::lock_guard lk(mu_);
    max_batch_ = i.max_batch > 0 ? i.max_batch : 32;
    model_ = i.model;
    return *max_batch_;
  }

  template <class F>
  nlohmann::json call(F&& f) {
    std::string last;
    int status = 0;
    for (int attempt = 0; attempt < policy_.max_attempts; ++attempt) {
      if (attempt > 0) {
        Millis d;
        {
          std::lock_guard lk(mu_);
          d = policy_.delay(attempt - 1, rng_);
        }
        sleeper_(d);
      }
      auto cli = client();
      auto res = f(cli);
      if (!res) {
        last = "connection error: " + httplib::to_string(res.error());
        status = 0;
        continue;
      }
      status = res->status;
      if (detail::retryable_status(status)) {
        last = "HTTP " + std::to_string(status);
        continue;
      }
      if (status < 200 || status > 299)
        throw TransportError("embedder: HTTP " + std::to_string(status) + ": " + res->body, status);
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("embedder: response is not JSON");
      }
    }
    throw TransportError("embedder: gave up (" + last + ")", status);
  }

  std::vector<metrics::EmbeddingMatrix> parse_embed(const nlohmann::json& j, std::size_t expected) {
    std::vector<metrics::EmbeddingMatrix> out;
    try {
      const auto dim = j.at("dim").get<std::size_t>();
      const auto& results = j.at("results");
      if (!results.is_array() || results.size() != expected)
        throw ProtocolError("embedder returned " + std::to_string(results.size()) +
                            " results for " + std::to_string(expected) + " texts");
      {
        std::lock_guard lk(mu_);
        model_ = j.at("model").get<std::string>();
      }
      for (const auto& r : results) {
        const auto tokens = r.at("tokens").get<std::vector<std::string>>();
        auto rows = r.at("embeddings").get<std::vector<std::vector<double>>>();
        if (rows.size() != tokens.size())
          throw ProtocolError("embedder: token and row counts differ");
        for (const auto& row : rows)
          if (row.size() != dim) throw ProtocolError("embedder: row width differs from dim");
        out.emplace_back(std::move(rows));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("embedder /embed: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ProtocolError(std::string("embedder /embed: ") + e.what());
    }
    return out;
  }

  Url url_;
  int max_tokens_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  double timeout_s_;
  mutable std::mutex mu_;
  std::mt19937_64 rng_{0xe3b};
  std::optional<std::size_t> max_batch_;
  std::optional<std::string> model_;
};

}  // namespace tcmbench::modelclient
