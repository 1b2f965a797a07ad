#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/modelclient/embed_http.hpp"
#include "tcmbench/modelclient/prompt.hpp"
#include "tcmbench/modelclient/throttle.hpp"
#include "tcmbench/modelclient/types.hpp"
#include "tcmbench/scenarios/embedding.hpp"
#include "tcmbench/scenarios/kind.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"

namespace tcmbench::runner {

namespace fs = std::filesystem;
using modelclient::DecodeParams;
using modelclient::ModelEndpoint;
using modelclient::RetryPolicy;
using modelclient::TemplateSet;
using scenarios::ScenarioKind;

enum class EmbedderKind { None, Hashed, Fixture, Http };

constexpr std::string_view to_string(EmbedderKind k) {
  switch (k) {
    case EmbedderKind::None: return "none";
    case EmbedderKind::Hashed: return "hashed";
    case EmbedderKind::Fixture: return "fixture";
    case EmbedderKind::Http: return "http";
  }
  return "?";
}

/// Where BERTScore embeddings come from. `location` is a file for fixture
/// embeddings and a base URL for the HTTP sidecar.
struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::None;
  std::string location;
  std::size_t dim = 64;  // hashed only
  int max_tokens = 512;  // http only
};

struct RunConfig {
  std::vector<ModelEndpoint> endpoints;
  std::map<ScenarioKind, fs::path> scenarios;
  TemplateSet templates = modelclient::default_templates();
  fs::path cache_dir;
  fs::path output_dir;
  std::uint64_t seed = 0;
  int concurrency = 4;  // pairs in flight
  EmbedderConfig embedder;
  DecodeParams decode;
  RetryPolicy retry;

  void validate() const {
    if (endpoints.empty()) throw ValidationError("config: at least one endpoint is required");
    if (scenarios.empty()) throw ValidationError("config: at least one scenario is required");
    std::map<std::string, int> seen;
    for (const auto& e : endpoints) {
      e.validate();
      if (seen[fsutil::safe_component(e.model_id)]++)
        throw ValidationError("config: model_id '" + e.model_id + "' duplicates another's report directory");
    }
    if (cache_dir.empty()) throw ValidationError("config: cache_dir is required");
    if (output_dir.empty()) throw ValidationError("config: output_dir is required");
    if (fs::weakly_canonical(cache_dir) == fs::weakly_canonical(output_dir))
      throw ValidationError("config: output_dir and cache_dir must differ");
    if (concurrency < 1) throw ValidationError("config: concurrency must be >= 1");
    if (!(decode.temperature >= 0.0) || decode.max_tokens <= 0)
      throw ValidationError("config: decode needs temperature >= 0 and max_tokens > 0");
    if (retry.max_attempts < 1) throw ValidationError("config: retry.max_attempts must be >= 1");
    for (const auto& [kind, _] : scenarios) {
      const auto& suite = scenarios::metric_suite_for(kind);
      const bool bert = std::find(suite.begin(), suite.end(), "bertscore") != suite.end();
      if (bert && embedder.kind == EmbedderKind::None)
        throw ValidationError("config: scenario " + std::string(scenarios::to_string(kind)) +
                              " scores bertscore and needs an embedder");
      templates.at(kind);
    }
    if ((embedder.kind == EmbedderKind::Fixture || embedder.kind == EmbedderKind::Http) &&
        embedder.location.empty())
      throw ValidationError("config: embedder needs a path or url");
  }
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace detail

/// Reads a RunConfig from its JSON form. Relative paths resolve against
/// `base_dir`.
///
///   {"endpoints": [...], "scenarios": {"APQ": "data/apq.jsonl"},
///    "templates": "prompts.json" | {...}, "cache_dir": "...", "output_dir": "...",
///    "seed": 0, "concurrency": 4,
///    "embedder": {"kind": "hashed" | "fixture" | "http", "path" | "url": "..."},
///    "decode": {"temperature": 0, "max_tokens": 4096},
///    "retry": {"max_attempts": 5, "base_delay_ms": 1000, "max_delay_ms": 60000}}
inline RunConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir = {}) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& e : j.at("endpoints")) c.endpoints.push_back(modelclient::endpoint_from_json(e));
    for (const auto& [key, v] : j.at("scenarios").items()) {
      const auto kind = scenarios::try_parse_kind(key);
      if (!kind) throw ConfigError("config: unknown scenario kind '" + key + "'");
      c.scenarios[*kind] = detail::resolve(base_dir, v.get<std::string>());
    }
    if (j.contains("templates")) {
      const auto& t = j.at("templates");
      if (t.is_string())
        c.templates = modelclient::load_templates(detail::resolve(base_dir, t.get<std::string>()));
      else
        c.templates.merge_json(t);
    }
    c.cache_dir = detail::resolve(base_dir, j.at("cache_dir").get<std::string>());
    c.output_dir = detail::resolve(base_dir, j.at("output_dir").get<std::string>());
    c.seed = j.value("seed", std::uint64_t{0});
    c.concurrency = j.value("concurrency", c.concurrency);
    if (j.contains("embedder")) {
      const auto& e = j.at("embedder");
      const auto kind = e.at("kind").get<std::string>();
      if (kind == "hashed") {
        c.embedder.kind = EmbedderKind::Hashed;
        c.embedder.dim = e.value("dim", c.embedder.dim);
      } else if (kind == "fixture") {
        c.embedder.kind = EmbedderKind::Fixture;
        c.embedder.location = detail::resolve(base_dir, e.at("path").get<std::string>()).string();
      } else if (kind == "http") {
        c.embedder.kind = EmbedderKind::Http;
        c.embedder.location = e.at("url").get<std::string>();
        c.embedder.max_tokens = e.value("max_tokens", c.embedder.max_tokens);
      } else if (kind != "none") {
        throw ConfigError("config: unknown embedder kind '" + kind + "'");
      }
    }
    if (j.contains("decode")) {
      const auto& d = j.at("decode");
      c.decode.temperature = d.value("temperature", c.decode.temperature);
      c.decode.max_tokens = d.value("max_tokens", c.decode.max_tokens);
    }
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.base_delay = modelclient::Millis(r.value("base_delay_ms", c.retry.base_delay.count()));
      c.retry.max_delay = modelclient::Millis(r.value("max_delay_ms", c.retry.max_delay.count()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(fsutil::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

inline std::unique_ptr<scenarios::EmbeddingProvider> make_embedder(const EmbedderConfig& e) {
  switch (e.kind) {
    case EmbedderKind::None: return nullptr;
    case EmbedderKind::Hashed: return std::make_unique<scenarios::HashedEmbeddingProvider>(e.dim);
    case EmbedderKind::Fixture:
      return std::make_unique<scenarios::FixtureEmbeddingProvider>(e.location);
    case EmbedderKind::Http:
      return std::make_unique<modelclient::HttpEmbeddingProvider>(e.location, e.max_tokens);
  }
  return nullptr;
}

}  // namespace tcmbench::runner
