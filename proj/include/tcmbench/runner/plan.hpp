#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/datasets/dataset.hpp"
#include "tcmbench/modelclient/cache.hpp"
#include "tcmbench/runner/config.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"
#include "tcmbench/util/hash.hpp"

namespace tcmbench::runner {

enum class PairStatus { Pending, Complete, Failed };

constexpr std::string_view to_string(PairStatus s) {
  switch (s) {
    case PairStatus::Pending: return "pending";
    case PairStatus::Complete: return "complete";
    case PairStatus::Failed: return "failed";
  }
  return "?";
}

inline PairStatus parse_status(std::string_view s) {
  if (s == "pending") return PairStatus::Pending;
  if (s == "complete") return PairStatus::Complete;
  if (s == "failed") return PairStatus::Failed;
  throw ValidationError("unknown pair status: " + std::string(s));
}

struct PairEntry {
  std::string model_id;
  ScenarioKind kind = ScenarioKind::APQ;
  PairStatus status = PairStatus::Pending;
  std::string error;
  std::size_t failed_requests = 0;
  std::string started_at;
  std::string finished_at;
};

struct RunManifest {
  std::string run_id;
  std::string config_digest;
  std::string created_at;
  std::string updated_at;
  DecodeParams decode;
  std::uint64_t seed = 0;
  std::map<ScenarioKind, std::string> dataset_digests;
  std::vector<PairEntry> pairs;  // model-major, in config order

  PairEntry& pair(const std::string& model, ScenarioKind kind) {
    for (auto& p : pairs)
      if (p.model_id == model && p.kind == kind) return p;
    throw ValidationError("manifest has no pair " + model + "/" + std::string(scenarios::to_string(kind)));
  }

  std::size_t count(PairStatus s) const {
    std::size_t n = 0;
    for (const auto& p : pairs) n += p.status == s;
    return n;
  }
};

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["run_id"] = m.run_id;
  j["config_digest"] = m.config_digest;
  j["created_at"] = m.created_at;
  j["updated_at"] = m.updated_at;
  j["decode"] = {{"temperature", m.decode.temperature}, {"max_tokens", m.decode.max_tokens}};
  j["seed"] = m.seed;
  auto& ds = j["datasets"] = nlohmann::ordered_json::object();
  for (const auto& [k, d] : m.dataset_digests) ds[std::string(scenarios::to_string(k))] = d;
  auto& arr = j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.pairs) {
    nlohmann::ordered_json e;
    e["model"] = p.model_id;
    e["scenario"] = std::string(scenarios::to_string(p.kind));
    e["status"] = std::string(to_string(p.status));
    if (!p.error.empty()) e["error"] = p.error;
    if (p.failed_requests) e["failed_requests"] = p.failed_requests;
    if (!p.started_at.empty()) e["started_at"] = p.started_at;
    if (!p.finished_at.empty()) e["finished_at"] = p.finished_at;
    arr.push_back(std::move(e));
  }
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.created_at = j.value("created_at", std::string());
    m.updated_at = j.value("updated_at", std::string());
    m.decode.temperature = j.at("decode").at("temperature").get<double>();
    m.decode.max_tokens = j.at("decode").at("max_tokens").get<int>();
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& [k, d] : j.at("datasets").items())
      m.dataset_digests[scenarios::parse_kind(k)] = d.get<std::string>();
    for (const auto& e : j.at("pairs")) {
      PairEntry p;
      p.model_id = e.at("model").get<std::string>();
      p.kind = scenarios::parse_kind(e.at("scenario").get<std::string>());
      p.status = parse_status(e.at("status").get<std::string>());
      p.error = e.value("error", std::string());
      p.failed_requests = e.value("failed_requests", std::size_t{0});
      p.started_at = e.value("started_at", std::string());
      p.finished_at = e.value("finished_at", std::string());
      m.pairs.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run manifest: ") + e.what());
  }
  return m;
}

inline fs::path manifest_file(const fs::path& output_dir) { return output_dir / "manifest.json"; }

inline RunManifest load_manifest(const fs::path& output_dir) {
  const auto p = manifest_file(output_dir);
  try {
    return manifest_from_json(nlohmann::json::parse(fsutil::read_file(p)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
}

/// Loads and checks every scenario dataset named by the config.
inline std::map<ScenarioKind, datasets::DatasetFile> load_run_datasets(const RunConfig& config) {
  std::map<ScenarioKind, datasets::DatasetFile> out;
  for (const auto& [kind, path] : config.scenarios) {
    auto ds = datasets::load_dataset(path);
    datasets::dataset_stats(ds);
    if (ds.records.empty()) throw ValidationError(path.string() + ": dataset has no records");
    if (ds.kind != kind)
      throw ValidationError(path.string() + ": records are " +
                            std::string(scenarios::to_string(*ds.kind)) + ", configured as " +
                            std::string(scenarios::to_string(kind)));
    out.emplace(kind, std::move(ds));
  }
  return out;
}

/// Digest over everything that changes what a run computes: model names,
/// dataset contents, prompt templates, decode parameters and the embedder.
/// Transport settings (URLs, concurrency, timeouts) are left out.
inline std::string config_digest(const RunConfig& config,
                                  const std::map<ScenarioKind, std::string>& dataset_digests) {
  nlohmann::ordered_json j;
  auto& models = j["models"] = nlohmann::ordered_json::array();
  for (const auto& e : config.endpoints) models.push_back({e.model_id, e.wire_model()});
  auto& ds = j["datasets"] = nlohmann::ordered_json::object();
  for (const auto& [k, d] : dataset_digests) ds[std::string(scenarios::to_string(k))] = d;
  auto& tpl = j["templates"] = nlohmann::ordered_json::object();
  for (const auto& [k, _] : config.scenarios) {
    const auto& t = config.templates.at(k);
    tpl[std::string(scenarios::to_string(k))] = {t.system, t.user, t.exemplar};
  }
  j["decode"] = {config.decode.temperature, config.decode.max_tokens};
  const auto& emb = config.embedder;
  std::string emb_id;
  if (emb.kind == EmbedderKind::Hashed) emb_id = std::to_string(emb.dim);
  if (emb.kind == EmbedderKind::Fixture) emb_id = hash::sha256_hex(fsutil::read_file(emb.location));
  j["embedder"] = {std::string(to_string(emb.kind)), emb_id};
  j["seed"] = config.seed;
  return hash::sha256_hex(j.dump());
}

/// Enumerates every (model, scenario) pair as pending. All datasets are
/// loaded and checked here, before any request is sent.
inline RunManifest plan_runs(const RunConfig& config) {
  config.validate();
  const auto data = load_run_datasets(config);
  RunManifest m;
  for (const auto& [k, ds] : data) m.dataset_digests[k] = ds.manifest.digest;
  m.config_digest = config_digest(config, m.dataset_digests);
  m.run_id = "run-" + m.config_digest.substr(0, 12);
  m.created_at = m.updated_at = modelclient::utc_timestamp();
  m.decode = config.decode;
  m.seed = config.seed;
  for (const auto& e : config.endpoints)
    for (const auto& [k, _] : config.scenarios) {
      PairEntry p;
      p.model_id = e.model_id;
      p.kind = k;
      m.pairs.push_back(std::move(p));
    }
  return m;
}

/// Carries statuses over from a previous manifest of the same config.
inline void adopt_statuses(RunManifest& planned, const RunManifest& previous) {
  if (planned.config_digest != previous.config_digest)
    throw ValidationError("cannot resume " + previous.run_id + ": the config has changed");
  planned.created_at = previous.created_at;
  for (const auto& old : previous.pairs)
    for (auto& p : planned.pairs)
      if (p.model_id == old.model_id && p.kind == old.kind) p = old;
}

/// Serializes manifest updates and persists each one atomically.
class ManifestStore {
 public:
  ManifestStore(RunManifest manifest, fs::path output_dir)
      : manifest_(std::move(manifest)), path_(manifest_file(output_dir)) {}

  template <class F>
  void update(F&& f) {
    std::lock_guard lk(mu_);
    f(manifest_);
    manifest_.updated_at = modelclient::utc_timestamp();
    fsutil::write_atomic(path_, to_json(manifest_).dump(2) + "\n");
  }

  RunManifest snapshot() const {
    std::lock_guard lk(mu_);
    return manifest_;
  }

 private:
  mutable std::mutex mu_;
  RunManifest manifest_;
  fs::path path_;
};

}  // namespace tcmbench::runner
