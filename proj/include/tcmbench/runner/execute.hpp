#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tcmbench/modelclient/batch.hpp"
#include "tcmbench/modelclient/cache.hpp"
#include "tcmbench/modelclient/client.hpp"
#include "tcmbench/modelclient/prompt.hpp"
#include "tcmbench/runner/config.hpp"
#include "tcmbench/runner/plan.hpp"
#include "tcmbench/runner/report.hpp"
#include "tcmbench/scenarios/evaluate.hpp"
#include "tcmbench/util/hash.hpp"
#include "tcmbench/util/log.hpp"

namespace tcmbench::runner {

using ClientFactory =
    std::function<std::unique_ptr<modelclient::ChatClient>(const ModelEndpoint&)>;

struct ExecuteOptions {
  ClientFactory make_client;                         // default: HttpChatClient
  scenarios::EmbeddingProvider* embedder = nullptr;  // default: built from the config
};

struct RunResult {
  RunManifest manifest;
  PairReports reports;
  std::size_t executed = 0;  // pairs that were (re)run rather than reused

  bool any_failed() const { return manifest.count(PairStatus::Failed) > 0; }
};

namespace detail {

/// Serializes calls into a provider that may not be thread-safe.
class SerializedEmbedder final : public scenarios::EmbeddingProvider {
 public:
  explicit SerializedEmbedder(scenarios::EmbeddingProvider& inner) : inner_(inner) {}

  std::vector<metrics::EmbeddingMatrix> embed(std::span<const std::string> texts) override {
    std::lock_guard lk(mu_);
    return inner_.embed(texts);
  }
  std::string model_id() const override {
    std::lock_guard lk(mu_);
    return inner_.model_id();
  }

 private:
  scenarios::EmbeddingProvider& inner_;
  mutable std::mutex mu_;
};

inline void remove_pair_files(const fs::path& output_dir, const std::string& model, ScenarioKind k) {
  std::error_code ec;
  fs::remove(pair_report_path(output_dir, model, k), ec);
  fs::remove(pair_items_path(output_dir, model, k), ec);
}

}  // namespace detail

/// Runs every pair that is not already complete with a readable report,
/// up to `config.concurrency` pairs at a time. A pair whose requests fail
/// is marked failed; the rest carry on. Throws only for problems that
/// affect the whole run: an unwritable output dir, changed datasets, or a
/// missing credential.
inline RunResult execute_runs(RunManifest manifest, const RunConfig& config, ExecuteOptions opts = {}) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create output dir " + config.output_dir.string() + ": " + ec.message());

  const auto data = load_run_datasets(config);
  for (const auto& [k, ds] : data) {
    auto it = manifest.dataset_digests.find(k);
    if (it == manifest.dataset_digests.end() || it->second != ds.manifest.digest)
      throw ValidationError(ds.path.string() + ": dataset changed since the run was planned");
  }
  for (const auto& e : config.endpoints) e.credential();

  if (!opts.make_client) {
    opts.make_client = [&config](const ModelEndpoint& e) -> std::unique_ptr<modelclient::ChatClient> {
      return std::make_unique<modelclient::HttpChatClient>(
          e, config.retry, modelclient::real_sleeper(), config.seed ^ hash::fnv1a64(e.model_id));
    };
  }
  std::map<std::string, std::unique_ptr<modelclient::ChatClient>> clients;
  for (const auto& e : config.endpoints) clients[e.model_id] = opts.make_client(e);

  std::unique_ptr<scenarios::EmbeddingProvider> owned_embedder;
  if (!opts.embedder) {
    owned_embedder = make_embedder(config.embedder);
    opts.embedder = owned_embedder.get();
  }
  std::optional<detail::SerializedEmbedder> embedder;
  if (opts.embedder) embedder.emplace(*opts.embedder);

  const modelclient::ResponseCache cache(config.cache_dir);
  ManifestStore store(std::move(manifest), config.output_dir);
  store.update([](RunManifest&) {});

  RunResult result;
  std::mutex result_mu;
  std::vector<std::size_t> work;
  {
    const auto snap = store.snapshot();
    for (std::size_t i = 0; i < snap.pairs.size(); ++i) {
      const auto& p = snap.pairs[i];
      if (p.status == PairStatus::Complete) {
        if (auto r = read_pair_report(config.output_dir, p.model_id, p.kind)) {
          result.reports.emplace(PairKey{p.model_id, p.kind}, std::move(*r));
          continue;
        }
      }
      work.push_back(i);
    }
  }
  result.executed = work.size();

  auto run_pair = [&](std::size_t index) {
    const auto pair = store.snapshot().pairs[index];
    const auto label = pair.model_id + "/" + std::string(scenarios::to_string(pair.kind));
    store.update([&](RunManifest& m) {
      auto& p = m.pairs[index];
      p.status = PairStatus::Pending;
      p.error.clear();
      p.failed_requests = 0;
      p.started_at = modelclient::utc_timestamp();
      p.finished_at.clear();
    });
    auto fail = [&](const std::string& why, std::size_t failed_requests) {
      log::warn(label + " failed: " + why);
      detail::remove_pair_files(config.output_dir, pair.model_id, pair.kind);
      store.update([&](RunManifest& m) {
        auto& p = m.pairs[index];
        p.status = PairStatus::Failed;
        p.error = why;
        p.failed_requests = failed_requests;
        p.finished_at = modelclient::utc_timestamp();
      });
    };
    try {
      const auto& records = data.at(pair.kind).records;
      std::vector<modelclient::ChatRequest> requests;
      requests.reserve(records.size());
      for (const auto& ex : records)
        requests.push_back(modelclient::render_prompt(ex, config.templates, config.decode));
      const auto slots = modelclient::batch_dispatch(*clients.at(pair.model_id), requests, &cache);

      std::size_t failed = 0;
      std::string first_error;
      std::vector<scenarios::EvalItem> items;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].ok()) {
          if (failed++ == 0) first_error = records[i].id + ": " + slots[i].error;
          continue;
        }
        items.emplace_back(records[i], scenarios::ModelResponse{slots[i].response->text});
      }
      if (failed > 0) {
        fail(std::to_string(failed) + " of " + std::to_string(slots.size()) + " requests failed (" +
                 first_error + ")",
             failed);
        return;
      }
      auto report = scenarios::evaluate_scenario(pair.kind, items, embedder ? &*embedder : nullptr);
      write_pair_report(config.output_dir, pair.model_id, report);
      {
        std::lock_guard lk(result_mu);
        result.reports.insert_or_assign(PairKey{pair.model_id, pair.kind}, std::move(report));
      }
      store.update([&](RunManifest& m) {
        auto& p = m.pairs[index];
        p.status = PairStatus::Complete;
        p.finished_at = modelclient::utc_timestamp();
      });
      log::info(label + " complete");
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what(), 0);
    }
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t w = next++; w < work.size(); w = next++) {
      try {
        run_pair(work[w]);
      } catch (...) {
        std::lock_guard lk(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        next = work.size();
      }
    }
  };
  const auto threads = std::min<std::size_t>(work.size(), static_cast<std::size_t>(config.concurrency));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (fatal) std::rethrow_exception(fatal);

  result.manifest = store.snapshot();
  emit_reports(result.reports, result.manifest, config.output_dir);
  return result;
}

}  // namespace tcmbench::runner
