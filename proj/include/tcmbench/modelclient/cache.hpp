#pragma once

#include <ctime>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "tcmbench/modelclient/client.hpp"
#include "tcmbench/modelclient/types.hpp"
#include "tcmbench/util/fs.hpp"
#include "tcmbench/util/log.hpp"

namespace tcmbench::modelclient {

inline std::string utc_timestamp() {
  const auto t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Content-addressed response store: <dir>/<model_id>/<digest>.json.
/// Entries hold the request, the response and a timestamp.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path entry_path(const std::string& model_id, const ChatRequest& r) const {
    return dir_ / fsutil::safe_component(model_id) / (cache_key(model_id, r) + ".json");
  }

  /// A corrupt or mismatched entry is reported as a miss.
  std::optional<ChatResponse> lookup(const std::string& model_id, const ChatRequest& r) const {
    const auto p = entry_path(model_id, r);
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(fsutil::read_file(p));
      if (j.at("request") != nlohmann::json::parse(request_body(model_id, r).dump()))
        throw std::runtime_error("request does not match key");
      const auto& resp = j.at("response");
      ChatResponse out;
      out.text = resp.at("text").get<std::string>();
      out.finish_reason = resp.value("finish_reason", std::string());
      out.prompt_tokens = resp.value("prompt_tokens", 0L);
      out.completion_tokens = resp.value("completion_tokens", 0L);
      out.latency_ms = resp.value("latency_ms", 0.0);
      out.retrieved_from_cache = true;
      return out;
    } catch (const std::exception& e) {
      log::warn("ignoring corrupt cache entry " + p.string() + ": " + e.what());
      return std::nullopt;
    }
  }

  void store(const std::string& model_id, const ChatRequest& r, const ChatResponse& resp) const {
    nlohmann::ordered_json j;
    j["key"] = cache_key(model_id, r);
    j["request"] = request_body(model_id, r);
    j["response"] = {{"text", resp.text},
                     {"finish_reason", resp.finish_reason},
                     {"prompt_tokens", resp.prompt_tokens},
                     {"completion_tokens", resp.completion_tokens},
                     {"latency_ms", resp.latency_ms}};
    j["timestamp"] = utc_timestamp();
    fsutil::write_atomic(entry_path(model_id, r), j.dump(2) + "\n");
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Serves from the cache when possible; otherwise calls the client and
/// stores the answer.
inline ChatResponse cached_complete(ChatClient& client, const ChatRequest& request,
                                    const ResponseCache& cache) {
  const auto& id = client.endpoint().model_id;
  if (auto hit = cache.lookup(id, request)) return *hit;
  auto resp = client.complete(request);
  cache.store(id, request, resp);
  return resp;
}

}  // namespace tcmbench::modelclient
