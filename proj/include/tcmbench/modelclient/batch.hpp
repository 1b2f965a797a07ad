#pragma once

#include <algorithm>
#include <atomic>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tcmbench/modelclient/cache.hpp"
#include "tcmbench/modelclient/client.hpp"

namespace tcmbench::modelclient {

/// One slot of a batch: a response, or the error that replaced it.
struct SlotResult {
  std::optional<ChatResponse> response;
  std::string error;
  int status = 0;  // HTTP status for transport errors

  bool ok() const noexcept { return response.has_value(); }
};

/// Runs requests on up to max_concurrency workers. Results keep input
/// order; a failing request fills its own slot and never aborts the batch.
inline std::vector<SlotResult> batch_dispatch(ChatClient& client,
                                              const std::vector<ChatRequest>& requests,
                                              const ResponseCache* cache = nullptr) {
  std::vector<SlotResult> out(requests.size());
  if (requests.empty()) return out;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        out[i].response = cache ? cached_complete(client, requests[i], *cache)
                                : client.complete(requests[i]);
      } catch (const TransportError& e) {
        out[i].error = e.what();
        out[i].status = e.status();
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const auto n = std::min<std::size_t>(requests.size(),
                                       static_cast<std::size_t>(client.endpoint().max_concurrency));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace tcmbench::modelclient
