#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "tcmbench/modelclient/throttle.hpp"
#include "tcmbench/modelclient/types.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/log.hpp"

namespace tcmbench::modelclient {

/// Anything that turns a chat request into a response.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual const ModelEndpoint& endpoint() const = 0;
};

namespace detail {

inline bool retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

/// Reads choices[0].message.content and usage from a completion body.
inline ChatResponse parse_completion(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("completion body is not JSON");
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw ProtocolError("completion body has no choices");
  const auto& choice = j["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content") || !choice["message"]["content"].is_string())
    throw ProtocolError("completion body has no choices[0].message.content string");
  ChatResponse r;
  r.text = choice["message"]["content"].get<std::string>();
  if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
    r.finish_reason = choice["finish_reason"].get<std::string>();
  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& u = j["usage"];
    if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_integer())
      r.prompt_tokens = u["prompt_tokens"].get<long>();
    if (u.contains("completion_tokens") && u["completion_tokens"].is_number_integer())
      r.completion_tokens = u["completion_tokens"].get<long>();
  }
  return r;
}

inline void configure(httplib::Client& c, double timeout_s) {
  const auto t = std::chrono::milliseconds(static_cast<long>(timeout_s * 1000.0));
  c.set_connection_timeout(t);
  c.set_read_timeout(t);
  c.set_write_timeout(t);
}

}  // namespace detail

/// HTTP chat-completion client. Safe to share across threads: in-flight
/// requests are bounded by the endpoint's concurrency and spaced by its
/// rate cap. Throttling, 5xx and connection failures are retried.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ModelEndpoint endpoint, RetryPolicy policy = {},
                          Sleeper sleeper = real_sleeper(), std::uint64_t jitter_seed = 0x5eed)
      : endpoint_(std::move(endpoint)),
        url_((endpoint_.validate(), parse_url(endpoint_.base_url))),
        policy_(policy),
        sleeper_(std::move(sleeper)),
        rng_(jitter_seed),
        in_flight_(endpoint_.max_concurrency),
        limiter_(endpoint_.requests_per_minute) {
    if (policy_.max_attempts < 1) throw ConfigError("retry policy needs at least one attempt");
  }

  const ModelEndpoint& endpoint() const override { return endpoint_; }

  /// HTTP attempts issued so far, including retries.
  long attempts() const noexcept { return attempts_.load(); }

  ChatResponse complete(const ChatRequest& request) override {
    request.validate();
    const auto credential = endpoint_.credential();
    const auto body = request_body(endpoint_.wire_model(), request).dump();
    const auto path = url_.path_prefix + endpoint_.path;

    int last_status = 0;
    std::string last_error;
    for (int attempt = 0; attempt < policy_.max_attempts; ++attempt) {
      if (attempt > 0) {
        Millis d;
        {
          std::lock_guard lk(rng_mu_);
          d = policy_.delay(attempt - 1, rng_);
        }
        log::debug(endpoint_.model_id + ": retry " + std::to_string(attempt) + " after " +
                   std::to_string(d.count()) + " ms (" + last_error + ")");
        sleeper_(d);
      }
      limiter_.acquire();
      httplib::Result res{nullptr, httplib::Error::Unknown};
      const auto start = std::chrono::steady_clock::now();
      {
        SemaphoreGuard slot(in_flight_);
        ++attempts_;
        httplib::Client cli(url_.origin());
        detail::configure(cli, endpoint_.timeout_s);
        if (credential) cli.set_bearer_token_auth(*credential);
        res = cli.Post(path, body, "application/json");
      }
      const auto elapsed =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (!res) {
        last_status = 0;
        last_error = "connection error: " + httplib::to_string(res.error());
        continue;
      }
      last_status = res->status;
      if (detail::retryable_status(res->status)) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status > 299)
        throw TransportError(endpoint_.model_id + ": HTTP " + std::to_string(res->status), res->status);
      auto out = detail::parse_completion(res->body);
      out.latency_ms = elapsed;
      out.retries = attempt;
      return out;
    }
    throw TransportError(endpoint_.model_id + ": gave up after " +
                             std::to_string(policy_.max_attempts) + " attempts (" + last_error + ")",
                         last_status);
  }

 private:
  ModelEndpoint endpoint_;
  Url url_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
  Semaphore in_flight_;
  RateLimiter limiter_;
  std::atomic<long> attempts_{0};
};

}  // namespace tcmbench::modelclient
