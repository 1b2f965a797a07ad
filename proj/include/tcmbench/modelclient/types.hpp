#pragma once

#include <cstdlib>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/hash.hpp"

namespace tcmbench::modelclient {

enum class Role { System, User, Assistant };

constexpr std::string_view to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "?";
}

inline Role parse_role(std::string_view s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  throw ValidationError("unknown message role: " + std::string(s));
}

struct Message {
  Role role = Role::User;
  std::string content;
  friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 4096;

  void validate() const {
    bool has_user = false;
    for (const auto& m : messages) has_user |= m.role == Role::User;
    if (!has_user) throw ValidationError("chat request needs at least one user message");
    if (!(temperature >= 0.0)) throw ValidationError("temperature must be non-negative");
    if (max_tokens <= 0) throw ValidationError("max_tokens must be positive");
  }

  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct ChatResponse {
  std::string text;
  std::string finish_reason;
  double latency_ms = 0.0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  bool retrieved_from_cache = false;
  int retries = 0;  // failed attempts before the one that succeeded
};

enum class EndpointKind { LocalHttp, RemoteApi };

constexpr std::string_view to_string(EndpointKind k) {
  return k == EndpointKind::LocalHttp ? "local-http" : "remote-api";
}

inline EndpointKind parse_endpoint_kind(std::string_view s) {
  if (s == "local-http") return EndpointKind::LocalHttp;
  if (s == "remote-api") return EndpointKind::RemoteApi;
  throw ConfigError("unknown endpoint kind: " + std::string(s));
}

/// "http(s)://host[:port][/prefix]" split into parts.
struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path_prefix;  // no trailing slash

  std::string origin() const { return scheme + "://" + host + ":" + std::to_string(port); }
};

inline Url parse_url(const std::string& s) {
  static const std::regex re(R"(^(https?)://(\[[0-9A-Fa-f:.]+\]|[A-Za-z0-9._-]+)(?::(\d{1,5}))?(/[^?#\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ConfigError("malformed base URL: " + s);
  Url u;
  u.scheme = m[1];
  u.host = m[2];
  u.port = m[3].matched ? std::stoi(m[3]) : (u.scheme == "https" ? 443 : 80);
  if (u.port <= 0 || u.port > 65535) throw ConfigError("bad port in URL: " + s);
  u.path_prefix = m[4].matched ? std::string(m[4]) : std::string();
  while (!u.path_prefix.empty() && u.path_prefix.back() == '/') u.path_prefix.pop_back();
  return u;
}

struct ModelEndpoint {
  std::string model_id;        // name used in reports
  std::string api_model;       // name sent on the wire; defaults to model_id
  EndpointKind kind = EndpointKind::LocalHttp;
  std::string base_url;
  std::string path = "/chat/completions";
  std::string credential_env;  // name of the environment variable, never the value
  int max_concurrency = 4;
  int requests_per_minute = 0;  // 0 = unlimited
  double timeout_s = 120.0;

  void validate() const {
    if (model_id.empty()) throw ConfigError("endpoint needs a model_id");
    parse_url(base_url);
    if (max_concurrency < 1) throw ConfigError("endpoint '" + model_id + "': max_concurrency must be >= 1");
    if (requests_per_minute < 0) throw ConfigError("endpoint '" + model_id + "': rpm must be >= 0");
    if (kind == EndpointKind::RemoteApi && credential_env.empty())
      throw ConfigError("endpoint '" + model_id + "': remote-api needs credential_env");
  }

  const std::string& wire_model() const { return api_model.empty() ? model_id : api_model; }

  /// The credential value, or nullopt when none is configured.
  std::optional<std::string> credential() const {
    if (credential_env.empty()) return std::nullopt;
    const char* v = std::getenv(credential_env.c_str());
    if (v == nullptr || *v == '\0')
      throw ConfigError("endpoint '" + model_id + "': environment variable " + credential_env +
                        " is not set");
    return std::string(v);
  }
};

inline ModelEndpoint endpoint_from_json(const nlohmann::json& j) {
  ModelEndpoint e;
  e.model_id = j.at("model_id").get<std::string>();
  e.api_model = j.value("api_model", std::string());
  e.kind = parse_endpoint_kind(j.value("kind", std::string("local-http")));
  e.base_url = j.at("base_url").get<std::string>();
  e.path = j.value("path", e.path);
  e.credential_env = j.value("credential_env", std::string());
  e.max_concurrency = j.value("max_concurrency", e.max_concurrency);
  e.requests_per_minute = j.value("rpm", e.requests_per_minute);
  e.timeout_s = j.value("timeout_s", e.timeout_s);
  e.validate();
  return e;
}

inline nlohmann::ordered_json messages_json(const std::vector<Message>& messages) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& m : messages)
    arr.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  return arr;
}

/// The chat-completion request body.
inline nlohmann::ordered_json request_body(const std::string& model, const ChatRequest& r) {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["messages"] = messages_json(r.messages);
  j["temperature"] = r.temperature;
  j["max_tokens"] = r.max_tokens;
  return j;
}

/// Content address of a request: sha256 of its canonical body.
inline std::string cache_key(const std::string& model_id, const ChatRequest& r) {
  return hash::sha256_hex(request_body(model_id, r).dump());
}

}  // namespace tcmbench::modelclient
