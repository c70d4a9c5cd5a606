// Copyright 2026 The WeaverForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>

#include <httplib.h>

#include "weaverforge/error.hpp"
#include "weaverforge/llm.hpp"

namespace weaverforge::llm {
namespace {

// Splits "https://host:port/prefix" into ("https://host:port", "/prefix").
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

}  // namespace

OpenAICompatibleBackend::OpenAICompatibleBackend(RemoteConfig config) : config_(std::move(config)) {
  auto [origin, prefix] = split_base_url(config_.base_url);
  scheme_host_port_ = origin;
  const bool has_v1 = prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0;
  path_ = prefix + (has_v1 ? "/chat/completions" : "/v1/chat/completions");
}

std::string OpenAICompatibleBackend::name() const {
  return "openai_compatible:" + config_.base_url + ":" + config_.model;
}

json OpenAICompatibleBackend::request_body(const ChatRequest& req, std::string_view default_model) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  json body = {{"model", req.model.empty() ? std::string(default_model) : req.model},
               {"messages", messages},
               {"temperature", req.temperature},
               {"max_tokens", req.max_tokens}};
  if (req.seed) body["seed"] = *req.seed;
  return body;
}

ChatResponse OpenAICompatibleBackend::parse_response(std::string_view body, std::string backend_name) {
  try {
    const json j = json::parse(body);
    ChatResponse r;
    const auto& content = j.at("choices").at(0).at("message").at("content");
    r.content = content.is_null() ? std::string{} : content.get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::uint64_t{0});
      r.usage.completion_tokens = j["usage"].value("completion_tokens", std::uint64_t{0});
    } else {
      r.usage.completion_tokens = estimate_tokens(r.content);
    }
    r.backend = std::move(backend_name);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable, std::string("malformed completion payload: ") + e.what(),
                std::string(body));
  }
}

ChatResponse OpenAICompatibleBackend::send(const ChatRequest& req) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = request_body(req, config_.model).dump();
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw TransientError("request to " + config_.base_url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransientError("HTTP " + std::to_string(res->status) + " from " + config_.base_url);
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendUnavailable,
                "HTTP " + std::to_string(res->status) + " from " + config_.base_url, res->body);
  }
  return parse_response(res->body, name());
}

}  // namespace weaverforge::llm
