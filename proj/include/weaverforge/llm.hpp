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

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace weaverforge::llm {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view s);

struct Message {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  std::size_t max_tokens = 1024;
  std::optional<std::int64_t> seed;
  // Identifies the prompt template the messages were rendered from. Part of
  // the cache key and the key the mock backend scripts on.
  std::string template_id;
  // Values the template was rendered with. Never sent to a remote backend;
  // the mock backend reads them to produce grounded scripted fills.
  std::map<std::string, std::string> vars;
};

struct Usage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;

  Usage& operator+=(const Usage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  std::uint64_t total() const { return prompt_tokens + completion_tokens; }
  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::string content;
  Usage usage;
  std::string backend;
  bool cached = false;
};

// Throws InvalidRequest: empty messages, last message not from the user,
// negative or non-finite temperature, zero max_tokens.
void validate(const ChatRequest& req);

// Rough token estimate (a quarter of the code point count, rounded up) used
// by backends that do not report usage.
std::uint64_t estimate_tokens(std::string_view text);

// Cache key: hash of (template id, rendered messages, model, temperature,
// seed) plus the backend identity.
std::string cache_key(const ChatRequest& req, std::string_view backend_name);

// Retryable failure (timeouts, HTTP 429/5xx). Anything else a backend throws
// is treated as permanent.
class TransientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Implementations must be safe to call from several threads.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual ChatResponse send(const ChatRequest& req) const = 0;
};

// ---------------------------------------------------------------------------
// Mock backend

struct ScriptEntry {
  std::string template_id;
  // Optional: entry applies only when the rendered messages contain this.
  std::string contains;
  // Fill text. Supports {{var}} plus the filters documented in
  // mock_backend.cpp ({{mutate:var}}, {{randint:a:b}}, {{pick:var}}, ...).
  std::string fill;
};

class ResponseScript {
 public:
  ResponseScript() = default;
  explicit ResponseScript(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {}

  // Fills for every template shipped with the library, so full pipeline runs
  // work offline.
  static ResponseScript pipeline_defaults();
  static ResponseScript load(const fs::path& path);

  ResponseScript& add(ScriptEntry entry);
  // Inserted ahead of existing entries, so it wins over them.
  ResponseScript& prepend(ScriptEntry entry);
  const ScriptEntry* match(const ChatRequest& req) const;
  bool empty() const { return entries_.empty(); }
  std::string fingerprint() const;

 private:
  std::vector<ScriptEntry> entries_;
};

// Deterministic offline backend. A message starting with "[[mock:echo]]"
// makes it return the rest of that message verbatim. Otherwise the first
// matching script entry is rendered; failing that a pseudo-response derived
// from (seed, request hash) is returned.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed, ResponseScript script = {});

  std::string name() const override;
  ChatResponse send(const ChatRequest& req) const override;

 private:
  std::uint64_t seed_;
  ResponseScript script_;
  std::string name_;
};

// Without a script the mock uses ResponseScript::pipeline_defaults().
std::shared_ptr<Backend> mock_backend(std::uint64_t seed, std::optional<ResponseScript> script = std::nullopt);

inline constexpr std::string_view kEchoDirective = "[[mock:echo]]";

// ---------------------------------------------------------------------------
// OpenAI-compatible remote backend

struct RemoteConfig {
  std::string base_url = "https://api.openai.com";
  std::string model = "gpt-4";
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::seconds timeout{120};
};

class OpenAICompatibleBackend final : public Backend {
 public:
  explicit OpenAICompatibleBackend(RemoteConfig config);

  std::string name() const override;
  ChatResponse send(const ChatRequest& req) const override;

  // Exposed for tests of the wire format.
  static json request_body(const ChatRequest& req, std::string_view default_model);
  static ChatResponse parse_response(std::string_view body, std::string backend_name);

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Gateway

struct GatewayOptions {
  std::size_t max_in_flight = 4;
  // Requests per rate window; 0 disables rate limiting.
  std::size_t rpm = 0;
  std::chrono::milliseconds rate_window{60000};
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{250};
  std::chrono::milliseconds max_backoff{8000};
  // Total prompt+completion tokens this gateway may spend.
  std::optional<std::uint64_t> token_budget;
  bool cache_enabled = false;
  fs::path cache_dir;
};

// The only path from pipeline code to an LLM. Thread-safe; share one
// instance between all callers of a stage.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<const Backend> backend, GatewayOptions options = {});

  ChatResponse complete(const ChatRequest& req);

  std::string backend_name() const { return backend_->name(); }
  const GatewayOptions& options() const { return options_; }

  // Usage of calls that reached the backend (cache hits are free).
  Usage usage() const;
  std::uint64_t backend_calls() const { return backend_calls_; }
  std::uint64_t cache_hits() const { return cache_hits_; }
  std::size_t peak_in_flight() const { return peak_in_flight_; }

 private:
  class Slot;

  ChatResponse call_with_retries(const ChatRequest& req);
  void wait_for_rate_budget();
  std::optional<ChatResponse> cache_read(const std::string& key) const;
  void cache_write(const std::string& key, const ChatResponse& resp) const;
  std::shared_ptr<std::mutex> key_lock(const std::string& key);

  std::shared_ptr<const Backend> backend_;
  GatewayOptions options_;

  mutable std::mutex usage_mu_;
  Usage usage_;
  std::atomic<std::uint64_t> backend_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};

  std::mutex slots_mu_;
  std::condition_variable slots_cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> peak_in_flight_{0};

  std::mutex rate_mu_;
  std::deque<std::chrono::steady_clock::time_point> recent_;

  std::mutex keys_mu_;
  std::unordered_map<std::string, std::weak_ptr<std::mutex>> key_locks_;
};

// ---------------------------------------------------------------------------
// Backend configuration (config keys backend.*, limits.*, cache.*)

struct BackendConfig {
  std::string kind = "mock";  // "mock" | "openai_compatible"
  std::string base_url;
  std::string model = "mock";
  std::string api_key_env = "OPENAI_API_KEY";
  std::uint64_t mock_seed = 0;
  std::optional<fs::path> mock_script;
  GatewayOptions limits;
};

std::shared_ptr<Gateway> make_gateway(const BackendConfig& config);

// ---------------------------------------------------------------------------
// Prompt templates

struct PromptTemplate {
  std::string id;
  std::string system;
  std::string user;
};

// Replaces every {{name}} with vars[name]. Throws TemplateError for a
// placeholder without a value.
std::string substitute(std::string_view text, const std::map<std::string, std::string>& vars);

// Templates are text files "<id>.tmpl" with [system] and [user] sections.
// The files under templates/ are compiled in; a directory can override them.
class TemplateStore {
 public:
  static const TemplateStore& builtin();
  static TemplateStore with_overrides(const fs::path& dir);
  static PromptTemplate parse(std::string id, std::string_view contents);

  const PromptTemplate& get(std::string_view id) const;
  std::vector<std::string> ids() const;

  // Renders a request; `request_id` (defaults to the template id) becomes
  // ChatRequest::template_id.
  ChatRequest render(std::string_view id, const std::map<std::string, std::string>& vars,
                     std::string request_id = {}) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace weaverforge::llm
