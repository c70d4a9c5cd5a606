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

#include "weaverforge/llm.hpp"

#include <cmath>
#include <thread>

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::llm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view s) {
  if (s == "system") return Role::kSystem;
  if (s == "user") return Role::kUser;
  if (s == "assistant") return Role::kAssistant;
  throw Error(ErrorCode::kInvalidRequest, "unknown role '" + std::string(s) + "'");
}

void validate(const ChatRequest& req) {
  if (req.messages.empty()) throw Error(ErrorCode::kInvalidRequest, "request has no messages");
  if (req.messages.back().role != Role::kUser) {
    throw Error(ErrorCode::kInvalidRequest, "last message must come from the user");
  }
  if (!std::isfinite(req.temperature) || req.temperature < 0.0) {
    throw Error(ErrorCode::kInvalidRequest, "temperature must be a finite value >= 0");
  }
  if (req.max_tokens == 0) throw Error(ErrorCode::kInvalidRequest, "max_tokens must be positive");
}

std::uint64_t estimate_tokens(std::string_view s) { return (text::char_count(s) + 3) / 4; }

std::string cache_key(const ChatRequest& req, std::string_view backend_name) {
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back({std::string(to_string(m.role)), m.content});
  const json key = {{"template", req.template_id},
                    {"messages", messages},
                    {"model", req.model},
                    {"temperature", req.temperature},
                    {"seed", req.seed ? json(*req.seed) : json(nullptr)},
                    {"backend", backend_name}};
  return text::sha256_hex(key.dump());
}

// ---------------------------------------------------------------------------

class Gateway::Slot {
 public:
  explicit Slot(Gateway& g) : g_(g) {
    std::unique_lock lock(g_.slots_mu_);
    g_.slots_cv_.wait(lock, [&] { return g_.in_flight_ < g_.options_.max_in_flight; });
    ++g_.in_flight_;
    std::size_t peak = g_.peak_in_flight_.load();
    while (g_.in_flight_ > peak && !g_.peak_in_flight_.compare_exchange_weak(peak, g_.in_flight_)) {
    }
  }
  ~Slot() {
    {
      std::lock_guard lock(g_.slots_mu_);
      --g_.in_flight_;
    }
    g_.slots_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  Gateway& g_;
};

Gateway::Gateway(std::shared_ptr<const Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw Error(ErrorCode::kInvalidArgument, "gateway needs a backend");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (options_.cache_enabled && options_.cache_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cache enabled without cache.dir");
  }
}

Usage Gateway::usage() const {
  std::lock_guard lock(usage_mu_);
  return usage_;
}

std::shared_ptr<std::mutex> Gateway::key_lock(const std::string& key) {
  std::lock_guard lock(keys_mu_);
  auto& weak = key_locks_[key];
  auto strong = weak.lock();
  if (!strong) {
    strong = std::make_shared<std::mutex>();
    weak = strong;
  }
  if (key_locks_.size() > 4096) {
    std::erase_if(key_locks_, [](const auto& kv) { return kv.second.expired(); });
  }
  return strong;
}

std::optional<ChatResponse> Gateway::cache_read(const std::string& key) const {
  const fs::path path = options_.cache_dir / key.substr(0, 2) / (key + ".json");
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  try {
    const json j = json::parse(io::read_file(path));
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    r.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::uint64_t>();
    r.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::uint64_t>();
    r.backend = j.at("backend").get<std::string>();
    r.cached = true;
    return r;
  } catch (const std::exception&) {
    // A torn or foreign file is treated as a miss and overwritten.
    return std::nullopt;
  }
}

void Gateway::cache_write(const std::string& key, const ChatResponse& resp) const {
  const json j = {{"content", resp.content},
                  {"usage", {{"prompt_tokens", resp.usage.prompt_tokens},
                             {"completion_tokens", resp.usage.completion_tokens}}},
                  {"backend", resp.backend}};
  io::write_file_atomic(options_.cache_dir / key.substr(0, 2) / (key + ".json"), j.dump());
}

void Gateway::wait_for_rate_budget() {
  if (options_.rpm == 0) return;
  std::unique_lock lock(rate_mu_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    while (!recent_.empty() && now - recent_.front() >= options_.rate_window) recent_.pop_front();
    if (recent_.size() < options_.rpm) {
      recent_.push_back(now);
      return;
    }
    const auto wake = recent_.front() + options_.rate_window;
    lock.unlock();
    std::this_thread::sleep_until(wake);
    lock.lock();
  }
}

ChatResponse Gateway::call_with_retries(const ChatRequest& req) {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = options_.base_backoff * (1LL << std::min(attempt - 1, 20));
      if (delay > options_.max_backoff) delay = options_.max_backoff;
      std::this_thread::sleep_for(delay);
    }
    wait_for_rate_budget();
    try {
      Slot slot(*this);
      ++backend_calls_;
      return backend_->send(req);
    } catch (const TransientError& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::kBackendUnavailable,
              backend_->name() + " failed after " + std::to_string(options_.max_retries + 1) +
                  " attempts: " + last_error);
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  validate(req);
  const std::string name = backend_->name();

  std::string key;
  std::shared_ptr<std::mutex> lock_for_key;
  std::unique_lock<std::mutex> key_guard;
  if (options_.cache_enabled) {
    key = cache_key(req, name);
    // Identical concurrent requests are serialized so that only the first
    // reaches the backend.
    lock_for_key = key_lock(key);
    key_guard = std::unique_lock(*lock_for_key);
    if (auto hit = cache_read(key)) {
      ++cache_hits_;
      return *hit;
    }
  }

  if (options_.token_budget) {
    std::lock_guard lock(usage_mu_);
    if (usage_.total() >= *options_.token_budget) {
      throw Error(ErrorCode::kBudgetExceeded, "token budget of " + std::to_string(*options_.token_budget) +
                                                  " exhausted on " + name);
    }
  }

  ChatResponse resp = call_with_retries(req);
  resp.cached = false;
  if (resp.backend.empty()) resp.backend = name;
  {
    std::lock_guard lock(usage_mu_);
    usage_ += resp.usage;
  }
  if (options_.cache_enabled) cache_write(key, resp);
  return resp;
}

// ---------------------------------------------------------------------------

std::shared_ptr<Gateway> make_gateway(const BackendConfig& config) {
  std::shared_ptr<const Backend> backend;
  if (config.kind == "mock") {
    std::optional<ResponseScript> script;
    if (config.mock_script) {
      script = ResponseScript::load(*config.mock_script);
    }
    backend = mock_backend(config.mock_seed, std::move(script));
  } else if (config.kind == "openai_compatible") {
    RemoteConfig remote;
    if (!config.base_url.empty()) remote.base_url = config.base_url;
    remote.model = config.model;
    remote.api_key_env = config.api_key_env;
    backend = std::make_shared<OpenAICompatibleBackend>(remote);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "backend.kind must be mock or openai_compatible, got '" +
                                               config.kind + "'");
  }
  return std::make_shared<Gateway>(std::move(backend), config.limits);
}

}  // namespace weaverforge::llm
