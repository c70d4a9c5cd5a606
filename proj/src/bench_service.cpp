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

#include "weaverforge/bench_service.hpp"

#include <httplib.h>

#include <fstream>

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"

namespace weaverforge::bench {

namespace {

void reply_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, json{{"error", message}}, status);
}

std::optional<Dimension> dimension_param(const httplib::Request& req, httplib::Response& res) {
  const std::string raw = req.has_param("dimension") ? req.get_param_value("dimension") : "overall";
  try {
    return parse_dimension(raw);
  } catch (const Error& e) {
    reply_error(res, 400, e.what());
    return std::nullopt;
  }
}

}  // namespace

BenchService::BenchService(std::vector<ComparisonPair> pairs, ServiceOptions options)
    : pairs_(std::move(pairs)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (!pair_index_.emplace(pairs_[i].comparison_id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate comparison id " + pairs_[i].comparison_id);
    }
  }
  if (!options_.verdict_log.empty() && fs::exists(options_.verdict_log)) {
    records_ = io::read_jsonl<ComparisonRecord>(options_.verdict_log);
    for (const auto& r : records_) {
      seen_.insert(r.id);
      const std::string suffix = "#" + r.annotator + "#" + std::string(to_string(r.dimension));
      if (r.id.size() > suffix.size() && r.id.compare(r.id.size() - suffix.size(), suffix.size(), suffix) == 0) {
        judged_.insert({r.id.substr(0, r.id.size() - suffix.size()), r.dimension});
      }
      next_timestamp_ = std::max(next_timestamp_, r.timestamp + 1);
    }
  }
  boards_ = std::make_shared<const Boards>(elo_rank(records_, options_.elo));
  install_routes();
}

BenchService::~BenchService() { stop(); }

std::string BenchService::record_id(const std::string& comparison_id, const std::string& annotator,
                                    Dimension dimension) {
  return comparison_id + "#" + annotator + "#" + std::string(to_string(dimension));
}

int BenchService::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void BenchService::listen_after_bind() { server_->listen_after_bind(); }

void BenchService::wait_until_ready() const { server_->wait_until_ready(); }

void BenchService::stop() {
  if (server_) server_->stop();
}

std::optional<ComparisonPair> BenchService::next_pair(const std::string& annotator, Dimension dimension) const {
  std::lock_guard lock(mu_);
  for (const auto& p : pairs_) {
    const bool done = annotator.empty() ? judged_.count({p.comparison_id, dimension}) > 0
                                        : seen_.count(record_id(p.comparison_id, annotator, dimension)) > 0;
    if (!done) return p;
  }
  return std::nullopt;
}

SubmitStatus BenchService::submit(const std::string& comparison_id, Verdict verdict, Dimension dimension,
                                  const std::string& annotator) {
  const auto it = pair_index_.find(comparison_id);
  if (it == pair_index_.end()) return SubmitStatus::kUnknownPair;
  const ComparisonPair& p = pairs_[it->second];

  std::lock_guard lock(mu_);
  ComparisonRecord r;
  r.id = record_id(comparison_id, annotator, dimension);
  if (seen_.count(r.id)) return SubmitStatus::kDuplicate;
  r.instruction_id = p.instruction_id;
  r.model_a = p.model_a;
  r.model_b = p.model_b;
  r.verdict = verdict;
  r.dimension = dimension;
  r.annotator = annotator;
  r.timestamp = next_timestamp_;

  if (!options_.verdict_log.empty()) {
    std::ofstream out(options_.verdict_log, std::ios::app | std::ios::binary);
    out << json(r).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot append to " + options_.verdict_log.string());
  }
  ++next_timestamp_;
  seen_.insert(r.id);
  judged_.insert({comparison_id, dimension});
  records_.push_back(std::move(r));
  boards_ = std::make_shared<const Boards>(elo_rank(records_, options_.elo));
  return SubmitStatus::kAccepted;
}

std::vector<LeaderboardRow> BenchService::leaderboard(Dimension dimension) const {
  std::shared_ptr<const Boards> snapshot;
  {
    std::lock_guard lock(mu_);
    snapshot = boards_;
  }
  const auto it = snapshot->find(dimension);
  return it == snapshot->end() ? std::vector<LeaderboardRow>{} : it->second;
}

std::vector<ComparisonRecord> BenchService::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

void BenchService::install_routes() {
  auto& s = *server_;
  s.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    reply_json(res, json{{"status", "ok"}, {"pairs", pairs_.size()}, {"verdicts", records().size()}});
  });

  s.Get("/api/next-pair", [this](const httplib::Request& req, httplib::Response& res) {
    const auto dim = dimension_param(req, res);
    if (!dim) return;
    const std::string annotator = req.has_param("annotator") ? req.get_param_value("annotator") : "";
    const auto p = next_pair(annotator, *dim);
    if (!p) {
      res.status = 204;
      return;
    }
    reply_json(res, json{{"comparison_id", p->comparison_id},
                         {"instruction", p->instruction},
                         {"response_a", p->response_a},
                         {"response_b", p->response_b},
                         {"dimension", to_string(*dim)}});
  });

  s.Post("/api/verdict", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      reply_error(res, 400, "body is not JSON");
      return;
    }
    if (!body.is_object()) {
      reply_error(res, 400, "body must be a JSON object");
      return;
    }
    const auto field = [&](const char* key) -> std::optional<std::string> {
      if (!body.contains(key) || !body[key].is_string() || body[key].get_ref<const std::string&>().empty()) {
        return std::nullopt;
      }
      return body[key].get<std::string>();
    };
    const auto id = field("comparison_id");
    const auto verdict = field("verdict");
    const auto dimension = field("dimension");
    const auto annotator = field("annotator");
    if (!id || !verdict || !dimension || !annotator) {
      reply_error(res, 400, "comparison_id, verdict, dimension and annotator are required strings");
      return;
    }
    Verdict v;
    Dimension d;
    try {
      v = parse_verdict(*verdict);
      d = parse_dimension(*dimension);
    } catch (const Error& e) {
      reply_error(res, 400, e.what());
      return;
    }
    switch (submit(*id, v, d, *annotator)) {
      case SubmitStatus::kAccepted: res.status = 204; break;
      case SubmitStatus::kUnknownPair: reply_error(res, 404, "unknown comparison_id " + *id); break;
      case SubmitStatus::kDuplicate:
        reply_error(res, 409, "verdict already recorded for this annotator and dimension");
        break;
    }
  });

  s.Get("/api/leaderboard", [this](const httplib::Request& req, httplib::Response& res) {
    const auto dim = dimension_param(req, res);
    if (!dim) return;
    reply_json(res, json(leaderboard(*dim)));
  });

  if (options_.static_dir) {
    if (!s.set_mount_point("/", options_.static_dir->string())) {
      throw Error(ErrorCode::kIo, "static directory " + options_.static_dir->string() + " does not exist");
    }
  }
}

}  // namespace weaverforge::bench
