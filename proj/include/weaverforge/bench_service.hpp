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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "weaverforge/bench.hpp"

namespace httplib {
class Server;
}

namespace weaverforge::bench {

struct ServiceOptions {
  EloParams elo;
  // Append-only ComparisonRecord log; replayed on start.
  fs::path verdict_log;
  // Static UI assets served under "/".
  std::optional<fs::path> static_dir;
};

enum class SubmitStatus { kAccepted, kUnknownPair, kDuplicate };

/// HTTP API for blind pairwise annotation:
///   GET  /api/health
///   GET  /api/next-pair?annotator=&dimension=   200 | 204 when nothing is left
///   POST /api/verdict                            204 | 400 | 404 | 409
///   GET  /api/leaderboard?dimension=overall
/// Verdict writes are applied one at a time; each recomputes the
/// leaderboards and readers always see a complete snapshot.
class BenchService {
 public:
  BenchService(std::vector<ComparisonPair> pairs, ServiceOptions options);
  ~BenchService();
  BenchService(const BenchService&) = delete;
  BenchService& operator=(const BenchService&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen_after_bind();
  void wait_until_ready() const;
  void stop();

  // First pair the annotator has not judged on the dimension; without an
  // annotator, the first pair nobody has judged on it.
  std::optional<ComparisonPair> next_pair(const std::string& annotator, Dimension dimension) const;
  SubmitStatus submit(const std::string& comparison_id, Verdict verdict, Dimension dimension,
                      const std::string& annotator);
  std::vector<LeaderboardRow> leaderboard(Dimension dimension) const;
  std::vector<ComparisonRecord> records() const;

  static std::string record_id(const std::string& comparison_id, const std::string& annotator, Dimension dimension);

 private:
  using Boards = std::map<Dimension, std::vector<LeaderboardRow>>;

  void install_routes();

  std::vector<ComparisonPair> pairs_;
  std::map<std::string, std::size_t> pair_index_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;

  mutable std::mutex mu_;
  std::vector<ComparisonRecord> records_;
  std::set<std::string> seen_;
  std::set<std::pair<std::string, Dimension>> judged_;
  std::uint64_t next_timestamp_ = 0;
  std::shared_ptr<const Boards> boards_;
};

}  // namespace weaverforge::bench
