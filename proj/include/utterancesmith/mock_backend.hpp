// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reference backend speaking the paraphrase/embed wire protocol.
// Canned answers per sentence; otherwise the rule paraphraser.

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "utterancesmith/generation.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

struct MockBackendOptions {
  std::map<std::string, std::vector<ScoredText>> canned;
  std::uint64_t seed_rng = 7;
  int fail_status = 0;  // non-zero: answer every request with this status
  int delay_ms = 0;
};

class MockBackend {
 public:
  explicit MockBackend(MockBackendOptions options = {}) : options_(std::move(options)) {
    server_.Post("/paraphrase", [this](const httplib::Request& req, httplib::Response& res) {
      ++paraphrase_calls_;
      if (hold(res)) return;
      try {
        const auto r = paraphrase_request_from_json(Json::parse(req.body));
        std::uint64_t rng = options_.seed_rng;
        if (auto it = r.params.find("seed_rng"); it != r.params.end() && it->is_number_integer()) {
          rng = it->get<std::uint64_t>();
        }
        std::vector<ScoredText> out;
        if (auto it = options_.canned.find(r.sentence); it != options_.canned.end()) {
          out = it->second;
          if (static_cast<int>(out.size()) > r.num_return) out.resize(static_cast<std::size_t>(std::max(r.num_return, 0)));
        } else if (r.num_return > 0) {
          for (auto& t : paraphrase_rule_based(r.sentence, SynonymLexicon::builtin(), r.num_return, rng)) {
            out.push_back({std::move(t), std::nullopt});
          }
        }
        res.set_content(paraphrase_response_json(out).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(Json{{"error", "BadRequest"}, {"detail", e.what()}}.dump(), "application/json");
      }
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_calls_;
      if (hold(res)) return;
      try {
        const auto j = Json::parse(req.body);
        Json vectors = Json::array();
        for (const auto& t : j.at("texts")) vectors.push_back(embed(t.get<std::string>()).values);
        res.set_content(Json{{"vectors", std::move(vectors)}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(Json{{"error", "BadRequest"}, {"detail", e.what()}}.dump(), "application/json");
      }
    });
  }

  ~MockBackend() { stop(); }
  MockBackend(const MockBackend&) = delete;
  MockBackend& operator=(const MockBackend&) = delete;

  /// Binds (0 = ephemeral) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    port_ = port == 0 ? server_.bind_to_any_port(host)
                      : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ < 0) return port_;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  /// Blocking variant for the CLI.
  bool serve(const std::string& host, int port) { return server_.listen(host, port); }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int port() const { return port_; }
  std::size_t paraphrase_calls() const { return paraphrase_calls_; }
  std::size_t embed_calls() const { return embed_calls_; }

 private:
  bool hold(httplib::Response& res) const {
    if (options_.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options_.delay_ms));
    if (options_.fail_status == 0) return false;
    res.status = options_.fail_status;
    res.set_content(R"({"error":"injected"})", "application/json");
    return true;
  }

  MockBackendOptions options_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
  std::atomic<std::size_t> paraphrase_calls_{0};
  std::atomic<std::size_t> embed_calls_{0};
};

}  // namespace utterancesmith
