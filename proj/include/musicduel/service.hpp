// Copyright 2026 The musicduel Authors
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

// Public HTTP API of the gateway. JSON in, JSON out; every battle-scoped
// response carries "battle_uuid".
//
//   GET  /consent                       {"text", "digest"}
//   POST /session                       {"ack_tos", "frontend_version"?} -> session
//   POST /battle                        {"session", "prompt"} -> blind payload
//   GET  /audio/<battle>/<A|B>          audio/wav
//   POST /battle/<uuid>/listen          {"side", "events": [["PLAY", t], ...]}
//   GET  /battle/<uuid>/gate            listened / remaining seconds per side
//   POST /battle/<uuid>/vote            {"session", "preference"} -> reveal
//   POST /battle/<uuid>/feedback        {"feedback"?, "a_feedback"?, "b_feedback"?}
//   GET  /leaderboard?sort=&filter=     leaderboard table
//
// Errors: {"error": <code>, "message", "retryable", "details"?, "battle_uuid"?}.
// The client address and an optional X-Fingerprint header are pseudonymized
// before anything else sees them.

#include <memory>
#include <string>
#include <thread>

#include "musicduel/orchestrator.hpp"

namespace httplib {
class Server;
}

namespace musicduel::service {

struct ServiceOptions {
  int leaderboard_resamples = 200;
  std::uint64_t leaderboard_seed = 1;
};

int http_status(ErrorCode code);

class Service {
 public:
  explicit Service(std::shared_ptr<orchestrator::Gateway> gateway, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds (port 0 = ephemeral), serves on a background thread, returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  std::shared_ptr<orchestrator::Gateway> gateway_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace musicduel::service
