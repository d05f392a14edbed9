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

// Endpoint wire protocol over HTTP:
//   GET  /capabilities -> SystemDescriptor
//   GET  /health       -> {"healthy": bool, "reason": string}
//   POST /generate     GenerateRequest -> {"metadata": ..., "audio_b64": ...}
// Errors carry {"error": <code>, "message": ...}; 422 = capability
// mismatch, 503 = retryable generation failure, 504 = timeout.

#include <memory>
#include <string>
#include <thread>

#include "musicduel/endpoint.hpp"

namespace httplib {
class Server;
}

namespace musicduel::endpoint {

json response_to_json(const GenerateResponse& response);
GenerateResponse response_from_json(const json& j);

/// Client side of the wire protocol.
class RemoteEndpoint final : public Endpoint {
 public:
  /// Fetches capabilities from the endpoint. Throws kUnavailable if unreachable.
  explicit RemoteEndpoint(std::string base_url, Seconds connect_timeout = Seconds(5.0));
  RemoteEndpoint(std::string base_url, SystemDescriptor descriptor);

  const SystemDescriptor& capabilities() const override { return descriptor_; }
  HealthStatus health(Seconds budget) override;
  GenerateResponse generate(const GenerateRequest& request) override;

 private:
  std::string base_url_;
  SystemDescriptor descriptor_;
};

/// Serves any Endpoint over HTTP on a background thread.
class EndpointServer {
 public:
  explicit EndpointServer(std::shared_ptr<Endpoint> endpoint);
  ~EndpointServer();
  EndpointServer(const EndpointServer&) = delete;
  EndpointServer& operator=(const EndpointServer&) = delete;

  /// Binds (port 0 = ephemeral) and starts serving; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  std::shared_ptr<Endpoint> endpoint_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace musicduel::endpoint
