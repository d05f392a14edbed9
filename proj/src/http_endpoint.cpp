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

#include "musicduel/http_endpoint.hpp"

#include <httplib.h>

namespace musicduel::endpoint {

namespace {

void set_timeouts(httplib::Client& client, Seconds budget) {
  auto usec = std::chrono::duration_cast<std::chrono::microseconds>(budget).count();
  if (usec <= 0) usec = 1;
  client.set_connection_timeout(usec / 1000000, usec % 1000000);
  client.set_read_timeout(usec / 1000000, usec % 1000000);
  client.set_write_timeout(usec / 1000000, usec % 1000000);
}

[[noreturn]] void throw_transport(const httplib::Result& res, const std::string& what) {
  if (res.error() == httplib::Error::Read || res.error() == httplib::Error::Write) {
    throw Error(ErrorCode::kTimeout, what + ": " + httplib::to_string(res.error()));
  }
  throw Error(ErrorCode::kUnavailable, what + ": " + httplib::to_string(res.error()));
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCapabilityMismatch: return 422;
    case ErrorCode::kTimeout: return 504;
    case ErrorCode::kInvalidArgument: return 400;
    default: return 503;
  }
}

ErrorCode code_for(int status) {
  switch (status) {
    case 422: return ErrorCode::kCapabilityMismatch;
    case 504: return ErrorCode::kTimeout;
    case 400: return ErrorCode::kCapabilityMismatch;
    default: return ErrorCode::kGenerationFailed;
  }
}

}  // namespace

json response_to_json(const GenerateResponse& response) {
  return json{{"metadata", response.metadata}, {"audio_b64", base64_encode(response.audio)}};
}

GenerateResponse response_from_json(const json& j) {
  GenerateResponse r;
  r.metadata = j.at("metadata").get<GenerationMetadata>();
  r.audio = base64_decode(j.at("audio_b64").get<std::string>());
  return r;
}

RemoteEndpoint::RemoteEndpoint(std::string base_url, Seconds connect_timeout)
    : base_url_(std::move(base_url)) {
  httplib::Client client(base_url_);
  set_timeouts(client, connect_timeout);
  auto res = client.Get("/capabilities");
  if (!res) throw_transport(res, base_url_ + "/capabilities");
  if (res->status != 200) {
    throw Error(ErrorCode::kUnavailable, base_url_ + "/capabilities: HTTP " + std::to_string(res->status));
  }
  try {
    descriptor_ = json::parse(res->body).get<SystemDescriptor>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kUnavailable, base_url_ + "/capabilities: " + e.what());
  }
  validate_descriptor(descriptor_);
}

RemoteEndpoint::RemoteEndpoint(std::string base_url, SystemDescriptor descriptor)
    : base_url_(std::move(base_url)), descriptor_(std::move(descriptor)) {
  validate_descriptor(descriptor_);
}

HealthStatus RemoteEndpoint::health(Seconds budget) {
  httplib::Client client(base_url_);
  set_timeouts(client, budget);
  auto res = client.Get("/health?budget=" + format_double(budget.count()));
  if (!res) {
    if (res.error() == httplib::Error::Connection) return HealthStatus::unhealthy("connection refused");
    if (res.error() == httplib::Error::Read) return HealthStatus::unhealthy("timeout");
    return HealthStatus::unhealthy(httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    std::string reason = "HTTP " + std::to_string(res->status);
    try {
      reason = json::parse(res->body).value("reason", reason);
    } catch (const json::exception&) {
    }
    return HealthStatus::unhealthy(reason);
  }
  return HealthStatus::ok();
}

GenerateResponse RemoteEndpoint::generate(const GenerateRequest& request) {
  httplib::Client client(base_url_);
  set_timeouts(client, request.deadline);
  auto res = client.Post("/generate", json(request).dump(), "application/json");
  if (!res) throw_transport(res, base_url_ + "/generate");
  if (res->status != 200) {
    std::string message = "HTTP " + std::to_string(res->status);
    try {
      message = json::parse(res->body).value("message", message);
    } catch (const json::exception&) {
    }
    throw Error(code_for(res->status), descriptor_.key.str() + ": " + message);
  }
  try {
    return response_from_json(json::parse(res->body));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kGenerationFailed, descriptor_.key.str() + ": malformed response: " + e.what());
  }
}

EndpointServer::EndpointServer(std::shared_ptr<Endpoint> endpoint)
    : endpoint_(std::move(endpoint)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

EndpointServer::~EndpointServer() { stop(); }

void EndpointServer::install_routes() {
  server_->Get("/capabilities", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json(endpoint_->capabilities()).dump(), "application/json");
  });
  server_->Get("/health", [this](const httplib::Request& req, httplib::Response& res) {
    Seconds budget = kDefaultHealthBudget;
    if (req.has_param("budget")) budget = Seconds(std::stod(req.get_param_value("budget")));
    auto status = endpoint_->health(budget);
    res.status = status.healthy ? 200 : 503;
    res.set_content(json{{"healthy", status.healthy}, {"reason", status.reason}}.dump(), "application/json");
  });
  server_->Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      auto request = json::parse(req.body).get<GenerateRequest>();
      auto response = endpoint_->generate(request);
      res.set_content(response_to_json(response).dump(), "application/json");
    } catch (const Error& e) {
      res.status = status_for(e.code());
      res.set_content(json{{"error", to_string(e.code())}, {"message", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", "invalid_argument"}, {"message", e.what()}}.dump(), "application/json");
    }
  });
}

int EndpointServer::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void EndpointServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw Error(ErrorCode::kUnavailable, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void EndpointServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace musicduel::endpoint
