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

#include "musicduel/service.hpp"

#include <httplib.h>

#include "musicduel/leaderboard.hpp"

namespace musicduel::service {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOrdering: return 400;
    case ErrorCode::kConsentRequired: return 403;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kIllegalTransition:
    case ErrorCode::kPeriodOpen: return 409;
    case ErrorCode::kModerationRejected:
    case ErrorCode::kCapabilityMismatch: return 422;
    case ErrorCode::kGateNotMet: return 428;
    case ErrorCode::kRateLimited: return 429;
    case ErrorCode::kStorage:
    case ErrorCode::kConfiguration: return 500;
    case ErrorCode::kGenerationFailed: return 502;
    case ErrorCode::kNoOpponents:
    case ErrorCode::kGateUnavailable:
    case ErrorCode::kUnavailable: return 503;
    case ErrorCode::kTimeout: return 504;
  }
  return 500;
}

namespace {

void reply(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, const Error& e, const std::string& battle_uuid) {
  json body{{"error", to_string(e.code())}, {"message", e.what()}, {"retryable", e.retryable()}};
  if (!e.details().is_null()) body["details"] = e.details();
  if (!battle_uuid.empty()) body["battle_uuid"] = battle_uuid;
  else if (e.details().is_object() && e.details().contains("battle_uuid")) {
    body["battle_uuid"] = e.details()["battle_uuid"];
  }
  reply(res, body, http_status(e.code()));
}

privacy::RawIdentity identity_of(const httplib::Request& req) {
  privacy::RawIdentity who;
  who.ip = req.remote_addr.empty() ? "unknown" : req.remote_addr;
  if (req.has_header("X-Fingerprint")) {
    std::string fp = req.get_header_value("X-Fingerprint");
    if (!fp.empty()) who.fingerprint = fp;
  }
  return who;
}

json parse_body(const httplib::Request& req) {
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
    return body;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& body, const char* name) {
  if (!body.contains(name)) throw Error(ErrorCode::kInvalidArgument, std::string("missing field '") + name + "'");
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + name + "' has the wrong type");
  }
}

std::optional<std::string> optional_text(const json& body, const char* name) {
  if (!body.contains(name) || body[name].is_null()) return std::nullopt;
  return field<std::string>(body, name);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    std::string battle = req.matches.size() > 1 ? std::string(req.matches[1]) : std::string();
    try {
      fn(req, res, battle);
    } catch (const Error& e) {
      reply_error(res, e, battle);
    } catch (const std::exception& e) {
      reply_error(res, Error(ErrorCode::kInvalidArgument, e.what()), battle);
    }
  };
}

json session_json(const SessionInfo& s) {
  return json{{"session", s.uuid}, {"create_time", s.create_time}, {"ack_tos", s.ack_tos}};
}

}  // namespace

Service::Service(std::shared_ptr<orchestrator::Gateway> gateway, ServiceOptions options)
    : gateway_(std::move(gateway)), options_(options), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Service::~Service() { stop(); }

void Service::install_routes() {
  auto& gw = *gateway_;
  server_->Get("/consent", guarded([&gw](const auto&, auto& res, const auto&) {
    reply(res, json{{"text", gw.consent_text()}, {"digest", gw.consent_digest()}});
  }));

  server_->Post("/session", guarded([&gw](const auto& req, auto& res, const auto&) {
    json body = parse_body(req);
    std::string frontend = body.contains("frontend_version") ? field<std::string>(body, "frontend_version") : "";
    reply(res, session_json(gw.create_session(field<std::string>(body, "ack_tos"), frontend)));
  }));

  server_->Post("/battle", guarded([&gw](const auto& req, auto& res, const auto&) {
    json body = parse_body(req);
    auto blind = gw.create_battle(field<std::string>(body, "session"), field<std::string>(body, "prompt"),
                                  identity_of(req));
    reply(res, json(blind));
  }));

  server_->Get(R"(/audio/([0-9a-f-]+)/(A|B))", guarded([&gw](const auto& req, auto& res, const auto& battle) {
    auto bytes = gw.fetch_audio(battle, side_from_string(std::string(req.matches[2])));
    res.set_content(std::string(bytes.begin(), bytes.end()), "audio/wav");
  }));

  server_->Post(R"(/battle/([0-9a-f-]+)/listen)", guarded([&gw](const auto& req, auto& res, const auto& battle) {
    json body = parse_body(req);
    Side side = side_from_string(field<std::string>(body, "side"));
    auto events = field<std::vector<ListenEvent>>(body, "events");
    std::size_t stored = gw.submit_listen_events(battle, side, events);
    reply(res, json{{"battle_uuid", battle}, {"stored", stored}});
  }));

  server_->Get(R"(/battle/([0-9a-f-]+)/gate)", guarded([&gw](const auto&, auto& res, const auto& battle) {
    json body = gw.gate_status(battle, gw.clock().now());
    body["battle_uuid"] = battle;
    reply(res, body);
  }));

  server_->Post(R"(/battle/([0-9a-f-]+)/vote)", guarded([&gw](const auto& req, auto& res, const auto& battle) {
    json body = parse_body(req);
    auto reveal = gw.submit_vote(battle, preference_from_string(field<std::string>(body, "preference")),
                                 identity_of(req), field<std::string>(body, "session"));
    reply(res, json(reveal));
  }));

  server_->Post(R"(/battle/([0-9a-f-]+)/feedback)", guarded([&gw](const auto& req, auto& res, const auto& battle) {
    json body = parse_body(req);
    gw.submit_feedback(battle, optional_text(body, "feedback"), optional_text(body, "a_feedback"),
                       optional_text(body, "b_feedback"));
    reply(res, json{{"battle_uuid", battle}, {"stored", true}});
  }));

  server_->Get("/leaderboard", guarded([this, &gw](const auto& req, auto& res, const auto&) {
    std::vector<leaderboard::Filter> filters;
    for (std::size_t i = 0; i < req.get_param_value_count("filter"); ++i) {
      filters.push_back(leaderboard::parse_filter(req.get_param_value("filter", i)));
    }
    std::string sort = req.has_param("sort") ? req.get_param_value("sort") : "arena_score";
    leaderboard::LeaderboardConfig cfg;
    cfg.n_resamples = options_.leaderboard_resamples;
    cfg.bootstrap.seed = options_.leaderboard_seed;
    auto records = gw.finalized_records();
    auto registry = gw.registry();
    auto view = leaderboard::emit_leaderboard(leaderboard::compute_leaderboard(records, registry, cfg), sort, filters);
    reply(res, json{{"rows", leaderboard::to_json_table(view.table)}});
  }));
}

int Service::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw Error(ErrorCode::kUnavailable, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace musicduel::service
