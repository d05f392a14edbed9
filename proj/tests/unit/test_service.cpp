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

#include <doctest.h>
#include <httplib.h>

#include "harness.hpp"
#include "musicduel/service.hpp"

using namespace musicduel;
using testsupport::instrumental_system;

namespace {

struct Served {
  ManualClock clock{1772409600.0};
  std::shared_ptr<orchestrator::Gateway> gateway;
  std::unique_ptr<service::Service> svc;
  std::unique_ptr<httplib::Client> client;
  httplib::Headers headers = {{"X-Fingerprint", "service-test-browser"}};

  Served() {
    std::vector<std::shared_ptr<endpoint::Endpoint>> eps = {
        endpoint::make_tone_endpoint(instrumental_system("alpha"), 5.0, 0, &clock),
        endpoint::make_tone_endpoint(instrumental_system("beta"), 5.0, 0, &clock)};
    orchestrator::GatewayConfig cfg;
    cfg.seed = 5;
    gateway = std::make_shared<orchestrator::Gateway>(
        cfg, std::make_shared<gate::RuleAnalyzer>(gate::RuleConfig::builtin()), eps,
        privacy::SaltConfig("service-salt-0123456789", "s1"), nullptr, &clock);
    service::ServiceOptions opts;
    opts.leaderboard_resamples = 100;
    svc = std::make_unique<service::Service>(gateway, opts);
    int port = svc->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  std::pair<int, json> post(const std::string& path, const json& body) {
    auto res = client->Post(path, headers, body.dump(), "application/json");
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> get(const std::string& path) {
    auto res = client->Get(path, headers);
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
  }

  std::string session() {
    auto [status, consent] = get("/consent");
    REQUIRE(status == 200);
    auto [s2, body] = post("/session", {{"ack_tos", consent["digest"]}});
    REQUIRE(s2 == 200);
    return body["session"];
  }

  void listen(const std::string& uuid, double seconds) {
    const double t0 = clock.now();
    for (const char* side : {"A", "B"}) {
      auto [status, body] = post("/battle/" + uuid + "/listen",
                                 {{"side", side}, {"events", json::array({json::array({"PLAY", t0}),
                                                                          json::array({"PAUSE", t0 + seconds})})}});
      REQUIRE(status == 200);
      CHECK(body["stored"] == 2);
    }
    clock.set(t0 + seconds + 0.5);
  }
};

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("status code mapping") {
    CHECK(service::http_status(ErrorCode::kGateNotMet) == 428);
    CHECK(service::http_status(ErrorCode::kConsentRequired) == 403);
    CHECK(service::http_status(ErrorCode::kRateLimited) == 429);
    CHECK(service::http_status(ErrorCode::kNotFound) == 404);
    CHECK(service::http_status(ErrorCode::kConflict) == 409);
    CHECK(service::http_status(ErrorCode::kModerationRejected) == 422);
    CHECK(service::http_status(ErrorCode::kNoOpponents) == 503);
    CHECK(service::http_status(ErrorCode::kGenerationFailed) == 502);
    CHECK(service::http_status(ErrorCode::kTimeout) == 504);
  }

  TEST_CASE("full battle over HTTP") {
    Served s;
    std::string session = s.session();
    auto [status, blind] = s.post("/battle", {{"session", session}, {"prompt", "ambient drone, no vocals"}});
    REQUIRE(status == 200);
    std::string uuid = blind["battle_uuid"];
    CHECK(blind.size() == 3);

    auto audio = s.client->Get("/" + blind["a_audio_ref"].get<std::string>());
    REQUIRE(audio);
    CHECK(audio->status == 200);
    CHECK(audio->get_header_value("Content-Type") == "audio/wav");
    CHECK(audio->body.rfind("RIFF", 0) == 0);

    auto [early, err] = s.post("/battle/" + uuid + "/vote", {{"session", session}, {"preference", "A"}});
    CHECK(early == 428);
    CHECK(err["error"] == "gate_not_met");
    CHECK(err["retryable"] == false);
    CHECK(err["battle_uuid"] == uuid);
    CHECK(err["details"]["remaining"]["A"] == 4.0);

    s.listen(uuid, 4.5);
    auto [gs, gate] = s.get("/battle/" + uuid + "/gate");
    CHECK(gs == 200);
    CHECK(gate["open"] == true);
    CHECK(gate["a_listened"].get<double>() == doctest::Approx(4.5));

    auto [vs, reveal] = s.post("/battle/" + uuid + "/vote", {{"session", session}, {"preference", "B"}});
    REQUIRE(vs == 200);
    CHECK(reveal["download_ref"] == blind["b_audio_ref"]);
    auto [again, conflict] = s.post("/battle/" + uuid + "/vote", {{"session", session}, {"preference", "B"}});
    CHECK(again == 409);

    auto [fs, fb] = s.post("/battle/" + uuid + "/feedback", {{"feedback", "good"}});
    CHECK(fs == 200);
    BattleRecord r = s.gateway->record(uuid);
    CHECK(r.vote->feedback == std::optional<std::string>("good"));
    REQUIRE(r.vote_user.has_value());
    CHECK_FALSE(r.vote_user->ip.has_value());
    CHECK(r.vote_user->salted_fingerprint.has_value());

    auto [ls, board] = s.get("/leaderboard?sort=votes");
    CHECK(ls == 200);
    CHECK(board["rows"].size() == 2);
    auto [bad, msg] = s.get("/leaderboard?sort=nonsense");
    CHECK(bad == 400);
  }

  TEST_CASE("error responses") {
    Served s;
    auto [c1, e1] = s.post("/session", {{"ack_tos", "wrong"}});
    CHECK(c1 == 403);
    CHECK(e1["error"] == "consent_required");
    std::string session = s.session();

    auto [c2, e2] = s.post("/battle", {{"session", session}, {"prompt", "play me Bohemian Rhapsody by Queen"}});
    CHECK(c2 == 422);
    CHECK(e2["details"]["category"] == "COPYRIGHT");

    auto [c3, e3] = s.post("/battle", {{"session", session}});
    CHECK(c3 == 400);
    CHECK(e3["error"] == "invalid_argument");

    auto res = s.client->Post("/battle", s.headers, "not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    auto [c4, e4] = s.get("/battle/0000aaaa-0000-0000-0000-000000000000/gate");
    CHECK(c4 == 404);
    CHECK(e4["battle_uuid"] == "0000aaaa-0000-0000-0000-000000000000");

    auto [c5, e5] = s.post("/battle", {{"session", session}, {"prompt", "folk song about a cat named Chamomile"}});
    CHECK(c5 == 503);
    CHECK(e5["retryable"] == true);

    auto [ok, blind] = s.post("/battle", {{"session", session}, {"prompt", "ambient drone"}});
    REQUIRE(ok == 200);
    std::string uuid = blind["battle_uuid"];
    auto [c6, e6] = s.post("/battle/" + uuid + "/listen",
                           {{"side", "A"}, {"events", json::array({json::array({"PLAY", 10.0}),
                                                                    json::array({"PAUSE", 5.0})})}});
    CHECK(c6 == 400);
    CHECK(e6["error"] == "ordering");
    auto [c7, e7] = s.post("/battle/" + uuid + "/feedback", {{"feedback", "early"}});
    CHECK(c7 == 409);
  }
}
