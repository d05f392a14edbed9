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

// In-process gateway wired to mock endpoints on a manual clock.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "musicduel/mock_endpoints.hpp"
#include "musicduel/orchestrator.hpp"
#include "musicduel/store.hpp"

namespace testsupport {

inline musicduel::endpoint::SystemDescriptor instrumental_system(const std::string& tag) {
  auto d = musicduel::endpoint::mock_descriptor(tag, "provider-" + tag);
  d.supports_duration = true;
  d.min_duration = 1.0;
  d.max_duration = 60.0;
  return d;
}

struct Harness {
  musicduel::ManualClock clock{1772409600.0};  // 2026-03-02T00:00:00Z
  std::vector<std::shared_ptr<musicduel::endpoint::MockEndpoint>> mocks;
  std::shared_ptr<musicduel::store::Store> store;
  std::unique_ptr<musicduel::orchestrator::Gateway> gateway;
  std::string session;
  musicduel::privacy::RawIdentity who{"192.0.2.44", std::string("harness-browser")};

  using Endpoints = std::vector<std::shared_ptr<musicduel::endpoint::MockEndpoint>>;
  /// Builds the mocks against the harness clock.
  using Factory = std::function<Endpoints(const musicduel::Clock*)>;

  /// Without a factory the systems are two instrumental tone mocks.
  explicit Harness(Factory make = {}, musicduel::orchestrator::GatewayConfig config = {},
                   std::shared_ptr<musicduel::store::Store> store_ = nullptr) {
    using namespace musicduel;
    Endpoints endpoints;
    if (make) {
      endpoints = make(&clock);
    } else {
      endpoints.push_back(endpoint::make_tone_endpoint(instrumental_system("alpha"), 5.0, 0, &clock));
      endpoints.push_back(endpoint::make_tone_endpoint(instrumental_system("beta"), 5.0, 0, &clock));
    }
    mocks = endpoints;
    store = std::move(store_);
    if (config.seed == 0) config.seed = 17;
    std::vector<std::shared_ptr<endpoint::Endpoint>> eps(mocks.begin(), mocks.end());
    gateway = std::make_unique<orchestrator::Gateway>(
        config, std::make_shared<gate::RuleAnalyzer>(gate::RuleConfig::builtin()), eps,
        privacy::SaltConfig("harness-salt-0123456789", "h1"), store, &clock);
    session = gateway->create_session(gateway->consent_digest(), "test-frontend").uuid;
  }

  musicduel::orchestrator::BlindBattle battle(const std::string& prompt = "ambient drone, no vocals") {
    clock.advance(1.0);
    return gateway->create_battle(session, prompt, who);
  }

  /// A battle that has been listened to and voted on.
  std::string voted(musicduel::Preference p = musicduel::Preference::kA,
                    const std::string& prompt = "ambient drone, no vocals") {
    auto b = battle(prompt);
    listen(b.battle_uuid, 5.0, 5.0);
    gateway->submit_vote(b.battle_uuid, p, who, session);
    return b.battle_uuid;
  }

  /// Plays both sides for `seconds` each starting now, then moves the clock past them.
  void listen(const std::string& uuid, double a_seconds, double b_seconds) {
    using namespace musicduel;
    const double t0 = clock.now();
    std::vector<ListenEvent> a = {{ListenKind::kPlay, t0}, {ListenKind::kPause, t0 + a_seconds}};
    std::vector<ListenEvent> b = {{ListenKind::kPlay, t0 + a_seconds},
                                  {ListenKind::kPause, t0 + a_seconds + b_seconds}};
    gateway->submit_listen_events(uuid, Side::kA, a);
    gateway->submit_listen_events(uuid, Side::kB, b);
    clock.set(t0 + a_seconds + b_seconds + 0.5);
  }
};

}  // namespace testsupport
