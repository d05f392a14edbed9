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

#include "musicduel/simulate.hpp"

#include <cmath>
#include <random>

namespace musicduel::sim {

std::vector<std::string> default_prompts() {
  return {
      "lofi hip hop beat for studying, instrumental",
      "upbeat synthwave track with driving bass, no vocals",
      "gentle solo piano piece, 30 seconds",
      "ambient drone with field recordings, instrumental only",
      "celtic punk song with prominent vocals about a long road home",
      "jazz trio with brushed drums and walking bass, instrumental",
      "acoustic folk ballad with female vocals about the sea",
      "orchestral film cue building to a big brass climax, 20 seconds",
      "minimal techno loop at 128 bpm, no vocals",
      "bossa nova guitar and soft percussion, instrumental",
  };
}

SimulationReport run(orchestrator::Gateway& gateway, SteppableClock& clock, const SimulationOptions& options) {
  SimulationReport report;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto prompts = options.prompts.empty() ? default_prompts() : options.prompts;
  const std::string ip_base = "198.51.100.";

  for (int i = 0; i < options.battles; ++i) {
    privacy::RawIdentity who{ip_base + std::to_string(1 + i % 200), "sim-browser-" + std::to_string(i % 37)};
    SessionInfo session = gateway.create_session(gateway.consent_digest(), "sim");
    const std::string& prompt = prompts[static_cast<std::size_t>(i) % prompts.size()];
    orchestrator::BlindBattle battle;
    try {
      battle = gateway.create_battle(session.uuid, prompt, who);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kModerationRejected) ++report.rejected;
      else ++report.failed;
      clock.advance(options.seconds_between_battles);
      continue;
    }

    const EpochSeconds start = clock.now();
    for (Side side : {Side::kA, Side::kB}) {
      std::vector<ListenEvent> events = {{ListenKind::kPlay, start},
                                         {ListenKind::kPause, start + options.listen_seconds}};
      gateway.submit_listen_events(battle.battle_uuid, side, events);
    }
    clock.advance(options.listen_seconds + 0.5);

    BattleRecord r = gateway.record(battle.battle_uuid);
    auto strength = [&](const SystemKey& k) {
      auto it = options.strengths.find(k);
      return it == options.strengths.end() ? 0.0 : it->second;
    };
    double u = unit(rng);
    Preference pref;
    if (u < options.both_bad_probability) {
      pref = Preference::kBothBad;
    } else if (u < options.both_bad_probability + options.tie_probability) {
      pref = Preference::kTie;
    } else {
      double d = strength(r.a_metadata->system_key) - strength(r.b_metadata->system_key);
      pref = unit(rng) < 1.0 / (1.0 + std::exp(-d)) ? Preference::kA : Preference::kB;
    }
    gateway.submit_vote(battle.battle_uuid, pref, who, session.uuid);
    clock.advance(2.0);
    if (unit(rng) < options.feedback_probability) {
      gateway.submit_feedback(battle.battle_uuid, "simulated feedback", std::nullopt, std::nullopt);
    } else {
      gateway.finalize(battle.battle_uuid);
    }
    ++report.completed;
    report.battle_uuids.push_back(battle.battle_uuid);
    clock.advance(options.seconds_between_battles);
  }
  return report;
}

}  // namespace musicduel::sim
