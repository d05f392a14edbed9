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

// Scripted voters driving a Gateway in-process, for demos and load tests.
// Time advances on a SteppableClock, so the listening gate is met without
// waiting in real time.

#include <map>
#include <string>
#include <vector>

#include "musicduel/orchestrator.hpp"

namespace musicduel::sim {

struct SimulationOptions {
  int battles = 50;
  std::uint64_t seed = 1;
  std::vector<std::string> prompts;  // empty = default_prompts()
  double listen_seconds = 5.0;
  double seconds_between_battles = 30.0;
  /// Hidden voter preference: P(i preferred over j) follows Bradley-Terry
  /// on these strengths (missing systems get 0).
  std::map<SystemKey, double> strengths;
  double tie_probability = 0.1;
  double both_bad_probability = 0.05;
  double feedback_probability = 0.5;
};

struct SimulationReport {
  int completed = 0;
  int failed = 0;
  int rejected = 0;
  std::vector<std::string> battle_uuids;
};

std::vector<std::string> default_prompts();

SimulationReport run(orchestrator::Gateway& gateway, SteppableClock& clock, const SimulationOptions& options);

}  // namespace musicduel::sim
