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

#include "musicduel/gate.hpp"

namespace musicduel::gate {

namespace {

[[noreturn]] void unavailable(const std::string& why) {
  throw Error(ErrorCode::kGateUnavailable, "prompt analysis unavailable: " + why,
              json{{"retry", true}});
}

}  // namespace

GateResult gate(const Prompt& prompt, AnalyzerBackend& backend, double max_duration) {
  GateResult result;
  try {
    result = backend.analyze(prompt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kGateUnavailable) throw;
    unavailable(e.what());
  } catch (const std::exception& e) {
    unavailable(e.what());
  }

  const auto& v = result.verdict;
  if (v.accepted != result.detailed.has_value()) {
    unavailable("backend result has accepted/detailed mismatch");
  }
  if (v.accepted == v.category.has_value()) {
    unavailable("backend result has accepted/category mismatch");
  }
  if (result.detailed) {
    auto& d = *result.detailed;
    if (d.overall_prompt.empty()) d.overall_prompt = prompt.text;
    if (d.duration && !(*d.duration > 0.0 && *d.duration <= max_duration)) d.duration.reset();
    if (d.instrumental && d.lyrics) unavailable("backend returned lyrics for an instrumental prompt");
  }
  return result;
}

std::string provision_lyrics(const Prompt& prompt, const DetailedPrompt& detailed,
                             AnalyzerBackend& backend) {
  if (detailed.instrumental) {
    throw Error(ErrorCode::kInvalidArgument, "provision_lyrics: prompt is instrumental");
  }
  if (detailed.lyrics && !detailed.lyrics->empty()) return *detailed.lyrics;
  std::string lyrics;
  try {
    lyrics = backend.write_lyrics(prompt, detailed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kGateUnavailable) throw;
    unavailable(e.what());
  } catch (const std::exception& e) {
    unavailable(e.what());
  }
  if (trim(lyrics).empty()) unavailable("backend returned empty lyrics");
  return lyrics;
}

}  // namespace musicduel::gate
