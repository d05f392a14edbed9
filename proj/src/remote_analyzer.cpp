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

#include <httplib.h>

#include "musicduel/gate.hpp"
#include "musicduel/hashing.hpp"

namespace musicduel::gate {

RemoteAnalyzer::RemoteAnalyzer(RemoteAnalyzerConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::kConfiguration, "remote analyzer: base_url is empty");
  }
  if (config_.instruction_template.empty()) config_.instruction_template = kDefaultInstructionTemplate;
  template_digest_ = hashing::digest128_hex(config_.instruction_template);
}

json RemoteAnalyzer::call(const std::string& path, const json& body) const {
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(config_.base_url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      last_error = std::string("malformed reply: ") + e.what();
    }
  }
  throw Error(ErrorCode::kGateUnavailable, "remote analyzer: " + last_error, json{{"retry", true}});
}

GateResult RemoteAnalyzer::analyze(const Prompt& prompt) {
  json reply = call(config_.analyze_path, json{{"task", "analyze"},
                                               {"template_version", config_.template_version},
                                               {"instructions", config_.instruction_template},
                                               {"prompt", prompt.text}});
  try {
    if (!reply.at("accepted").get<bool>()) {
      return GateResult::reject(category_from_string(reply.at("category").get<std::string>()),
                                reply.value("reason", std::string("rejected by moderator")));
    }
    DetailedPrompt d;
    d.overall_prompt = prompt.text;
    d.instrumental = reply.at("instrumental").get<bool>();
    if (auto it = reply.find("lyrics"); it != reply.end() && !it->is_null()) {
      d.lyrics = it->get<std::string>();
    }
    if (auto it = reply.find("duration"); it != reply.end() && !it->is_null()) {
      d.duration = it->get<double>();
    }
    return GateResult::accept(std::move(d));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kGateUnavailable, std::string("remote analyzer: malformed reply: ") + e.what(),
                json{{"retry", true}});
  }
}

std::string RemoteAnalyzer::write_lyrics(const Prompt& prompt, const DetailedPrompt& detailed) {
  json reply = call(config_.lyrics_path, json{{"task", "lyrics"},
                                              {"template_version", config_.template_version},
                                              {"instructions", config_.instruction_template},
                                              {"prompt", prompt.text},
                                              {"detailed", detailed}});
  try {
    return reply.at("lyrics").get<std::string>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kGateUnavailable, std::string("remote analyzer: malformed reply: ") + e.what(),
                json{{"retry", true}});
  }
}

GateAudit RemoteAnalyzer::audit() const {
  return GateAudit{"remote-llm", config_.template_version, template_digest_};
}

}  // namespace musicduel::gate
