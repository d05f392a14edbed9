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

#include "musicduel/domain.hpp"

namespace musicduel {

std::string_view to_string(ListenKind kind) {
  switch (kind) {
    case ListenKind::kPlay: return "PLAY";
    case ListenKind::kPause: return "PAUSE";
    case ListenKind::kTick: return "TICK";
  }
  return "TICK";
}

std::string_view to_string(Preference preference) {
  switch (preference) {
    case Preference::kA: return "A";
    case Preference::kB: return "B";
    case Preference::kTie: return "TIE";
    case Preference::kBothBad: return "BOTH_BAD";
  }
  return "TIE";
}

std::string_view to_string(Side side) { return side == Side::kA ? "A" : "B"; }

ListenKind listen_kind_from_string(std::string_view s) {
  if (s == "PLAY") return ListenKind::kPlay;
  if (s == "PAUSE") return ListenKind::kPause;
  if (s == "TICK") return ListenKind::kTick;
  throw Error(ErrorCode::kInvalidArgument, "unknown listen event kind '" + std::string(s) + "'");
}

Preference preference_from_string(std::string_view s) {
  if (s == "A") return Preference::kA;
  if (s == "B") return Preference::kB;
  if (s == "TIE") return Preference::kTie;
  if (s == "BOTH_BAD") return Preference::kBothBad;
  throw Error(ErrorCode::kInvalidArgument, "unknown preference '" + std::string(s) + "'");
}

Side side_from_string(std::string_view s) {
  if (s == "A" || s == "a") return Side::kA;
  if (s == "B" || s == "b") return Side::kB;
  throw Error(ErrorCode::kInvalidArgument, "unknown side '" + std::string(s) + "'");
}

Prompt make_prompt(std::string_view text, std::size_t max_length) {
  if (trim(text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "prompt: empty after trimming");
  }
  if (utf8_length(text) > max_length) {
    throw Error(ErrorCode::kInvalidArgument,
                "prompt: longer than " + std::to_string(max_length) + " characters");
  }
  return Prompt{std::string(text)};
}

SystemKey SystemKey::parse(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "system key must be 'tag:variant': " + std::string(s));
  }
  return SystemKey{std::string(s.substr(0, colon)), std::string(s.substr(colon + 1))};
}

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

json timings_json(const std::vector<TimingEntry>& timings) {
  json out = json::array();
  for (const auto& t : timings) out.push_back(json::array({t.label, t.time}));
  return out;
}

json receipts_json(const std::vector<ListenReceipt>& receipts) {
  json out = json::array();
  for (const auto& r : receipts) out.push_back(json::array({r.received, r.count}));
  return out;
}

std::vector<ListenReceipt> receipts_from(const json& j, const char* key) {
  std::vector<ListenReceipt> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  for (const auto& row : *it) {
    out.push_back(ListenReceipt{row.at(0).get<double>(), row.at(1).get<std::int64_t>()});
  }
  return out;
}

}  // namespace

void to_json(json& j, const Prompt& v) { j = json{{"prompt", v.text}}; }

void to_json(json& j, const DetailedPrompt& v) {
  j = json{{"overall_prompt", v.overall_prompt},
           {"instrumental", v.instrumental},
           {"lyrics", optional_json(v.lyrics)},
           {"duration", optional_json(v.duration)}};
}

void to_json(json& j, const UserIdentity& v) {
  j = json{{"ip", optional_json(v.ip)},
           {"salted_ip", v.salted_ip},
           {"fingerprint", optional_json(v.fingerprint)},
           {"salted_fingerprint", optional_json(v.salted_fingerprint)}};
}

void to_json(json& j, const SessionInfo& v) {
  j = json{{"uuid", v.uuid},
           {"create_time", v.create_time},
           {"frontend_git_hash", v.frontend_version},
           {"ack_tos", v.ack_tos},
           {"new_battle_times", v.new_battle_times}};
}

void to_json(json& j, const SystemKey& v) {
  j = json{{"system_tag", v.system_tag}, {"variant_tag", v.variant_tag}};
}

void to_json(json& j, const GenerationMetadata& v) {
  j = json{{"system_key", v.system_key},
           {"system_git_hash", v.system_version},
           {"system_time_queued", v.system_time_queued},
           {"system_time_started", v.system_time_started},
           {"system_time_completed", v.system_time_completed},
           {"gateway_time_started", v.gateway_time_started},
           {"gateway_time_completed", v.gateway_time_completed},
           {"gateway_num_retries", v.gateway_num_retries},
           {"size_bytes", v.size_bytes},
           {"lyrics", optional_json(v.lyrics)},
           {"sample_rate", v.sample_rate},
           {"num_channels", v.num_channels},
           {"duration", v.duration},
           {"checksum", v.checksum}};
}

void to_json(json& j, const ListenEvent& v) { j = json::array({to_string(v.kind), v.time}); }

void to_json(json& j, const Vote& v) {
  j = json{{"a_listen_data", v.a_listen_data},
           {"b_listen_data", v.b_listen_data},
           {"preference", to_string(v.preference)},
           {"preference_time", v.preference_time},
           {"feedback", optional_json(v.feedback)},
           {"a_feedback", optional_json(v.a_feedback)},
           {"b_feedback", optional_json(v.b_feedback)},
           {"feedback_time", optional_json(v.feedback_time)}};
  if (!v.a_listen_receipts.empty()) j["a_listen_receipts"] = receipts_json(v.a_listen_receipts);
  if (!v.b_listen_receipts.empty()) j["b_listen_receipts"] = receipts_json(v.b_listen_receipts);
}

void to_json(json& j, const BattleRecord& v) {
  j = json{{"uuid", v.uuid},
           {"gateway_git_hash", v.gateway_version},
           {"prompt", v.prompt},
           {"prompt_detailed", v.prompt_detailed},
           {"prompt_user", v.prompt_user},
           {"prompt_session", v.prompt_session},
           {"prompt_prebaked", v.prompt_prebaked},
           {"prompt_routed", v.prompt_routed},
           {"a_audio_url", optional_json(v.a_audio_url)},
           {"a_metadata", optional_json(v.a_metadata)},
           {"b_audio_url", optional_json(v.b_audio_url)},
           {"b_metadata", optional_json(v.b_metadata)},
           {"vote", optional_json(v.vote)},
           {"vote_user", optional_json(v.vote_user)},
           {"vote_session", optional_json(v.vote_session)},
           {"timings", timings_json(v.timings)}};
  if (v.failure) j["failure"] = json{{"stage", v.failure->stage}, {"reason", v.failure->reason}};
  if (v.gate_audit) {
    j["gate_audit"] = json{{"backend", v.gate_audit->backend},
                           {"config_version", v.gate_audit->config_version},
                           {"config_digest", v.gate_audit->config_digest}};
  }
}

void from_json(const json& j, Prompt& v) { v.text = j.at("prompt").get<std::string>(); }

void from_json(const json& j, DetailedPrompt& v) {
  v.overall_prompt = j.at("overall_prompt").get<std::string>();
  v.instrumental = j.at("instrumental").get<bool>();
  v.lyrics = optional_field<std::string>(j, "lyrics");
  v.duration = optional_field<double>(j, "duration");
}

void from_json(const json& j, UserIdentity& v) {
  v.ip = optional_field<std::string>(j, "ip");
  v.salted_ip = j.at("salted_ip").get<std::string>();
  v.fingerprint = optional_field<std::string>(j, "fingerprint");
  v.salted_fingerprint = optional_field<std::string>(j, "salted_fingerprint");
}

void from_json(const json& j, SessionInfo& v) {
  v.uuid = j.at("uuid").get<std::string>();
  v.create_time = j.at("create_time").get<double>();
  v.frontend_version = j.at("frontend_git_hash").get<std::string>();
  v.ack_tos = j.at("ack_tos").get<std::string>();
  v.new_battle_times = j.at("new_battle_times").get<std::vector<double>>();
}

void from_json(const json& j, SystemKey& v) {
  v.system_tag = j.at("system_tag").get<std::string>();
  v.variant_tag = j.at("variant_tag").get<std::string>();
}

void from_json(const json& j, GenerationMetadata& v) {
  v.system_key = j.at("system_key").get<SystemKey>();
  v.system_version = j.at("system_git_hash").get<std::string>();
  v.system_time_queued = j.at("system_time_queued").get<double>();
  v.system_time_started = j.at("system_time_started").get<double>();
  v.system_time_completed = j.at("system_time_completed").get<double>();
  v.gateway_time_started = j.at("gateway_time_started").get<double>();
  v.gateway_time_completed = j.at("gateway_time_completed").get<double>();
  v.gateway_num_retries = j.at("gateway_num_retries").get<std::int64_t>();
  v.size_bytes = j.at("size_bytes").get<std::int64_t>();
  v.lyrics = optional_field<std::string>(j, "lyrics");
  v.sample_rate = j.at("sample_rate").get<std::int64_t>();
  v.num_channels = j.at("num_channels").get<std::int64_t>();
  v.duration = j.at("duration").get<double>();
  v.checksum = j.at("checksum").get<std::string>();
}

void from_json(const json& j, ListenEvent& v) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::kInvalidArgument, "listen event must be [kind, time]");
  }
  v.kind = listen_kind_from_string(j.at(0).get<std::string>());
  v.time = j.at(1).get<double>();
}

void from_json(const json& j, Vote& v) {
  v.a_listen_data = j.at("a_listen_data").get<std::vector<ListenEvent>>();
  v.b_listen_data = j.at("b_listen_data").get<std::vector<ListenEvent>>();
  v.preference = preference_from_string(j.at("preference").get<std::string>());
  v.preference_time = j.at("preference_time").get<double>();
  v.feedback = optional_field<std::string>(j, "feedback");
  v.a_feedback = optional_field<std::string>(j, "a_feedback");
  v.b_feedback = optional_field<std::string>(j, "b_feedback");
  v.feedback_time = optional_field<double>(j, "feedback_time");
  v.a_listen_receipts = receipts_from(j, "a_listen_receipts");
  v.b_listen_receipts = receipts_from(j, "b_listen_receipts");
}

void from_json(const json& j, BattleRecord& v) {
  v.uuid = j.at("uuid").get<std::string>();
  v.gateway_version = j.at("gateway_git_hash").get<std::string>();
  v.prompt = j.at("prompt").get<Prompt>();
  v.prompt_detailed = j.at("prompt_detailed").get<DetailedPrompt>();
  v.prompt_user = j.at("prompt_user").get<UserIdentity>();
  v.prompt_session = j.at("prompt_session").get<SessionInfo>();
  v.prompt_prebaked = j.at("prompt_prebaked").get<bool>();
  v.prompt_routed = j.at("prompt_routed").get<bool>();
  v.a_audio_url = optional_field<std::string>(j, "a_audio_url");
  v.a_metadata = optional_field<GenerationMetadata>(j, "a_metadata");
  v.b_audio_url = optional_field<std::string>(j, "b_audio_url");
  v.b_metadata = optional_field<GenerationMetadata>(j, "b_metadata");
  v.vote = optional_field<Vote>(j, "vote");
  v.vote_user = optional_field<UserIdentity>(j, "vote_user");
  v.vote_session = optional_field<SessionInfo>(j, "vote_session");
  v.timings.clear();
  for (const auto& row : j.at("timings")) {
    v.timings.push_back(TimingEntry{row.at(0).get<std::string>(), row.at(1).get<double>()});
  }
  v.failure.reset();
  if (auto it = j.find("failure"); it != j.end() && !it->is_null()) {
    v.failure = FailureNote{it->at("stage").get<std::string>(), it->at("reason").get<std::string>()};
  }
  v.gate_audit.reset();
  if (auto it = j.find("gate_audit"); it != j.end() && !it->is_null()) {
    v.gate_audit = GateAudit{it->at("backend").get<std::string>(),
                             it->at("config_version").get<std::string>(),
                             it->at("config_digest").get<std::string>()};
  }
}

BattleRecord parse_battle(const json& j) {
  try {
    return j.get<BattleRecord>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("battle record: ") + e.what());
  }
}

BattleRecord parse_battle(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("battle record: ") + e.what());
  }
  return parse_battle(j);
}

std::string serialize_battle(const BattleRecord& record) { return json(record).dump(); }

}  // namespace musicduel
