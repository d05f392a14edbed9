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

// Canonical battle data model. JSON field names follow the released battle
// log format; extension fields (receipts, failure, gate audit) are omitted
// from the serialization when absent so that plain records round-trip.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musicduel/common.hpp"

namespace musicduel {

inline constexpr std::size_t kMaxPromptLength = 2000;
inline constexpr double kMaxDurationSeconds = 600.0;
inline constexpr double kDefaultVoteGateSeconds = 4.0;

enum class ListenKind { kPlay, kPause, kTick };
enum class Preference { kA, kB, kTie, kBothBad };
enum class Side { kA, kB };

std::string_view to_string(ListenKind kind);
std::string_view to_string(Preference preference);
std::string_view to_string(Side side);
ListenKind listen_kind_from_string(std::string_view s);
Preference preference_from_string(std::string_view s);
Side side_from_string(std::string_view s);

inline bool is_decisive(Preference p) { return p == Preference::kA || p == Preference::kB; }

struct Prompt {
  std::string text;
  bool operator==(const Prompt&) const = default;
};

/// Validates and wraps prompt text: non-empty after trimming and at most
/// `max_length` code points. Throws kInvalidArgument.
Prompt make_prompt(std::string_view text, std::size_t max_length = kMaxPromptLength);

struct DetailedPrompt {
  std::string overall_prompt;
  bool instrumental = true;
  std::optional<std::string> lyrics;
  std::optional<double> duration;
  bool operator==(const DetailedPrompt&) const = default;
};

struct UserIdentity {
  std::optional<std::string> ip;  // transient, never persisted
  std::string salted_ip;
  std::optional<std::string> fingerprint;  // transient, never persisted
  std::optional<std::string> salted_fingerprint;
  bool operator==(const UserIdentity&) const = default;
};

struct SessionInfo {
  std::string uuid;
  EpochSeconds create_time = 0.0;
  std::string frontend_version;
  std::string ack_tos;
  std::vector<EpochSeconds> new_battle_times;
  bool operator==(const SessionInfo&) const = default;
};

struct SystemKey {
  std::string system_tag;
  std::string variant_tag;

  /// "tag:variant", the form used in timing labels.
  std::string str() const { return system_tag + ":" + variant_tag; }
  static SystemKey parse(std::string_view s);

  auto operator<=>(const SystemKey&) const = default;
  bool operator==(const SystemKey&) const = default;
};

struct GenerationMetadata {
  SystemKey system_key;
  std::string system_version;
  EpochSeconds system_time_queued = 0.0;
  EpochSeconds system_time_started = 0.0;
  EpochSeconds system_time_completed = 0.0;
  EpochSeconds gateway_time_started = 0.0;
  EpochSeconds gateway_time_completed = 0.0;
  std::int64_t gateway_num_retries = 0;
  std::int64_t size_bytes = 0;
  std::optional<std::string> lyrics;
  std::int64_t sample_rate = 0;
  std::int64_t num_channels = 0;
  double duration = 0.0;
  std::string checksum;

  double system_span() const { return system_time_completed - system_time_started; }
  double gateway_span() const { return gateway_time_completed - gateway_time_started; }
  bool operator==(const GenerationMetadata&) const = default;
};

struct ListenEvent {
  ListenKind kind = ListenKind::kTick;
  EpochSeconds time = 0.0;
  bool operator==(const ListenEvent&) const = default;
};

/// Server receipt of one telemetry batch (client clocks are untrusted).
struct ListenReceipt {
  EpochSeconds received = 0.0;
  std::int64_t count = 0;
  bool operator==(const ListenReceipt&) const = default;
};

struct Vote {
  std::vector<ListenEvent> a_listen_data;
  std::vector<ListenEvent> b_listen_data;
  Preference preference = Preference::kTie;
  EpochSeconds preference_time = 0.0;
  std::optional<std::string> feedback;
  std::optional<std::string> a_feedback;
  std::optional<std::string> b_feedback;
  std::optional<EpochSeconds> feedback_time;
  std::vector<ListenReceipt> a_listen_receipts;
  std::vector<ListenReceipt> b_listen_receipts;
  bool operator==(const Vote&) const = default;
};

struct TimingEntry {
  std::string label;
  EpochSeconds time = 0.0;
  bool operator==(const TimingEntry&) const = default;
};

struct FailureNote {
  std::string stage;  // e.g. "generate_A", "upload"
  std::string reason;
  bool operator==(const FailureNote&) const = default;
};

struct GateAudit {
  std::string backend;
  std::string config_version;
  std::string config_digest;
  bool operator==(const GateAudit&) const = default;
};

struct BattleRecord {
  std::string uuid;
  std::string gateway_version;
  Prompt prompt;
  DetailedPrompt prompt_detailed;
  UserIdentity prompt_user;
  SessionInfo prompt_session;
  bool prompt_prebaked = false;
  bool prompt_routed = true;
  std::optional<std::string> a_audio_url;
  std::optional<GenerationMetadata> a_metadata;
  std::optional<std::string> b_audio_url;
  std::optional<GenerationMetadata> b_metadata;
  std::optional<Vote> vote;
  std::optional<UserIdentity> vote_user;
  std::optional<SessionInfo> vote_session;
  std::vector<TimingEntry> timings;
  std::optional<FailureNote> failure;
  std::optional<GateAudit> gate_audit;

  const std::optional<GenerationMetadata>& metadata(Side side) const {
    return side == Side::kA ? a_metadata : b_metadata;
  }
  bool operator==(const BattleRecord&) const = default;
};

// Serialization. Parsing throws Error(kInvalidArgument) naming the field.
void to_json(json& j, const Prompt& v);
void to_json(json& j, const DetailedPrompt& v);
void to_json(json& j, const UserIdentity& v);
void to_json(json& j, const SessionInfo& v);
void to_json(json& j, const SystemKey& v);
void to_json(json& j, const GenerationMetadata& v);
void to_json(json& j, const ListenEvent& v);
void to_json(json& j, const Vote& v);
void to_json(json& j, const BattleRecord& v);

void from_json(const json& j, Prompt& v);
void from_json(const json& j, DetailedPrompt& v);
void from_json(const json& j, UserIdentity& v);
void from_json(const json& j, SessionInfo& v);
void from_json(const json& j, SystemKey& v);
void from_json(const json& j, GenerationMetadata& v);
void from_json(const json& j, ListenEvent& v);
void from_json(const json& j, Vote& v);
void from_json(const json& j, BattleRecord& v);

BattleRecord parse_battle(const json& j);
BattleRecord parse_battle(std::string_view text);
/// Compact single-line canonical form (sorted keys).
std::string serialize_battle(const BattleRecord& record);

// Listening telemetry.

/// Sum of PLAY->PAUSE intervals; a trailing open PLAY is closed at `now`.
/// TICKs are ignored. A PLAY while already playing moves the open anchor.
/// Throws Error(kOrdering) if event times decrease.
double effective_listen_seconds(std::span<const ListenEvent> events, EpochSeconds now);

bool is_time_ordered(std::span<const ListenEvent> events);

// Validation.

struct Violation {
  std::string field;
  std::string message;
  bool operator==(const Violation&) const = default;
};

struct ValidationOptions {
  double vote_gate_seconds = kDefaultVoteGateSeconds;
  std::size_t max_prompt_length = kMaxPromptLength;
  double max_duration = kMaxDurationSeconds;
};

/// One violation per failed invariant; empty iff the record is well formed.
std::vector<Violation> validate_battle(const BattleRecord& record,
                                       const ValidationOptions& options = {});

/// Violations of the timing-label order alone (also used by validate_battle).
std::vector<Violation> validate_timings(const BattleRecord& record);

}  // namespace musicduel
