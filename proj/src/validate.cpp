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

#include <algorithm>
#include <map>

#include "musicduel/domain.hpp"

namespace musicduel {

namespace {

class Collector {
 public:
  void add(std::string field, std::string message) {
    out_.push_back(Violation{std::move(field), std::move(message)});
  }
  std::vector<Violation> take() { return std::move(out_); }
  void append(std::vector<Violation> more) {
    for (auto& v : more) out_.push_back(std::move(v));
  }

 private:
  std::vector<Violation> out_;
};

void check_identity(const UserIdentity& u, const std::string& field, Collector& c) {
  if (u.ip) c.add(field + ".ip", "raw identifier must not be persisted");
  if (u.fingerprint) c.add(field + ".fingerprint", "raw identifier must not be persisted");
  if (!is_lower_hex(u.salted_ip, 32)) c.add(field + ".salted_ip", "must be 32 lowercase hex characters");
  if (u.salted_fingerprint && !is_lower_hex(*u.salted_fingerprint, 32)) {
    c.add(field + ".salted_fingerprint", "must be 32 lowercase hex characters");
  }
}

void check_session(const SessionInfo& s, const std::string& field, Collector& c) {
  if (s.uuid.empty()) c.add(field + ".uuid", "missing");
  if (s.ack_tos.empty()) c.add(field + ".ack_tos", "terms of service not acknowledged");
  if (!std::is_sorted(s.new_battle_times.begin(), s.new_battle_times.end())) {
    c.add(field + ".new_battle_times", "must be non-decreasing");
  }
}

void check_metadata(const GenerationMetadata& m, const std::string& field, Collector& c) {
  if (m.system_key.system_tag.empty() || m.system_key.variant_tag.empty()) {
    c.add(field + ".system_key", "tag and variant must be non-empty");
  }
  if (!(m.system_time_queued <= m.system_time_started &&
        m.system_time_started <= m.system_time_completed)) {
    c.add(field + ".system_time_*", "queued <= started <= completed violated");
  }
  if (!(m.gateway_time_started <= m.gateway_time_completed)) {
    c.add(field + ".gateway_time_*", "started <= completed violated");
  }
  if (m.gateway_num_retries < 0) c.add(field + ".gateway_num_retries", "must be non-negative");
  if (m.size_bytes < 0) c.add(field + ".size_bytes", "must be non-negative");
  if (!(m.duration > 0.0)) c.add(field + ".duration", "must be positive");
  if (m.sample_rate <= 0) c.add(field + ".sample_rate", "must be positive");
  if (m.num_channels <= 0) c.add(field + ".num_channels", "must be positive");
  if (m.checksum.empty()) c.add(field + ".checksum", "missing");
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}
bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

enum class Step { kHealthStart, kHealthEnd, kGenerateStart, kGenerateEnd };

}  // namespace

std::vector<Violation> validate_timings(const BattleRecord& record) {
  Collector c;
  const auto& t = record.timings;
  const bool partial = record.failure.has_value();

  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i].time < t[i - 1].time) {
      c.add("timings", "times decrease at '" + t[i].label + "'");
      break;
    }
  }

  static const std::vector<std::string> kHead = {"parse", "generate", "route", "sample_pair",
                                                 "generate_parallel_start"};
  static const std::vector<std::string> kTail = {"generate_parallel_end", "create_battle_obj",
                                                 "upload_audio", "upload_metadata"};
  std::size_t i = 0;
  for (const auto& label : kHead) {
    if (i == t.size()) {
      if (!partial) c.add("timings", "missing '" + label + "'");
      return c.take();
    }
    if (t[i].label != label) {
      c.add("timings", "expected '" + label + "' at position " + std::to_string(i) + ", found '" +
                           t[i].label + "'");
      return c.take();
    }
    ++i;
  }

  // Per-system block: health_check_<key>_start/_end then one generate
  // start/end pair per attempt.
  std::map<std::string, std::vector<Step>> steps;
  for (; i < t.size() && t[i].label != "generate_parallel_end"; ++i) {
    std::string_view label = t[i].label;
    std::string_view rest;
    Step step;
    if (starts_with(label, "health_check_")) {
      rest = label.substr(13);
      if (ends_with(rest, "_start")) step = Step::kHealthStart;
      else if (ends_with(rest, "_end")) step = Step::kHealthEnd;
      else {
        c.add("timings", "malformed label '" + t[i].label + "'");
        continue;
      }
    } else if (starts_with(label, "generate_")) {
      rest = label.substr(9);
      if (ends_with(rest, "_start")) step = Step::kGenerateStart;
      else if (ends_with(rest, "_end")) step = Step::kGenerateEnd;
      else {
        c.add("timings", "malformed label '" + t[i].label + "'");
        continue;
      }
    } else {
      c.add("timings", "unexpected label '" + t[i].label + "' inside parallel generation");
      continue;
    }
    std::string key(rest.substr(0, rest.rfind('_')));
    steps[key].push_back(step);
  }

  std::vector<std::pair<std::string, const std::optional<GenerationMetadata>*>> sides;
  if (record.a_metadata) sides.emplace_back(record.a_metadata->system_key.str(), &record.a_metadata);
  if (record.b_metadata) sides.emplace_back(record.b_metadata->system_key.str(), &record.b_metadata);
  for (const auto& [key, meta] : sides) {
    if (!steps.count(key)) c.add("timings", "no health_check/generate labels for " + key);
  }
  if (!partial && steps.size() != 2) {
    c.add("timings", "expected labels for exactly two systems, found " + std::to_string(steps.size()));
  }

  for (const auto& [key, seq] : steps) {
    bool ok = seq.size() >= 2 && seq[0] == Step::kHealthStart && seq[1] == Step::kHealthEnd;
    std::size_t attempts = 0;
    for (std::size_t k = 2; ok && k < seq.size(); k += 2) {
      if (seq[k] != Step::kGenerateStart) ok = false;
      else if (k + 1 < seq.size() && seq[k + 1] != Step::kGenerateEnd) ok = false;
      else if (k + 1 == seq.size() && !partial) ok = false;
      else ++attempts;
    }
    if (!partial && seq.size() < 4) ok = false;
    if (!ok && !(partial && seq.size() == 1 && seq[0] == Step::kHealthStart)) {
      c.add("timings", "per-system labels out of order for " + key);
      continue;
    }
    for (const auto& [side_key, meta] : sides) {
      if (side_key == key && !partial &&
          static_cast<std::int64_t>(attempts) != (*meta)->gateway_num_retries + 1) {
        c.add("timings", "generate attempts for " + key + " do not match gateway_num_retries");
      }
    }
  }

  if (i == t.size()) {
    if (!partial) c.add("timings", "missing 'generate_parallel_end'");
    return c.take();
  }
  for (const auto& label : kTail) {
    if (i == t.size()) {
      if (!partial) c.add("timings", "missing '" + label + "'");
      return c.take();
    }
    if (t[i].label != label) {
      c.add("timings", "expected '" + label + "', found '" + t[i].label + "'");
      return c.take();
    }
    ++i;
  }
  std::size_t votes = 0;
  for (; i < t.size(); ++i) {
    if (t[i].label == "vote") ++votes;
    else c.add("timings", "unexpected label '" + t[i].label + "' after upload_metadata");
  }
  if (record.vote && votes == 0) c.add("timings", "voted battle has no 'vote' entry");
  if (!record.vote && votes > 0) c.add("timings", "'vote' entry without a vote");
  return c.take();
}

std::vector<Violation> validate_battle(const BattleRecord& record, const ValidationOptions& options) {
  Collector c;
  if (record.uuid.empty()) c.add("uuid", "missing");

  if (trim(record.prompt.text).empty()) c.add("prompt.prompt", "empty after trimming");
  if (utf8_length(record.prompt.text) > options.max_prompt_length) {
    c.add("prompt.prompt", "exceeds maximum length");
  }

  const auto& d = record.prompt_detailed;
  if (d.duration && !(*d.duration > 0.0 && *d.duration <= options.max_duration)) {
    c.add("prompt_detailed.duration", "must be in (0, max_duration]");
  }
  if (d.instrumental && d.lyrics) c.add("prompt_detailed.lyrics", "instrumental prompt with lyrics");

  check_identity(record.prompt_user, "prompt_user", c);
  check_session(record.prompt_session, "prompt_session", c);

  if (record.a_metadata) check_metadata(*record.a_metadata, "a_metadata", c);
  else if (!record.failure) c.add("a_metadata", "missing");
  if (record.b_metadata) check_metadata(*record.b_metadata, "b_metadata", c);
  else if (!record.failure) c.add("b_metadata", "missing");
  if (record.a_metadata && record.b_metadata &&
      record.a_metadata->system_key == record.b_metadata->system_key) {
    c.add("a_metadata.system_key/b_metadata.system_key", "a battle must pair two distinct systems");
  }

  if (record.vote) {
    const auto& v = *record.vote;
    if (record.failure) c.add("vote", "failed battle cannot carry a vote");
    for (auto [side, events] : {std::pair{"a", &v.a_listen_data}, std::pair{"b", &v.b_listen_data}}) {
      std::string field = std::string("vote.") + side + "_listen_data";
      try {
        double listened = effective_listen_seconds(*events, v.preference_time);
        if (listened < options.vote_gate_seconds) {
          c.add(field, "listened " + format_double(listened) + " s, below the vote gate");
        }
      } catch (const Error&) {
        c.add(field, "events not in time order");
      }
    }
    if (v.feedback_time && *v.feedback_time < v.preference_time) {
      c.add("vote.feedback_time", "precedes preference_time");
    }
    if (!record.vote_user) c.add("vote_user", "missing for a voted battle");
    if (!record.vote_session) c.add("vote_session", "missing for a voted battle");
  }
  if (record.vote_user) check_identity(*record.vote_user, "vote_user", c);
  if (record.vote_session) check_session(*record.vote_session, "vote_session", c);

  c.append(validate_timings(record));
  return c.take();
}

}  // namespace musicduel
