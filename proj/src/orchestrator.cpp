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

#include "musicduel/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>

#include "musicduel/hashing.hpp"
#include "musicduel/store.hpp"

namespace musicduel::orchestrator {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kCreated: return "CREATED";
    case Phase::kGenerating: return "GENERATING";
    case Phase::kDelivered: return "DELIVERED";
    case Phase::kVoted: return "VOTED";
    case Phase::kFailed: return "FAILED";
  }
  return "UNKNOWN";
}

bool is_legal_transition(Phase from, Phase to) {
  switch (from) {
    case Phase::kCreated: return to == Phase::kGenerating || to == Phase::kFailed;
    case Phase::kGenerating: return to == Phase::kDelivered || to == Phase::kFailed;
    case Phase::kDelivered: return to == Phase::kVoted;
    case Phase::kVoted:
    case Phase::kFailed: return false;
  }
  return false;
}

void BattleState::transition(Phase to) {
  if (!is_legal_transition(phase_, to)) {
    throw Error(ErrorCode::kIllegalTransition,
                "battle " + record_.uuid + ": " + std::string(to_string(phase_)) + " -> " +
                    std::string(to_string(to)) + " is not allowed");
  }
  phase_ = to;
}

std::pair<std::size_t, std::size_t> UniformPairSampler::sample(std::size_t k, std::mt19937_64& rng) {
  if (k < 2) throw Error(ErrorCode::kNoOpponents, "need at least two candidate systems");
  std::uniform_int_distribution<std::size_t> pick(0, k * (k - 1) / 2 - 1);
  std::size_t index = pick(rng);
  std::size_t i = 0;
  while (index >= k - 1 - i) {
    index -= k - 1 - i;
    ++i;
  }
  std::size_t j = i + 1 + index;
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? std::pair{j, i} : std::pair{i, j};
}

bool RateLimiter::try_acquire(const std::string& key, EpochSeconds now) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = buckets_.try_emplace(key, Bucket{capacity_, now});
  Bucket& b = it->second;
  if (!inserted && now > b.updated) {
    b.tokens = std::min(capacity_, b.tokens + (now - b.updated) * refill_);
    b.updated = now;
  }
  if (b.tokens < 1.0) return false;
  b.tokens -= 1.0;
  return true;
}

void to_json(json& j, const BlindBattle& b) {
  j = json{{"battle_uuid", b.battle_uuid}, {"a_audio_ref", b.a_audio_ref}, {"b_audio_ref", b.b_audio_ref}};
}

namespace {

json side_json(const SideReveal& s) {
  return json{{"system_key", s.key.str()},
              {"display_name", s.display_name},
              {"provider", s.provider},
              {"generation_seconds", s.generation_seconds},
              {"rtf", std::isfinite(s.rtf) ? json(s.rtf) : json(nullptr)}};
}

}  // namespace

void to_json(json& j, const Reveal& r) {
  j = json{{"battle_uuid", r.battle_uuid},
           {"preference", to_string(r.preference)},
           {"a", side_json(r.a)},
           {"b", side_json(r.b)},
           {"download_ref", r.download_ref ? json(*r.download_ref) : json(nullptr)}};
}

void to_json(json& j, const GateStatus& g) {
  j = json{{"open", g.open},
           {"a_listened", g.a_listened},
           {"b_listened", g.b_listened},
           {"remaining", {{"A", g.a_remaining}, {"B", g.b_remaining}}}};
}

/// Timing labels shared by the two generation threads.
class TimingLog {
 public:
  explicit TimingLog(const Clock& clock) : clock_(clock) {}

  EpochSeconds mark(std::string label) {
    std::lock_guard lock(mu_);
    EpochSeconds t = clock_.now();
    if (!entries_.empty()) t = std::max(t, entries_.back().time);
    entries_.push_back(TimingEntry{std::move(label), t});
    return t;
  }

  std::vector<TimingEntry> entries() const {
    std::lock_guard lock(mu_);
    return entries_;
  }

 private:
  const Clock& clock_;
  mutable std::mutex mu_;
  std::vector<TimingEntry> entries_;
};

struct Gateway::Entry {
  explicit Entry(BattleRecord record) : state(std::move(record)) {}

  std::mutex mu;
  BattleState state;
  std::array<endpoint::SystemDescriptor, 2> systems;
  std::array<std::vector<std::uint8_t>, 2> audio;
  std::array<std::vector<ListenEvent>, 2> listen;
  std::array<std::vector<ListenReceipt>, 2> receipts;
  EpochSeconds last_activity = 0.0;
  bool feedback_done = false;
  bool persisted = false;
};

struct Gateway::SideOutcome {
  std::optional<endpoint::GenerateResponse> response;
  std::int64_t retries = 0;
  EpochSeconds started = 0.0;
  EpochSeconds completed = 0.0;
  std::optional<std::string> error;
};

namespace {

std::size_t side_index(Side side) { return side == Side::kA ? 0 : 1; }

std::optional<std::string> non_blank(std::optional<std::string> s) {
  if (!s || trim(*s).empty()) return std::nullopt;
  return s;
}

void add_timing(BattleRecord& record, const std::string& label, EpochSeconds t) {
  if (!record.timings.empty()) t = std::max(t, record.timings.back().time);
  record.timings.push_back(TimingEntry{label, t});
}

}  // namespace

Gateway::Gateway(GatewayConfig config, std::shared_ptr<gate::AnalyzerBackend> analyzer,
                 std::vector<std::shared_ptr<endpoint::Endpoint>> endpoints, privacy::SaltConfig salt,
                 std::shared_ptr<store::Store> store, const Clock* clock,
                 std::unique_ptr<PairSampler> sampler)
    : config_(std::move(config)),
      analyzer_(std::move(analyzer)),
      endpoints_(std::move(endpoints)),
      salt_(std::move(salt)),
      store_(std::move(store)),
      clock_(clock != nullptr ? clock : &system_clock_),
      sampler_(sampler ? std::move(sampler) : std::make_unique<UniformPairSampler>()),
      consent_digest_(hashing::digest128_hex(config_.consent_text)),
      health_(config_.cooldown),
      limiter_(config_.rate_limit_burst, config_.rate_limit_per_second),
      rng_(config_.seed != 0 ? config_.seed : std::random_device{}()) {
  if (!analyzer_) throw Error(ErrorCode::kConfiguration, "an analyzer backend is required");
  std::vector<SystemKey> keys;
  for (const auto& ep : endpoints_) {
    if (!ep) throw Error(ErrorCode::kConfiguration, "null endpoint in registry");
    endpoint::validate_descriptor(ep->capabilities());
    keys.push_back(ep->capabilities().key);
    endpoint_locks_.push_back(std::make_unique<std::mutex>());
  }
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    throw Error(ErrorCode::kConfiguration, "duplicate system key in registry");
  }
  if (config_.max_retries < 0) throw Error(ErrorCode::kConfiguration, "max_retries must be >= 0");
  if (store_) {
    auto reg = registry();
    store_->save_registry(reg);
    store_->set_salt_version(salt_.version());
  }
}

Gateway::~Gateway() {
  try {
    finalize_all();
  } catch (const std::exception& e) {
    std::cerr << "musicduel: finalization at shutdown failed: " << e.what() << "\n";
  }
}

std::vector<endpoint::SystemDescriptor> Gateway::registry() const {
  std::vector<endpoint::SystemDescriptor> out;
  for (const auto& ep : endpoints_) out.push_back(ep->capabilities());
  return out;
}

SessionInfo Gateway::create_session(const std::string& ack_tos, const std::string& frontend_version) {
  if (ack_tos != consent_digest_) {
    throw Error(ErrorCode::kConsentRequired, "consent text must be acknowledged",
                json{{"consent_digest", consent_digest_}});
  }
  SessionInfo s;
  s.uuid = make_uuid();
  s.create_time = clock_->now();
  s.frontend_version = frontend_version;
  s.ack_tos = ack_tos;
  std::unique_lock lock(mu_);
  sessions_[s.uuid] = s;
  return s;
}

std::string Gateway::blind_ref(const std::string& battle_uuid, Side side) {
  return "audio/" + battle_uuid + "/" + std::string(to_string(side));
}

Gateway::SideOutcome Gateway::run_side(const endpoint::SystemDescriptor& system, endpoint::Endpoint& ep,
                                       const endpoint::GenerateRequest& request, std::mutex* serial,
                                       TimingLog& log) {
  SideOutcome out;
  const std::string key = system.key.str();
  try {
    log.mark("health_check_" + key + "_start");
    endpoint::HealthStatus status;
    try {
      status = ep.health(config_.health_budget);
    } catch (const std::exception& e) {
      status = endpoint::HealthStatus::unhealthy(e.what());
    }
    log.mark("health_check_" + key + "_end");
    if (!status.healthy) {
      health_.mark_unhealthy(system.key, clock_->now());
      out.error = "health check failed: " + status.reason;
      return out;
    }
    health_.mark_healthy(system.key);

    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      EpochSeconds t = log.mark("generate_" + key + "_start");
      if (attempt == 0) out.started = t;
      out.retries = attempt;
      try {
        endpoint::GenerateResponse response;
        if (serial != nullptr) {
          std::lock_guard lock(*serial);
          response = ep.generate(request);
        } else {
          response = ep.generate(request);
        }
        endpoint::check_response(response);
        if (response.metadata.system_key != system.key) {
          throw Error(ErrorCode::kCapabilityMismatch,
                      "endpoint answered as " + response.metadata.system_key.str());
        }
        out.completed = log.mark("generate_" + key + "_end");
        out.response = std::move(response);
        return out;
      } catch (const Error& e) {
        log.mark("generate_" + key + "_end");
        if (!e.retryable() || attempt == config_.max_retries) {
          out.error = e.what();
          return out;
        }
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

BlindBattle Gateway::create_battle(const std::string& session_uuid, std::string_view prompt_text,
                                   const privacy::RawIdentity& who) {
  const EpochSeconds now = clock_->now();
  UserIdentity user = privacy::identify(who, salt_);
  if (!limiter_.try_acquire(user.salted_ip, now)) {
    throw Error(ErrorCode::kRateLimited, "too many battles; try again shortly");
  }

  SessionInfo session;
  {
    std::unique_lock lock(mu_);
    auto it = sessions_.find(session_uuid);
    if (it == sessions_.end()) {
      throw Error(ErrorCode::kConsentRequired, "unknown session; acknowledge the consent text first");
    }
    it->second.new_battle_times.push_back(now);
    session = it->second;
  }

  TimingLog log(*clock_);
  BattleRecord rec;
  rec.uuid = make_uuid();
  rec.gateway_version = config_.gateway_version;
  rec.prompt_user = user;
  rec.prompt_session = session;
  rec.prompt_prebaked = false;
  rec.prompt_routed = true;

  log.mark("parse");
  rec.prompt = make_prompt(prompt_text, config_.max_prompt_length);
  log.mark("generate");
  log.mark("route");
  gate::GateResult verdict = gate::gate(rec.prompt, *analyzer_, config_.max_duration);
  if (!verdict.verdict.accepted) {
    throw Error(ErrorCode::kModerationRejected, verdict.verdict.reason,
                json{{"category", gate::to_string(*verdict.verdict.category)}});
  }
  rec.prompt_detailed = *verdict.detailed;
  rec.gate_audit = analyzer_->audit();

  log.mark("sample_pair");
  std::vector<std::size_t> candidates;
  const EpochSeconds routed_at = clock_->now();
  for (std::size_t i = 0; i < endpoints_.size(); ++i) {
    const auto& d = endpoints_[i]->capabilities();
    if (endpoint::is_compatible(rec.prompt_detailed, d, config_.duration_tolerance) &&
        health_.available(d.key, routed_at)) {
      candidates.push_back(i);
    }
  }
  if (candidates.size() < 2) {
    throw Error(ErrorCode::kNoOpponents, "fewer than two available systems can serve this prompt",
                json{{"compatible", candidates.size()}});
  }
  std::pair<std::size_t, std::size_t> picked;
  {
    std::lock_guard lock(rng_mu_);
    picked = sampler_->sample(candidates.size(), rng_);
  }
  const std::array<std::size_t, 2> idx = {candidates.at(picked.first), candidates.at(picked.second)};
  if (idx[0] == idx[1]) throw Error(ErrorCode::kConfiguration, "pair sampler returned a self-pair");

  auto entry = std::make_shared<Entry>(rec);
  for (std::size_t s = 0; s < 2; ++s) entry->systems[s] = endpoints_[idx[s]]->capabilities();

  const bool vocal = !rec.prompt_detailed.instrumental;
  std::optional<std::string> lyrics;
  if (vocal && (entry->systems[0].requires_explicit_lyrics || entry->systems[1].requires_explicit_lyrics)) {
    lyrics = gate::provision_lyrics(rec.prompt, rec.prompt_detailed, *analyzer_);
  }

  std::array<endpoint::GenerateRequest, 2> requests;
  for (std::size_t s = 0; s < 2; ++s) {
    requests[s].detailed = rec.prompt_detailed;
    if (vocal && entry->systems[s].requires_explicit_lyrics) requests[s].provisioned_lyrics = lyrics;
    requests[s].deadline = config_.generate_deadline;
    requests[s].seed = config_.generation_seed;
  }

  entry->state.transition(Phase::kGenerating);
  log.mark("generate_parallel_start");
  std::array<std::future<SideOutcome>, 2> futures;
  for (std::size_t s = 0; s < 2; ++s) {
    std::mutex* serial = entry->systems[s].max_concurrency == 1 ? endpoint_locks_[idx[s]].get() : nullptr;
    futures[s] = std::async(std::launch::async, [this, &entry, &requests, &log, serial, s, ep = endpoints_[idx[s]]] {
      return run_side(entry->systems[s], *ep, requests[s], serial, log);
    });
  }
  std::array<SideOutcome, 2> outcomes = {futures[0].get(), futures[1].get()};
  log.mark("generate_parallel_end");

  BattleRecord& r = entry->state.record();
  std::array<std::optional<GenerationMetadata>*, 2> meta = {&r.a_metadata, &r.b_metadata};
  std::array<std::optional<std::string>*, 2> urls = {&r.a_audio_url, &r.b_audio_url};
  for (std::size_t s = 0; s < 2; ++s) {
    if (!outcomes[s].response) continue;
    GenerationMetadata m = outcomes[s].response->metadata;
    m.gateway_time_started = outcomes[s].started;
    m.gateway_time_completed = outcomes[s].completed;
    m.gateway_num_retries = outcomes[s].retries;
    *meta[s] = m;
    entry->audio[s] = std::move(outcomes[s].response->audio);
  }

  auto fail = [&](std::string stage, std::string reason, ErrorCode code) {
    r.failure = FailureNote{stage, reason};
    r.timings = log.entries();
    for (std::size_t s = 0; s < 2; ++s) {
      if (!*meta[s]) continue;
      try {
        if (store_) store_->put_audio(entry->audio[s]);
        *urls[s] = store::audio_ref((*meta[s])->checksum);
      } catch (const Error&) {
        meta[s]->reset();
      }
    }
    entry->state.transition(Phase::kFailed);
    try {
      persist_final(*entry);
    } catch (const std::exception& e) {
      std::cerr << "musicduel: cannot persist failed battle " << r.uuid << ": " << e.what() << "\n";
    }
    throw Error(code, stage + " failed: " + reason + "; please retry",
                json{{"battle_uuid", r.uuid}, {"stage", stage}, {"retry", true}});
  };

  for (std::size_t s = 0; s < 2; ++s) {
    if (outcomes[s].error) {
      fail(s == 0 ? "generate_A" : "generate_B", *outcomes[s].error, ErrorCode::kGenerationFailed);
    }
  }

  log.mark("create_battle_obj");
  log.mark("upload_audio");
  try {
    for (std::size_t s = 0; s < 2; ++s) {
      std::string checksum = (*meta[s])->checksum;
      if (store_) checksum = store_->put_audio(entry->audio[s]);
      *urls[s] = store::audio_ref(checksum);
    }
  } catch (const Error& e) {
    fail("upload", e.what(), ErrorCode::kStorage);
  }
  log.mark("upload_metadata");
  r.timings = log.entries();
  try {
    stage(*entry);
  } catch (const Error& e) {
    fail("upload", e.what(), ErrorCode::kStorage);
  }

  entry->state.transition(Phase::kDelivered);
  entry->last_activity = clock_->now();
  {
    std::unique_lock lock(mu_);
    battles_[r.uuid] = entry;
  }
  return BlindBattle{r.uuid, blind_ref(r.uuid, Side::kA), blind_ref(r.uuid, Side::kB)};
}

std::shared_ptr<Gateway::Entry> Gateway::lookup(const std::string& battle_uuid) const {
  std::shared_lock lock(mu_);
  auto it = battles_.find(battle_uuid);
  if (it == battles_.end()) return nullptr;
  return it->second;
}

std::vector<std::uint8_t> Gateway::fetch_audio(const std::string& ref) const {
  constexpr std::string_view kPrefix = "audio/";
  auto slash = ref.rfind('/');
  if (ref.compare(0, kPrefix.size(), kPrefix) != 0 || slash == std::string::npos || slash < kPrefix.size()) {
    throw Error(ErrorCode::kNotFound, "unknown audio reference");
  }
  Side side;
  try {
    side = side_from_string(ref.substr(slash + 1));
  } catch (const Error&) {
    throw Error(ErrorCode::kNotFound, "unknown audio reference");
  }
  return fetch_audio(ref.substr(kPrefix.size(), slash - kPrefix.size()), side);
}

std::vector<std::uint8_t> Gateway::fetch_audio(const std::string& battle_uuid, Side side) const {
  if (auto entry = lookup(battle_uuid)) {
    std::lock_guard lock(entry->mu);
    return entry->audio[side_index(side)];
  }
  if (store_) {
    if (auto rec = store_->find(battle_uuid)) {
      const auto& m = rec->metadata(side);
      if (m) return store_->read_audio(m->checksum);
    }
  }
  throw Error(ErrorCode::kNotFound, "no audio for battle " + battle_uuid);
}

std::size_t Gateway::submit_listen_events(const std::string& battle_uuid, Side side,
                                          std::span<const ListenEvent> events) {
  auto entry = lookup(battle_uuid);
  if (!entry) throw Error(ErrorCode::kNotFound, "unknown or closed battle " + battle_uuid);
  std::lock_guard lock(entry->mu);
  if (entry->state.phase() == Phase::kVoted) throw Error(ErrorCode::kConflict, "battle already voted");
  if (entry->state.phase() != Phase::kDelivered) {
    throw Error(ErrorCode::kIllegalTransition, "battle is not accepting telemetry");
  }
  if (!is_time_ordered(events)) throw Error(ErrorCode::kOrdering, "listen events are not in time order");
  auto& stored = entry->listen[side_index(side)];
  if (!events.empty() && !stored.empty() && events.front().time < stored.back().time) {
    throw Error(ErrorCode::kOrdering, "listen events precede previously stored events");
  }
  const EpochSeconds now = clock_->now();
  stored.insert(stored.end(), events.begin(), events.end());
  entry->receipts[side_index(side)].push_back(
      ListenReceipt{now, static_cast<std::int64_t>(events.size())});
  entry->last_activity = now;
  return stored.size();
}

GateStatus Gateway::gate_status(const std::string& battle_uuid, EpochSeconds now) const {
  auto entry = lookup(battle_uuid);
  if (!entry) throw Error(ErrorCode::kNotFound, "unknown or closed battle " + battle_uuid);
  std::lock_guard lock(entry->mu);
  GateStatus g;
  g.a_listened = effective_listen_seconds(entry->listen[0], now);
  g.b_listened = effective_listen_seconds(entry->listen[1], now);
  g.a_remaining = std::max(0.0, config_.vote_gate_seconds - g.a_listened);
  g.b_remaining = std::max(0.0, config_.vote_gate_seconds - g.b_listened);
  g.open = g.a_listened >= config_.vote_gate_seconds && g.b_listened >= config_.vote_gate_seconds;
  return g;
}

bool Gateway::vote_gate_open(const std::string& battle_uuid, EpochSeconds now) const {
  return gate_status(battle_uuid, now).open;
}

Reveal Gateway::submit_vote(const std::string& battle_uuid, Preference preference,
                            const privacy::RawIdentity& who, const std::string& session_uuid) {
  UserIdentity voter = privacy::identify(who, salt_);
  SessionInfo session;
  {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(session_uuid);
    if (it == sessions_.end()) throw Error(ErrorCode::kConsentRequired, "unknown session");
    session = it->second;
  }
  auto entry = lookup(battle_uuid);
  if (!entry) throw Error(ErrorCode::kNotFound, "unknown or closed battle " + battle_uuid);

  const EpochSeconds now = clock_->now();
  GateStatus g = gate_status(battle_uuid, now);
  std::lock_guard lock(entry->mu);
  if (entry->state.phase() == Phase::kVoted) throw Error(ErrorCode::kConflict, "battle already voted");
  if (entry->state.phase() != Phase::kDelivered) {
    throw Error(ErrorCode::kIllegalTransition, "battle is not open for voting");
  }
  if (!g.open) {
    throw Error(ErrorCode::kGateNotMet, "listen to both clips before voting",
                json{{"remaining", {{"A", g.a_remaining}, {"B", g.b_remaining}}}});
  }

  BattleRecord& r = entry->state.record();
  Vote v;
  v.a_listen_data = entry->listen[0];
  v.b_listen_data = entry->listen[1];
  v.a_listen_receipts = entry->receipts[0];
  v.b_listen_receipts = entry->receipts[1];
  v.preference = preference;
  v.preference_time = now;
  r.vote = v;
  r.vote_user = voter;
  r.vote_session = session;
  add_timing(r, "vote", now);
  entry->state.transition(Phase::kVoted);
  entry->last_activity = now;
  stage(*entry);

  Reveal reveal;
  reveal.battle_uuid = battle_uuid;
  reveal.preference = preference;
  std::array<SideReveal*, 2> sides = {&reveal.a, &reveal.b};
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& d = entry->systems[s];
    const auto& m = s == 0 ? *r.a_metadata : *r.b_metadata;
    sides[s]->key = d.key;
    sides[s]->display_name = d.display_name;
    sides[s]->provider = d.provider;
    sides[s]->generation_seconds = m.system_span();
    sides[s]->rtf = m.system_span() > 0.0 ? m.duration / m.system_span()
                                          : std::numeric_limits<double>::infinity();
  }
  if (is_decisive(preference)) {
    reveal.download_ref = blind_ref(battle_uuid, preference == Preference::kA ? Side::kA : Side::kB);
  }
  return reveal;
}

void Gateway::submit_feedback(const std::string& battle_uuid, std::optional<std::string> overall,
                              std::optional<std::string> a_feedback, std::optional<std::string> b_feedback) {
  auto entry = lookup(battle_uuid);
  if (!entry) throw Error(ErrorCode::kNotFound, "unknown or closed battle " + battle_uuid);
  {
    std::lock_guard lock(entry->mu);
    if (entry->state.phase() != Phase::kVoted) {
      throw Error(ErrorCode::kIllegalTransition, "feedback requires a recorded vote");
    }
    if (entry->feedback_done) throw Error(ErrorCode::kConflict, "feedback already submitted");
    BattleRecord& r = entry->state.record();
    const EpochSeconds now = std::max(clock_->now(), r.vote->preference_time);
    r.vote->feedback = non_blank(std::move(overall));
    r.vote->a_feedback = non_blank(std::move(a_feedback));
    r.vote->b_feedback = non_blank(std::move(b_feedback));
    r.vote->feedback_time = now;
    add_timing(r, "vote", now);
    entry->feedback_done = true;
    entry->last_activity = now;
  }
  finalize(battle_uuid);
}

void Gateway::stage(const Entry& entry) {
  if (store_) store_->stage(entry.state.record());
}

void Gateway::persist_final(Entry& entry) {
  if (entry.persisted) return;
  const BattleRecord& r = entry.state.record();
  ValidationOptions options;
  options.vote_gate_seconds = config_.vote_gate_seconds;
  options.max_prompt_length = config_.max_prompt_length;
  options.max_duration = config_.max_duration;
  if (store_) {
    store_->append_battle(r, options);
    store_->unstage(r.uuid);
  } else {
    auto violations = validate_battle(r, options);
    if (!violations.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "record " + r.uuid + " fails validation: " + violations.front().field + ": " +
                      violations.front().message);
    }
    std::lock_guard lock(finalized_mu_);
    finalized_.push_back(r);
  }
  entry.persisted = true;
}

void Gateway::finalize(const std::string& battle_uuid) {
  auto entry = lookup(battle_uuid);
  if (!entry) throw Error(ErrorCode::kNotFound, "unknown or closed battle " + battle_uuid);
  {
    std::lock_guard lock(entry->mu);
    Phase p = entry->state.phase();
    if (p == Phase::kCreated || p == Phase::kGenerating) {
      throw Error(ErrorCode::kIllegalTransition, "battle is still generating");
    }
    persist_final(*entry);
  }
  std::unique_lock lock(mu_);
  battles_.erase(battle_uuid);
}

std::size_t Gateway::finalize_idle(EpochSeconds now, double max_idle_seconds) {
  std::vector<std::string> idle;
  {
    std::shared_lock lock(mu_);
    for (const auto& [uuid, entry] : battles_) {
      std::lock_guard entry_lock(entry->mu);
      if (entry->last_activity <= now - max_idle_seconds) idle.push_back(uuid);
    }
  }
  for (const auto& uuid : idle) finalize(uuid);
  return idle.size();
}

std::size_t Gateway::finalize_all() {
  std::vector<std::string> all;
  {
    std::shared_lock lock(mu_);
    for (const auto& [uuid, entry] : battles_) all.push_back(uuid);
  }
  for (const auto& uuid : all) finalize(uuid);
  return all.size();
}

Phase Gateway::phase(const std::string& battle_uuid) const {
  if (auto entry = lookup(battle_uuid)) {
    std::lock_guard lock(entry->mu);
    return entry->state.phase();
  }
  BattleRecord r = record(battle_uuid);
  if (r.failure) return Phase::kFailed;
  return r.vote ? Phase::kVoted : Phase::kDelivered;
}

BattleRecord Gateway::record(const std::string& battle_uuid) const {
  if (auto entry = lookup(battle_uuid)) {
    std::lock_guard lock(entry->mu);
    return entry->state.record();
  }
  if (store_) {
    if (auto r = store_->find(battle_uuid)) return *r;
  } else {
    std::lock_guard lock(finalized_mu_);
    for (const auto& r : finalized_) {
      if (r.uuid == battle_uuid) return r;
    }
  }
  throw Error(ErrorCode::kNotFound, "unknown battle " + battle_uuid);
}

std::vector<BattleRecord> Gateway::finalized_records() const {
  if (store_) return store_->records();
  std::lock_guard lock(finalized_mu_);
  return finalized_;
}

}  // namespace musicduel::orchestrator
