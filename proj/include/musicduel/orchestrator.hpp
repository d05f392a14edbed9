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

// Battle lifecycle: prompt gate, routing, paired generation, blind delivery,
// listening telemetry, vote gate, reveal, feedback, and finalization.

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "musicduel/domain.hpp"
#include "musicduel/endpoint.hpp"
#include "musicduel/gate.hpp"
#include "musicduel/privacy.hpp"

namespace musicduel::store {
class Store;
}

namespace musicduel::orchestrator {

using endpoint::Seconds;

enum class Phase { kCreated, kGenerating, kDelivered, kVoted, kFailed };

std::string_view to_string(Phase phase);
bool is_legal_transition(Phase from, Phase to);

/// Chooses the two systems of a battle, returned as (A, B).
class PairSampler {
 public:
  virtual ~PairSampler() = default;
  virtual std::pair<std::size_t, std::size_t> sample(std::size_t candidates, std::mt19937_64& rng) = 0;
};

/// Unordered pair uniform over all C(k, 2) pairs, then an independent fair
/// coin decides which member plays side A.
class UniformPairSampler final : public PairSampler {
 public:
  std::pair<std::size_t, std::size_t> sample(std::size_t candidates, std::mt19937_64& rng) override;
};

/// Token bucket per key.
class RateLimiter {
 public:
  RateLimiter(double capacity, double refill_per_second)
      : capacity_(capacity), refill_(refill_per_second) {}

  /// Takes one token for `key` if available.
  bool try_acquire(const std::string& key, EpochSeconds now);

 private:
  struct Bucket {
    double tokens;
    EpochSeconds updated;
  };
  double capacity_;
  double refill_;
  std::mutex mu_;
  std::map<std::string, Bucket> buckets_;
};

struct GatewayConfig {
  std::string gateway_version = "musicduel-0.1.0";
  std::string consent_text =
      "Prompts, votes, feedback, and generated audio are published in an open dataset. "
      "Identifiers are replaced by salted digests before storage.";
  double vote_gate_seconds = kDefaultVoteGateSeconds;
  Seconds health_budget = endpoint::kDefaultHealthBudget;
  Seconds generate_deadline = endpoint::kDefaultGenerateDeadline;
  Seconds cooldown = endpoint::kDefaultCooldown;
  int max_retries = 1;
  std::size_t max_prompt_length = kMaxPromptLength;
  double max_duration = kMaxDurationSeconds;
  double duration_tolerance = endpoint::kDurationTolerance;
  /// Battles created per salted ip: bucket size and refill rate.
  double rate_limit_burst = 30.0;
  double rate_limit_per_second = 0.5;
  /// 0 draws a seed from std::random_device.
  std::uint64_t seed = 0;
  std::uint64_t generation_seed = 0;
};

/// What the client sees before voting: nothing about the systems.
struct BlindBattle {
  std::string battle_uuid;
  std::string a_audio_ref;
  std::string b_audio_ref;
};

void to_json(json& j, const BlindBattle& b);

struct SideReveal {
  SystemKey key;
  std::string display_name;
  std::string provider;
  double generation_seconds = 0.0;
  double rtf = 0.0;
};

struct Reveal {
  std::string battle_uuid;
  Preference preference = Preference::kTie;
  SideReveal a;
  SideReveal b;
  /// Audio of the preferred side; decisive votes only.
  std::optional<std::string> download_ref;
};

void to_json(json& j, const Reveal& r);

struct GateStatus {
  bool open = false;
  double a_listened = 0.0;
  double b_listened = 0.0;
  double a_remaining = 0.0;
  double b_remaining = 0.0;
};

void to_json(json& j, const GateStatus& g);

/// One battle's mutable state. Owned by the Gateway; exposed for inspection.
class BattleState {
 public:
  explicit BattleState(BattleRecord record) : record_(std::move(record)) {}

  Phase phase() const { return phase_; }
  /// Throws kIllegalTransition for transitions outside the phase machine.
  void transition(Phase to);

  BattleRecord& record() { return record_; }
  const BattleRecord& record() const { return record_; }

 private:
  Phase phase_ = Phase::kCreated;
  BattleRecord record_;
};

class TimingLog;

class Gateway {
 public:
  /// `store` may be null (records are then kept in memory only).
  Gateway(GatewayConfig config, std::shared_ptr<gate::AnalyzerBackend> analyzer,
          std::vector<std::shared_ptr<endpoint::Endpoint>> endpoints, privacy::SaltConfig salt,
          std::shared_ptr<store::Store> store = nullptr, const Clock* clock = nullptr,
          std::unique_ptr<PairSampler> sampler = nullptr);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  const GatewayConfig& config() const { return config_; }
  const Clock& clock() const { return *clock_; }
  std::vector<endpoint::SystemDescriptor> registry() const;

  const std::string& consent_text() const { return config_.consent_text; }
  /// Digest a client must echo back to acknowledge the consent text.
  const std::string& consent_digest() const { return consent_digest_; }

  /// Throws kConsentRequired unless `ack_tos` equals consent_digest().
  SessionInfo create_session(const std::string& ack_tos, const std::string& frontend_version = "");

  /// Runs the full pipeline and returns only once both clips are stored.
  /// Throws kModerationRejected, kGateUnavailable, kNoOpponents,
  /// kGenerationFailed (details carry the failed battle uuid), kRateLimited.
  BlindBattle create_battle(const std::string& session_uuid, std::string_view prompt_text,
                            const privacy::RawIdentity& who);

  /// Audio for an opaque reference "audio/<battle>/<A|B>".
  std::vector<std::uint8_t> fetch_audio(const std::string& blind_ref) const;
  std::vector<std::uint8_t> fetch_audio(const std::string& battle_uuid, Side side) const;

  /// Appends a batch of events for one side. The batch must be time-ordered
  /// and must not precede stored events (kOrdering). Returns the stored count.
  std::size_t submit_listen_events(const std::string& battle_uuid, Side side,
                                   std::span<const ListenEvent> events);

  GateStatus gate_status(const std::string& battle_uuid, EpochSeconds now) const;
  bool vote_gate_open(const std::string& battle_uuid, EpochSeconds now) const;

  /// Throws kGateNotMet (details: remaining seconds per side) before the
  /// gate opens, kConflict on a second vote.
  Reveal submit_vote(const std::string& battle_uuid, Preference preference,
                     const privacy::RawIdentity& who, const std::string& session_uuid);

  /// Optional free text; persists the battle.
  void submit_feedback(const std::string& battle_uuid, std::optional<std::string> overall,
                       std::optional<std::string> a_feedback, std::optional<std::string> b_feedback);

  Phase phase(const std::string& battle_uuid) const;
  BattleRecord record(const std::string& battle_uuid) const;
  std::vector<BattleRecord> finalized_records() const;

  /// Persists a delivered, voted, or failed battle and releases its state.
  void finalize(const std::string& battle_uuid);
  /// Finalizes battles with no activity since `now - max_idle`.
  std::size_t finalize_idle(EpochSeconds now, double max_idle_seconds);
  std::size_t finalize_all();

 private:
  struct Entry;
  struct SideOutcome;

  std::shared_ptr<Entry> lookup(const std::string& battle_uuid) const;
  SideOutcome run_side(const endpoint::SystemDescriptor& system, endpoint::Endpoint& ep,
                       const endpoint::GenerateRequest& request, std::mutex* serial,
                       TimingLog& log);
  void persist_final(Entry& entry);
  void stage(const Entry& entry);
  static std::string blind_ref(const std::string& battle_uuid, Side side);

  GatewayConfig config_;
  std::shared_ptr<gate::AnalyzerBackend> analyzer_;
  std::vector<std::shared_ptr<endpoint::Endpoint>> endpoints_;
  privacy::SaltConfig salt_;
  std::shared_ptr<store::Store> store_;
  SystemClock system_clock_;
  const Clock* clock_;
  std::unique_ptr<PairSampler> sampler_;
  std::string consent_digest_;

  endpoint::HealthTracker health_;
  RateLimiter limiter_;
  std::vector<std::unique_ptr<std::mutex>> endpoint_locks_;

  std::mutex rng_mu_;
  std::mt19937_64 rng_;

  mutable std::shared_mutex mu_;
  std::map<std::string, SessionInfo> sessions_;
  std::map<std::string, std::shared_ptr<Entry>> battles_;
  mutable std::mutex finalized_mu_;
  std::vector<BattleRecord> finalized_;  // only when there is no store
};

}  // namespace musicduel::orchestrator
