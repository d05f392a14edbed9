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

// Uniform generation-endpoint protocol: capability descriptors, requests,
// responses, health probing, and capability-based routing.

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musicduel/domain.hpp"

namespace musicduel::endpoint {

using Seconds = std::chrono::duration<double>;

inline constexpr double kDurationTolerance = 0.25;
inline constexpr Seconds kDefaultHealthBudget{10.0};
inline constexpr Seconds kDefaultGenerateDeadline{120.0};
inline constexpr Seconds kDefaultCooldown{60.0};

enum class Access { kOpenWeights, kApi };

std::string_view to_string(Access access);
Access access_from_string(std::string_view s);

struct SystemDescriptor {
  SystemKey key;
  std::string display_name;
  std::string provider;
  std::string license;
  std::string training_data_info;
  Access access = Access::kOpenWeights;
  bool supports_lyrics = false;
  bool requires_explicit_lyrics = false;
  bool supports_duration = false;
  double min_duration = 1.0;
  double max_duration = kMaxDurationSeconds;
  bool audio_releasable = true;
  /// 0 = tolerates concurrent requests; 1 = the gateway serializes calls.
  int max_concurrency = 0;
  std::string version;

  bool operator==(const SystemDescriptor&) const = default;
};

void to_json(json& j, const SystemDescriptor& d);
void from_json(const json& j, SystemDescriptor& d);

/// Throws Error(kConfiguration) when descriptor invariants fail.
void validate_descriptor(const SystemDescriptor& d);

struct GenerateRequest {
  DetailedPrompt detailed;
  std::optional<std::string> provisioned_lyrics;
  Seconds deadline = kDefaultGenerateDeadline;
  std::uint64_t seed = 0;
};

void to_json(json& j, const GenerateRequest& r);
void from_json(const json& j, GenerateRequest& r);

struct GenerateResponse {
  std::vector<std::uint8_t> audio;
  GenerationMetadata metadata;  // system-side fields filled by the endpoint
};

struct HealthStatus {
  bool healthy = true;
  std::string reason;

  static HealthStatus ok() { return {true, {}}; }
  static HealthStatus unhealthy(std::string why) { return {false, std::move(why)}; }
};

class Endpoint {
 public:
  virtual ~Endpoint() = default;

  virtual const SystemDescriptor& capabilities() const = 0;
  /// Bounded-time probe; exceeding `budget` reports unhealthy("timeout").
  virtual HealthStatus health(Seconds budget) = 0;
  /// Throws Error: kTimeout / kUnavailable / kGenerationFailed (retryable),
  /// kCapabilityMismatch (permanent).
  virtual GenerateResponse generate(const GenerateRequest& request) = 0;
};

/// True when the system can serve the prompt. Vocal prompts need lyric
/// support. With an explicit duration, duration-controlled systems need it
/// inside [min, max]; others need [min, max] to reach within ±tolerance of it.
bool is_compatible(const DetailedPrompt& detailed, const SystemDescriptor& system,
                   double tolerance = kDurationTolerance);

/// Subset of `registry` able to serve `detailed`, in registry order.
std::vector<SystemDescriptor> compatible_systems(const DetailedPrompt& detailed,
                                                 std::span<const SystemDescriptor> registry,
                                                 double tolerance = kDurationTolerance);

/// Throws Error(kCapabilityMismatch) when `request` violates the contract of `system`.
void check_request(const SystemDescriptor& system, const GenerateRequest& request);

/// Checks the response against its payload: checksum, size, and (for WAV
/// payloads) the declared duration. Throws Error(kGenerationFailed).
void check_response(const GenerateResponse& response);

/// Cool-down bookkeeping for endpoints that failed a health probe.
class HealthTracker {
 public:
  explicit HealthTracker(Seconds cooldown = kDefaultCooldown) : cooldown_(cooldown) {}

  void mark_unhealthy(const SystemKey& key, EpochSeconds now);
  void mark_healthy(const SystemKey& key);
  bool available(const SystemKey& key, EpochSeconds now) const;

 private:
  Seconds cooldown_;
  mutable std::mutex mu_;
  std::map<SystemKey, EpochSeconds> unhealthy_until_;
};

}  // namespace musicduel::endpoint
