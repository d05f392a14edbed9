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

// In-process mock generation systems: tone, noise, slow, and flaky.
// Payloads are deterministic given (system_tag, request, seed).

#include <atomic>
#include <climits>
#include <memory>
#include <mutex>
#include <random>

#include "musicduel/endpoint.hpp"

namespace musicduel::endpoint {

enum class Waveform { kTone, kNoise };

struct MockOptions {
  SystemDescriptor descriptor;
  Waveform waveform = Waveform::kTone;
  std::uint32_t sample_rate = 8000;
  std::uint16_t num_channels = 1;
  /// Output length when the request carries no duration or the system has
  /// no duration control. Clamped to [min_duration, max_duration].
  double default_duration = 10.0;
  Seconds latency{0.0};
  Seconds health_latency{0.0};
  /// Probability of an injected retryable failure per generate call.
  double failure_rate = 0.0;
  /// Cap on back-to-back injected failures (INT_MAX = no cap).
  int max_consecutive_failures = 1;
  bool refuse_connections = false;
  std::uint64_t seed = 0;
};

class MockEndpoint final : public Endpoint {
 public:
  /// `clock` must outlive the endpoint; nullptr uses the system clock.
  explicit MockEndpoint(MockOptions options, const Clock* clock = nullptr);

  const SystemDescriptor& capabilities() const override { return options_.descriptor; }
  HealthStatus health(Seconds budget) override;
  GenerateResponse generate(const GenerateRequest& request) override;

  void set_refuse_connections(bool refuse) { refuse_.store(refuse); }
  std::int64_t generate_calls() const { return calls_.load(); }
  std::int64_t injected_failures() const { return failures_.load(); }
  std::int64_t health_probes() const { return probes_.load(); }

  /// The payload `generate` would return, without timing or failure injection.
  std::vector<std::uint8_t> render(const GenerateRequest& request, double* duration_out = nullptr) const;

 private:
  MockOptions options_;
  SystemClock system_clock_;
  const Clock* clock_;
  std::atomic<bool> refuse_;
  std::atomic<std::int64_t> calls_{0};
  std::atomic<std::int64_t> failures_{0};
  std::atomic<std::int64_t> probes_{0};
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
  int consecutive_failures_ = 0;
  std::mutex serial_mu_;  // used when max_concurrency == 1
};

/// Descriptor helpers for the four standard mocks.
SystemDescriptor mock_descriptor(const std::string& tag, const std::string& provider);

std::shared_ptr<MockEndpoint> make_tone_endpoint(SystemDescriptor d, double default_duration = 10.0,
                                                 std::uint64_t seed = 0, const Clock* clock = nullptr);
std::shared_ptr<MockEndpoint> make_noise_endpoint(SystemDescriptor d, double default_duration = 10.0,
                                                  std::uint64_t seed = 0, const Clock* clock = nullptr);
std::shared_ptr<MockEndpoint> make_slow_endpoint(SystemDescriptor d, Seconds latency,
                                                 double default_duration = 10.0,
                                                 const Clock* clock = nullptr);
std::shared_ptr<MockEndpoint> make_flaky_endpoint(SystemDescriptor d, double failure_rate,
                                                  std::uint64_t seed = 0,
                                                  int max_consecutive_failures = 1,
                                                  double default_duration = 10.0,
                                                  const Clock* clock = nullptr);

MockOptions mock_options_from_json(const json& j);

}  // namespace musicduel::endpoint
