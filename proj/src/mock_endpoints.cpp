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

#include "musicduel/mock_endpoints.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "musicduel/hashing.hpp"
#include "musicduel/wav.hpp"

namespace musicduel::endpoint {

namespace {

std::uint64_t request_hash(const std::string& tag, const GenerateRequest& r) {
  hashing::Sha256 h;
  h.update(tag);
  h.update(std::string_view("\x1f", 1));
  h.update(r.detailed.overall_prompt);
  h.update(r.detailed.instrumental ? "I" : "V");
  h.update(r.provisioned_lyrics.value_or(""));
  h.update(r.detailed.duration ? format_double(*r.detailed.duration) : "-");
  h.update(std::to_string(r.seed));
  auto d = h.finish();
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
  return v;
}

void sleep_for(Seconds s) {
  if (s.count() > 0) std::this_thread::sleep_for(s);
}

}  // namespace

MockEndpoint::MockEndpoint(MockOptions options, const Clock* clock)
    : options_(std::move(options)),
      clock_(clock != nullptr ? clock : &system_clock_),
      refuse_(options_.refuse_connections),
      rng_(options_.seed) {
  validate_descriptor(options_.descriptor);
  if (options_.sample_rate == 0 || options_.num_channels == 0) {
    throw Error(ErrorCode::kConfiguration, "mock endpoint: sample_rate and num_channels must be positive");
  }
}

HealthStatus MockEndpoint::health(Seconds budget) {
  probes_.fetch_add(1);
  if (refuse_.load()) return HealthStatus::unhealthy("connection refused");
  if (options_.health_latency > budget) {
    sleep_for(budget);
    return HealthStatus::unhealthy("timeout");
  }
  sleep_for(options_.health_latency);
  return HealthStatus::ok();
}

std::vector<std::uint8_t> MockEndpoint::render(const GenerateRequest& request, double* duration_out) const {
  const auto& d = options_.descriptor;
  double seconds = options_.default_duration;
  if (d.supports_duration && request.detailed.duration) seconds = *request.detailed.duration;
  seconds = std::clamp(seconds, d.min_duration, d.max_duration);

  const std::uint32_t rate = options_.sample_rate;
  const std::uint16_t channels = options_.num_channels;
  const auto frames = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<std::int16_t> samples(frames * channels);

  const std::uint64_t h = request_hash(d.key.system_tag, request);
  if (options_.waveform == Waveform::kTone) {
    const double freq = 220.0 + static_cast<double>(h % 440);
    for (std::size_t i = 0; i < frames; ++i) {
      double t = static_cast<double>(i) / rate;
      double v = 0.3 * std::sin(2.0 * std::numbers::pi * freq * t);
      auto s = static_cast<std::int16_t>(std::lround(v * 32767.0));
      for (std::uint16_t c = 0; c < channels; ++c) samples[i * channels + c] = s;
    }
  } else {
    std::uint64_t state = h | 1;
    for (auto& s : samples) {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      s = static_cast<std::int16_t>(static_cast<std::int64_t>(state % 19661) - 9830);
    }
  }
  if (duration_out != nullptr) *duration_out = static_cast<double>(frames) / rate;
  return wav::encode_pcm16(samples, rate, channels);
}

GenerateResponse MockEndpoint::generate(const GenerateRequest& request) {
  calls_.fetch_add(1);
  if (refuse_.load()) throw Error(ErrorCode::kUnavailable, "connection refused");
  check_request(options_.descriptor, request);

  GenerateResponse response;
  auto& m = response.metadata;
  m.system_key = options_.descriptor.key;
  m.system_version = options_.descriptor.version;
  m.system_time_queued = clock_->now();

  std::unique_lock<std::mutex> serial;
  if (options_.descriptor.max_concurrency == 1) serial = std::unique_lock(serial_mu_);
  m.system_time_started = clock_->now();

  {
    std::lock_guard lock(rng_mu_);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double draw = u(rng_);
    if (draw < options_.failure_rate && consecutive_failures_ < options_.max_consecutive_failures) {
      ++consecutive_failures_;
      failures_.fetch_add(1);
      throw Error(ErrorCode::kGenerationFailed, options_.descriptor.key.str() + ": injected failure");
    }
    consecutive_failures_ = 0;
  }

  if (options_.latency > request.deadline) {
    sleep_for(request.deadline);
    throw Error(ErrorCode::kTimeout, options_.descriptor.key.str() + ": deadline exceeded");
  }
  sleep_for(options_.latency);

  double seconds = 0.0;
  response.audio = render(request, &seconds);
  m.system_time_completed = std::max(clock_->now(), m.system_time_started);
  m.size_bytes = static_cast<std::int64_t>(response.audio.size());
  m.sample_rate = options_.sample_rate;
  m.num_channels = options_.num_channels;
  m.duration = seconds;
  m.checksum = hashing::digest128_hex(response.audio);
  if (!request.detailed.instrumental && options_.descriptor.supports_lyrics) {
    m.lyrics = request.provisioned_lyrics ? *request.provisioned_lyrics
                                          : "[Verse]\n" + request.detailed.overall_prompt + "\n[Chorus]\nla la la";
  }
  return response;
}

SystemDescriptor mock_descriptor(const std::string& tag, const std::string& provider) {
  SystemDescriptor d;
  d.key = SystemKey{tag, "initial"};
  d.display_name = tag;
  d.provider = provider;
  d.license = "Apache-2.0";
  d.training_data_info = "synthetic test signal; no training data";
  d.access = Access::kOpenWeights;
  d.version = "mock-1";
  return d;
}

std::shared_ptr<MockEndpoint> make_tone_endpoint(SystemDescriptor d, double default_duration,
                                                 std::uint64_t seed, const Clock* clock) {
  MockOptions o;
  o.descriptor = std::move(d);
  o.waveform = Waveform::kTone;
  o.default_duration = default_duration;
  o.seed = seed;
  return std::make_shared<MockEndpoint>(std::move(o), clock);
}

std::shared_ptr<MockEndpoint> make_noise_endpoint(SystemDescriptor d, double default_duration,
                                                  std::uint64_t seed, const Clock* clock) {
  MockOptions o;
  o.descriptor = std::move(d);
  o.waveform = Waveform::kNoise;
  o.default_duration = default_duration;
  o.seed = seed;
  return std::make_shared<MockEndpoint>(std::move(o), clock);
}

std::shared_ptr<MockEndpoint> make_slow_endpoint(SystemDescriptor d, Seconds latency,
                                                 double default_duration, const Clock* clock) {
  MockOptions o;
  o.descriptor = std::move(d);
  o.latency = latency;
  o.default_duration = default_duration;
  return std::make_shared<MockEndpoint>(std::move(o), clock);
}

std::shared_ptr<MockEndpoint> make_flaky_endpoint(SystemDescriptor d, double failure_rate,
                                                  std::uint64_t seed, int max_consecutive_failures,
                                                  double default_duration, const Clock* clock) {
  MockOptions o;
  o.descriptor = std::move(d);
  o.failure_rate = failure_rate;
  o.seed = seed;
  o.max_consecutive_failures = max_consecutive_failures;
  o.default_duration = default_duration;
  return std::make_shared<MockEndpoint>(std::move(o), clock);
}

MockOptions mock_options_from_json(const json& j) {
  MockOptions o;
  if (!j.is_object() || !j.contains("descriptor")) {
    throw Error(ErrorCode::kConfiguration, "mock options need a \"descriptor\" object");
  }
  try {
    o.descriptor = j.at("descriptor").get<SystemDescriptor>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("bad mock descriptor: ") + e.what());
  }
  std::string kind = j.value("kind", std::string("tone"));
  if (kind == "tone" || kind == "slow" || kind == "flaky") o.waveform = Waveform::kTone;
  else if (kind == "noise") o.waveform = Waveform::kNoise;
  else throw Error(ErrorCode::kConfiguration, "unknown mock kind '" + kind + "'");
  o.sample_rate = j.value("sample_rate", 8000u);
  o.num_channels = j.value("num_channels", static_cast<std::uint16_t>(1));
  o.default_duration = j.value("default_duration", 10.0);
  o.latency = Seconds(j.value("latency", 0.0));
  o.health_latency = Seconds(j.value("health_latency", 0.0));
  o.failure_rate = j.value("failure_rate", 0.0);
  o.max_consecutive_failures = j.value("max_consecutive_failures", 1);
  o.refuse_connections = j.value("refuse_connections", false);
  o.seed = j.value("seed", std::uint64_t{0});
  return o;
}

}  // namespace musicduel::endpoint
