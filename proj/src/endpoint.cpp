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

#include "musicduel/endpoint.hpp"

#include <cmath>

#include "musicduel/hashing.hpp"
#include "musicduel/wav.hpp"

namespace musicduel::endpoint {

std::string_view to_string(Access access) {
  return access == Access::kOpenWeights ? "OPEN_WEIGHTS" : "API";
}

Access access_from_string(std::string_view s) {
  if (s == "OPEN_WEIGHTS") return Access::kOpenWeights;
  if (s == "API") return Access::kApi;
  throw Error(ErrorCode::kInvalidArgument, "unknown access kind '" + std::string(s) + "'");
}

void to_json(json& j, const SystemDescriptor& d) {
  j = json{{"system_key", d.key},
           {"display_name", d.display_name},
           {"provider", d.provider},
           {"license", d.license},
           {"training_data_info", d.training_data_info},
           {"access", to_string(d.access)},
           {"supports_lyrics", d.supports_lyrics},
           {"requires_explicit_lyrics", d.requires_explicit_lyrics},
           {"supports_duration", d.supports_duration},
           {"min_duration", d.min_duration},
           {"max_duration", d.max_duration},
           {"audio_releasable", d.audio_releasable},
           {"max_concurrency", d.max_concurrency},
           {"version", d.version}};
}

void from_json(const json& j, SystemDescriptor& d) {
  d.key = j.at("system_key").get<SystemKey>();
  d.display_name = j.value("display_name", d.key.system_tag);
  d.provider = j.value("provider", std::string());
  d.license = j.value("license", std::string());
  d.training_data_info = j.value("training_data_info", std::string());
  d.access = access_from_string(j.value("access", std::string("OPEN_WEIGHTS")));
  d.supports_lyrics = j.value("supports_lyrics", false);
  d.requires_explicit_lyrics = j.value("requires_explicit_lyrics", false);
  d.supports_duration = j.value("supports_duration", false);
  d.min_duration = j.value("min_duration", 1.0);
  d.max_duration = j.value("max_duration", kMaxDurationSeconds);
  d.audio_releasable = j.value("audio_releasable", true);
  d.max_concurrency = j.value("max_concurrency", 0);
  d.version = j.value("version", std::string());
}

void validate_descriptor(const SystemDescriptor& d) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kConfiguration, "system " + d.key.str() + ": " + why);
  };
  if (d.key.system_tag.empty() || d.key.variant_tag.empty()) fail("tag and variant must be non-empty");
  if (d.key.system_tag.find(':') != std::string::npos || d.key.variant_tag.find(':') != std::string::npos) {
    fail("tags may not contain ':'");
  }
  if (!(d.min_duration > 0.0)) fail("min_duration must be positive");
  if (d.min_duration > d.max_duration) fail("min_duration exceeds max_duration");
  if (d.requires_explicit_lyrics && !d.supports_lyrics) fail("requires_explicit_lyrics without supports_lyrics");
  if (d.max_concurrency < 0) fail("max_concurrency must be >= 0");
}

void to_json(json& j, const GenerateRequest& r) {
  j = json{{"detailed", r.detailed},
           {"provisioned_lyrics", r.provisioned_lyrics ? json(*r.provisioned_lyrics) : json(nullptr)},
           {"deadline", r.deadline.count()},
           {"seed", r.seed}};
}

void from_json(const json& j, GenerateRequest& r) {
  r.detailed = j.at("detailed").get<DetailedPrompt>();
  r.provisioned_lyrics.reset();
  if (auto it = j.find("provisioned_lyrics"); it != j.end() && !it->is_null()) {
    r.provisioned_lyrics = it->get<std::string>();
  }
  r.deadline = Seconds(j.value("deadline", kDefaultGenerateDeadline.count()));
  r.seed = j.value("seed", std::uint64_t{0});
}

bool is_compatible(const DetailedPrompt& detailed, const SystemDescriptor& system, double tolerance) {
  if (!detailed.instrumental && !system.supports_lyrics) return false;
  if (detailed.duration) {
    const double want = *detailed.duration;
    if (system.supports_duration) {
      if (want < system.min_duration || want > system.max_duration) return false;
    } else {
      const double lo = want * (1.0 - tolerance);
      const double hi = want * (1.0 + tolerance);
      if (system.max_duration < lo || system.min_duration > hi) return false;
    }
  }
  return true;
}

std::vector<SystemDescriptor> compatible_systems(const DetailedPrompt& detailed,
                                                 std::span<const SystemDescriptor> registry,
                                                 double tolerance) {
  std::vector<SystemDescriptor> out;
  for (const auto& d : registry) {
    if (is_compatible(detailed, d, tolerance)) out.push_back(d);
  }
  return out;
}

void check_request(const SystemDescriptor& system, const GenerateRequest& request) {
  auto mismatch = [&](const std::string& why) {
    throw Error(ErrorCode::kCapabilityMismatch, system.key.str() + ": " + why);
  };
  const bool vocal = !request.detailed.instrumental;
  if (vocal && !system.supports_lyrics) mismatch("vocal request to an instrumental-only system");
  const bool wants_lyrics = system.requires_explicit_lyrics && vocal;
  if (wants_lyrics && !request.provisioned_lyrics) mismatch("explicit lyrics required but not provided");
  if (!wants_lyrics && request.provisioned_lyrics) mismatch("lyrics provided to a system that does not take them");
  if (!is_compatible(request.detailed, system)) mismatch("requested duration outside capability");
}

void check_response(const GenerateResponse& response) {
  const auto& m = response.metadata;
  auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::kGenerationFailed, m.system_key.str() + ": invalid response: " + why);
  };
  if (hashing::digest128_hex(response.audio) != m.checksum) bad("checksum does not match payload");
  if (static_cast<std::int64_t>(response.audio.size()) != m.size_bytes) bad("size_bytes does not match payload");
  if (!(m.system_time_queued <= m.system_time_started && m.system_time_started <= m.system_time_completed)) {
    bad("system timestamps not monotone");
  }
  if (!(m.duration > 0.0) || m.sample_rate <= 0 || m.num_channels <= 0) bad("non-positive audio properties");
  if (auto info = wav::parse_header(response.audio)) {
    if (info->sample_rate != m.sample_rate || info->num_channels != m.num_channels) {
      bad("declared format differs from payload header");
    }
    if (std::abs(info->duration() - m.duration) > 1e-3) bad("declared duration differs from payload header");
  }
}

void HealthTracker::mark_unhealthy(const SystemKey& key, EpochSeconds now) {
  std::lock_guard lock(mu_);
  unhealthy_until_[key] = now + cooldown_.count();
}

void HealthTracker::mark_healthy(const SystemKey& key) {
  std::lock_guard lock(mu_);
  unhealthy_until_.erase(key);
}

bool HealthTracker::available(const SystemKey& key, EpochSeconds now) const {
  std::lock_guard lock(mu_);
  auto it = unhealthy_until_.find(key);
  return it == unhealthy_until_.end() || now >= it->second;
}

}  // namespace musicduel::endpoint
