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

// Monthly public releases. Layout of <out_root>/<YYYY-MM>/:
//   battles-NNNNN.jsonl    voted battles, sorted by (preference_time, uuid)
//   incomplete.jsonl       unvoted or failed battles (only if any)
//   audio/<checksum>.wav   releasable audio referenced by the records
//   manifest.json          counts, salt version, exclusions, file digests
//
// Exports are deterministic: the same store and period give byte-identical
// output.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "musicduel/domain.hpp"
#include "musicduel/endpoint.hpp"

namespace musicduel::store {
class Store;
}

namespace musicduel::release {

inline constexpr int kReleaseSchemaVersion = 1;

struct ExcludedAudio {
  std::string system_key;
  std::string reason;
  bool operator==(const ExcludedAudio&) const = default;
};

struct ReleaseManifest {
  std::string period;
  std::size_t record_count = 0;
  std::size_t incomplete_count = 0;
  std::string salt_version;
  std::vector<ExcludedAudio> excluded_audio;
  int schema_version = kReleaseSchemaVersion;
  std::map<std::string, std::string> files;  // relative path -> sha256 hex
  bool operator==(const ReleaseManifest&) const = default;
};

void to_json(json& j, const ReleaseManifest& m);
void from_json(const json& j, ReleaseManifest& m);

struct ExportOptions {
  std::size_t shard_size = 1000;
  /// Written to the manifest; defaults to the store's recorded salt version.
  std::string salt_version;
};

/// UTC bounds [start, end) of a "YYYY-MM" period. Throws kInvalidArgument.
std::pair<EpochSeconds, EpochSeconds> period_bounds(const std::string& period);

/// Throws kPeriodOpen if the period has not ended at `now`, kStorage if a
/// record still carries raw identifiers or referenced audio is missing.
ReleaseManifest export_release(const std::string& period, const store::Store& store,
                               std::span<const endpoint::SystemDescriptor> registry,
                               const std::filesystem::path& out_root, EpochSeconds now,
                               const ExportOptions& options = {});

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> problems;
  std::size_t records_checked = 0;
};

/// Re-checks a release directory: digests, record counts, uniqueness,
/// scrubbing, period membership, and audio presence.
VerifyReport verify_release(const std::filesystem::path& release_dir);

}  // namespace musicduel::release
