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

#include <optional>
#include <string>
#include <string_view>

#include "musicduel/domain.hpp"

namespace musicduel::privacy {

inline constexpr std::size_t kMinSaltBytes = 16;
inline constexpr const char* kSaltEnvVar = "MUSICDUEL_SALT";
inline constexpr const char* kSaltVersionEnvVar = "MUSICDUEL_SALT_VERSION";

/// Server-side secret. Deliberately has no serialization.
class SaltConfig {
 public:
  /// Throws kConfiguration if `salt` is shorter than kMinSaltBytes.
  SaltConfig(std::string salt, std::string version);

  /// Reads MUSICDUEL_SALT / MUSICDUEL_SALT_VERSION. Throws kConfiguration if unset.
  static SaltConfig from_env();
  /// Fresh random salt; for development and tests.
  static SaltConfig generate(std::string version);

  const std::string& salt() const { return salt_; }
  const std::string& version() const { return version_; }

 private:
  std::string salt_;
  std::string version_;
};

/// hex(first 128 bits of SHA-256(salt || raw)). Throws kInvalidArgument on
/// an empty identifier.
std::string pseudonymize(std::string_view raw_identifier, const SaltConfig& cfg);

/// Identifiers as they arrive at the service boundary.
struct RawIdentity {
  std::string ip;
  std::optional<std::string> fingerprint;
};

/// Pseudonymized identity with the raw fields already cleared.
UserIdentity identify(const RawIdentity& raw, const SaltConfig& cfg);

UserIdentity scrub(const UserIdentity& identity, const SaltConfig& cfg);

/// Nulls every raw identifier and fills the salted digests. Idempotent.
BattleRecord scrub(const BattleRecord& record, const SaltConfig& cfg);

bool is_scrubbed(const BattleRecord& record);

}  // namespace musicduel::privacy
