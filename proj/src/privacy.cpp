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

#include "musicduel/privacy.hpp"

#include <cstdlib>
#include <random>

#include "musicduel/hashing.hpp"

namespace musicduel::privacy {

SaltConfig::SaltConfig(std::string salt, std::string version)
    : salt_(std::move(salt)), version_(std::move(version)) {
  if (salt_.size() < kMinSaltBytes) {
    throw Error(ErrorCode::kConfiguration,
                "salt must be at least " + std::to_string(kMinSaltBytes) + " octets");
  }
  if (version_.empty()) throw Error(ErrorCode::kConfiguration, "salt version must be non-empty");
}

SaltConfig SaltConfig::from_env() {
  const char* salt = std::getenv(kSaltEnvVar);
  if (salt == nullptr) {
    throw Error(ErrorCode::kConfiguration, std::string(kSaltEnvVar) + " is not set");
  }
  const char* version = std::getenv(kSaltVersionEnvVar);
  return SaltConfig(salt, version != nullptr ? version : "v1");
}

SaltConfig SaltConfig::generate(std::string version) {
  std::random_device rd;
  std::string salt(32, '\0');
  for (auto& ch : salt) ch = static_cast<char>(rd() & 0xff);
  return SaltConfig(std::move(salt), std::move(version));
}

std::string pseudonymize(std::string_view raw_identifier, const SaltConfig& cfg) {
  if (raw_identifier.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "pseudonymize: empty identifier");
  }
  hashing::Sha256 h;
  h.update(cfg.salt());
  h.update(raw_identifier);
  auto digest = h.finish();
  return to_hex(std::span<const std::uint8_t>(digest.data(), 16));
}

UserIdentity identify(const RawIdentity& raw, const SaltConfig& cfg) {
  UserIdentity out;
  out.salted_ip = pseudonymize(raw.ip, cfg);
  if (raw.fingerprint && !raw.fingerprint->empty()) {
    out.salted_fingerprint = pseudonymize(*raw.fingerprint, cfg);
  }
  return out;
}

UserIdentity scrub(const UserIdentity& identity, const SaltConfig& cfg) {
  UserIdentity out = identity;
  if (out.ip) {
    if (!out.ip->empty()) out.salted_ip = pseudonymize(*out.ip, cfg);
    out.ip.reset();
  }
  if (out.fingerprint) {
    if (!out.fingerprint->empty()) out.salted_fingerprint = pseudonymize(*out.fingerprint, cfg);
    out.fingerprint.reset();
  }
  return out;
}

BattleRecord scrub(const BattleRecord& record, const SaltConfig& cfg) {
  BattleRecord out = record;
  out.prompt_user = scrub(record.prompt_user, cfg);
  if (out.vote_user) out.vote_user = scrub(*record.vote_user, cfg);
  return out;
}

bool is_scrubbed(const BattleRecord& record) {
  auto clean = [](const UserIdentity& u) {
    return !u.ip && !u.fingerprint && is_lower_hex(u.salted_ip, 32) &&
           (!u.salted_fingerprint || is_lower_hex(*u.salted_fingerprint, 32));
  };
  return clean(record.prompt_user) && (!record.vote_user || clean(*record.vote_user));
}

}  // namespace musicduel::privacy
