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

// Append-only battle store.
//
// Layout under the root directory:
//   records/<YYYY-MM-DD>.jsonl   one finalized BattleRecord per line
//   audio/<checksum>.wav         content-addressed payloads
//   staging/<uuid>.json          in-flight battles (mutable, not exported)
//   registry.json                system descriptors known to the gateway
//   store.json                   store metadata (schema and salt versions)
//
// Audio is made durable before the record that references it. Records are
// never rewritten or removed.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musicduel/domain.hpp"
#include "musicduel/endpoint.hpp"

namespace musicduel::store {

inline constexpr int kSchemaVersion = 1;

/// "audio/<checksum>.wav", the storage reference kept in records.
std::string audio_ref(const std::string& checksum);
/// Inverse of audio_ref; nullopt for anything else.
std::optional<std::string> checksum_from_ref(std::string_view ref);

class Store {
 public:
  /// Opens (creating if needed) a store rooted at `root` and indexes it.
  explicit Store(std::filesystem::path root, const Clock* clock = nullptr);

  const std::filesystem::path& root() const { return root_; }

  /// Stores the payload under its checksum; idempotent. Returns the checksum.
  std::string put_audio(std::span<const std::uint8_t> bytes);
  /// Throws kNotFound, or kStorage if the payload fails its checksum.
  std::vector<std::uint8_t> read_audio(const std::string& checksum) const;
  bool has_audio(const std::string& checksum) const;
  std::size_t audio_count() const;

  /// Durably appends a finalized record. Throws kConflict on a duplicate
  /// uuid, kInvalidArgument (violations in details) if the record fails
  /// validation or still carries raw identifiers, kStorage on I/O failure.
  /// Returns the record's position in append order.
  std::size_t append_battle(const BattleRecord& record, const ValidationOptions& options = {});

  std::optional<BattleRecord> find(const std::string& uuid) const;
  /// All records in append order, re-read from disk.
  std::vector<BattleRecord> records() const;
  std::size_t size() const;

  void stage(const BattleRecord& record);
  void unstage(const std::string& uuid);
  std::vector<BattleRecord> staged() const;

  void save_registry(std::span<const endpoint::SystemDescriptor> registry);
  std::optional<std::vector<endpoint::SystemDescriptor>> load_registry() const;

  void set_salt_version(const std::string& version);
  std::optional<std::string> salt_version() const;

 private:
  std::filesystem::path shard_for(EpochSeconds t) const;
  void load_index();

  std::filesystem::path root_;
  SystemClock system_clock_;
  const Clock* clock_;
  mutable std::mutex mu_;
  std::map<std::string, std::size_t> index_;  // uuid -> position
  std::size_t count_ = 0;
};

/// Writes `bytes` to `path` via a temporary file, fsync, and rename.
void write_file_durable(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_durable(const std::filesystem::path& path, std::string_view text);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace musicduel::store
