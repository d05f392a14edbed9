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

#include "musicduel/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "musicduel/hashing.hpp"
#include "musicduel/privacy.hpp"

namespace musicduel::store {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::kStorage, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const void* data, std::size_t size, const fs::path& path) {
  const auto* p = static_cast<const char*>(data);
  while (size > 0) {
    ssize_t n = ::write(fd, p, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("write", path);
    }
    p += n;
    size -= static_cast<std::size_t>(n);
  }
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

void append_line_durable(const fs::path& path, const std::string& line) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) io_error("open", path);
  try {
    write_all(fd, line.data(), line.size(), path);
    write_all(fd, "\n", 1, path);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_error("fsync", path);
  }
  ::close(fd);
}

std::vector<fs::path> shard_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("open", path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) fn(line);
  }
}

json read_json_file(const fs::path& path) {
  auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kStorage, "corrupt " + path.string() + ": " + e.what());
  }
}

}  // namespace

void write_file_durable(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) io_error("open", tmp);
  try {
    write_all(fd, bytes.data(), bytes.size(), tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_error("fsync", tmp);
  }
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kStorage, "rename " + tmp.string() + ": " + ec.message());
  fsync_dir(path.parent_path());
}

void write_file_durable(const fs::path& path, std::string_view text) {
  write_file_durable(path, std::span<const std::uint8_t>(
                               reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string audio_ref(const std::string& checksum) { return "audio/" + checksum + ".wav"; }

std::optional<std::string> checksum_from_ref(std::string_view ref) {
  constexpr std::string_view kPrefix = "audio/";
  constexpr std::string_view kSuffix = ".wav";
  if (ref.size() != kPrefix.size() + 32 + kSuffix.size()) return std::nullopt;
  if (ref.substr(0, kPrefix.size()) != kPrefix || ref.substr(ref.size() - kSuffix.size()) != kSuffix) {
    return std::nullopt;
  }
  std::string checksum(ref.substr(kPrefix.size(), 32));
  if (!is_lower_hex(checksum, 32)) return std::nullopt;
  return checksum;
}

Store::Store(fs::path root, const Clock* clock)
    : root_(std::move(root)), clock_(clock != nullptr ? clock : &system_clock_) {
  std::error_code ec;
  for (const char* sub : {"records", "audio", "staging"}) {
    fs::create_directories(root_ / sub, ec);
    if (ec) throw Error(ErrorCode::kStorage, "cannot create " + (root_ / sub).string() + ": " + ec.message());
  }
  if (!fs::exists(root_ / "store.json")) {
    write_file_durable(root_ / "store.json", json{{"schema_version", kSchemaVersion}}.dump(2));
  }
  load_index();
}

void Store::load_index() {
  index_.clear();
  count_ = 0;
  for (const auto& shard : shard_files(root_ / "records")) {
    for_each_line(shard, [&](const std::string& line) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kStorage, "corrupt record in " + shard.string() + ": " + e.what());
      }
      index_[j.at("uuid").get<std::string>()] = count_++;
    });
  }
}

fs::path Store::shard_for(EpochSeconds t) const { return root_ / "records" / (day_of(t) + ".jsonl"); }

std::string Store::put_audio(std::span<const std::uint8_t> bytes) {
  std::string checksum = hashing::digest128_hex(bytes);
  fs::path path = root_ / audio_ref(checksum);
  std::lock_guard lock(mu_);
  if (!fs::exists(path)) write_file_durable(path, bytes);
  return checksum;
}

std::vector<std::uint8_t> Store::read_audio(const std::string& checksum) const {
  if (!is_lower_hex(checksum, 32)) throw Error(ErrorCode::kNotFound, "bad checksum '" + checksum + "'");
  auto bytes = read_file(root_ / audio_ref(checksum));
  if (hashing::digest128_hex(bytes) != checksum) {
    throw Error(ErrorCode::kStorage, "audio " + checksum + " fails its checksum");
  }
  return bytes;
}

bool Store::has_audio(const std::string& checksum) const {
  return is_lower_hex(checksum, 32) && fs::exists(root_ / audio_ref(checksum));
}

std::size_t Store::audio_count() const {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(root_ / "audio")) {
    if (entry.path().extension() == ".wav") ++n;
  }
  return n;
}

std::size_t Store::append_battle(const BattleRecord& record, const ValidationOptions& options) {
  if (!privacy::is_scrubbed(record)) {
    throw Error(ErrorCode::kInvalidArgument, "record " + record.uuid + " carries raw identifiers");
  }
  auto violations = validate_battle(record, options);
  if (!violations.empty()) {
    json details = json::array();
    for (const auto& v : violations) details.push_back({{"field", v.field}, {"message", v.message}});
    throw Error(ErrorCode::kInvalidArgument,
                "record " + record.uuid + " fails validation: " + violations.front().field + ": " +
                    violations.front().message,
                details);
  }
  for (const auto* meta : {&record.a_metadata, &record.b_metadata}) {
    if (*meta && !has_audio((*meta)->checksum)) {
      throw Error(ErrorCode::kStorage, "record " + record.uuid + " references missing audio " +
                                           (*meta)->checksum);
    }
  }

  std::string line = serialize_battle(record);
  std::lock_guard lock(mu_);
  if (index_.count(record.uuid)) {
    throw Error(ErrorCode::kConflict, "duplicate battle uuid " + record.uuid);
  }
  append_line_durable(shard_for(clock_->now()), line);
  std::size_t position = count_++;
  index_[record.uuid] = position;
  return position;
}

std::optional<BattleRecord> Store::find(const std::string& uuid) const {
  {
    std::lock_guard lock(mu_);
    if (!index_.count(uuid)) return std::nullopt;
  }
  for (auto& r : records()) {
    if (r.uuid == uuid) return r;
  }
  return std::nullopt;
}

std::vector<BattleRecord> Store::records() const {
  std::lock_guard lock(mu_);
  std::vector<BattleRecord> out;
  for (const auto& shard : shard_files(root_ / "records")) {
    for_each_line(shard, [&](const std::string& line) { out.push_back(parse_battle(std::string_view(line))); });
  }
  return out;
}

std::size_t Store::size() const {
  std::lock_guard lock(mu_);
  return count_;
}

void Store::stage(const BattleRecord& record) {
  if (!privacy::is_scrubbed(record)) {
    throw Error(ErrorCode::kInvalidArgument, "record " + record.uuid + " carries raw identifiers");
  }
  write_file_durable(root_ / "staging" / (record.uuid + ".json"), serialize_battle(record));
}

void Store::unstage(const std::string& uuid) {
  std::error_code ec;
  fs::remove(root_ / "staging" / (uuid + ".json"), ec);
}

std::vector<BattleRecord> Store::staged() const {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root_ / "staging")) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<BattleRecord> out;
  for (const auto& f : files) out.push_back(parse_battle(read_json_file(f)));
  return out;
}

void Store::save_registry(std::span<const endpoint::SystemDescriptor> registry) {
  json j = json::array();
  for (const auto& d : registry) j.push_back(d);
  std::lock_guard lock(mu_);
  write_file_durable(root_ / "registry.json", json{{"systems", j}}.dump(2));
}

std::optional<std::vector<endpoint::SystemDescriptor>> Store::load_registry() const {
  fs::path path = root_ / "registry.json";
  if (!fs::exists(path)) return std::nullopt;
  json j = read_json_file(path);
  std::vector<endpoint::SystemDescriptor> out;
  for (const auto& d : j.at("systems")) out.push_back(d.get<endpoint::SystemDescriptor>());
  return out;
}

void Store::set_salt_version(const std::string& version) {
  std::lock_guard lock(mu_);
  json meta = read_json_file(root_ / "store.json");
  meta["salt_version"] = version;
  write_file_durable(root_ / "store.json", meta.dump(2));
}

std::optional<std::string> Store::salt_version() const {
  std::lock_guard lock(mu_);
  json meta = read_json_file(root_ / "store.json");
  if (!meta.contains("salt_version")) return std::nullopt;
  return meta["salt_version"].get<std::string>();
}

}  // namespace musicduel::store
