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

#include "musicduel/release.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <set>

#include "musicduel/hashing.hpp"
#include "musicduel/privacy.hpp"
#include "musicduel/store.hpp"

namespace musicduel::release {

namespace fs = std::filesystem;

void to_json(json& j, const ReleaseManifest& m) {
  json excluded = json::array();
  for (const auto& e : m.excluded_audio) excluded.push_back({{"system_key", e.system_key}, {"reason", e.reason}});
  j = json{{"period", m.period},
           {"record_count", m.record_count},
           {"incomplete_count", m.incomplete_count},
           {"salt_version", m.salt_version},
           {"excluded_audio", excluded},
           {"schema_version", m.schema_version},
           {"files", m.files}};
}

void from_json(const json& j, ReleaseManifest& m) {
  m.period = j.at("period").get<std::string>();
  m.record_count = j.at("record_count").get<std::size_t>();
  m.incomplete_count = j.at("incomplete_count").get<std::size_t>();
  m.salt_version = j.at("salt_version").get<std::string>();
  m.excluded_audio.clear();
  for (const auto& e : j.at("excluded_audio")) {
    m.excluded_audio.push_back({e.at("system_key").get<std::string>(), e.at("reason").get<std::string>()});
  }
  m.schema_version = j.at("schema_version").get<int>();
  m.files = j.at("files").get<std::map<std::string, std::string>>();
}

std::pair<EpochSeconds, EpochSeconds> period_bounds(const std::string& period) {
  int year = 0;
  int month = 0;
  char tail = 0;
  if (period.size() != 7 || std::sscanf(period.c_str(), "%4d-%2d%c", &year, &month, &tail) != 2 ||
      month < 1 || month > 12 || year < 1970) {
    throw Error(ErrorCode::kInvalidArgument, "period must look like YYYY-MM, got '" + period + "'");
  }
  auto start_of = [](int y, int m) {
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = m - 1;
    tm.tm_mday = 1;
    return static_cast<EpochSeconds>(timegm(&tm));
  };
  EpochSeconds start = start_of(year, month);
  EpochSeconds end = month == 12 ? start_of(year + 1, 1) : start_of(year, month + 1);
  return {start, end};
}

namespace {

std::string file_digest(const fs::path& path) {
  auto bytes = store::read_file(path);
  return to_hex(hashing::sha256(std::span<const std::uint8_t>(bytes)));
}

EpochSeconds placement_time(const BattleRecord& r) {
  if (r.vote && !r.failure) return r.vote->preference_time;
  if (!r.timings.empty()) return r.timings.front().time;
  if (!r.prompt_session.new_battle_times.empty()) return r.prompt_session.new_battle_times.back();
  return r.prompt_session.create_time;
}

bool is_complete(const BattleRecord& r) { return r.vote.has_value() && !r.failure; }

std::string jsonl(const std::vector<BattleRecord>& records, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    out += serialize_battle(records[i]);
    out += '\n';
  }
  return out;
}

std::string shard_name(std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "battles-%05zu.jsonl", index);
  return buf;
}

}  // namespace

ReleaseManifest export_release(const std::string& period, const store::Store& store,
                               std::span<const endpoint::SystemDescriptor> registry, const fs::path& out_root,
                               EpochSeconds now, const ExportOptions& options) {
  auto [start, end] = period_bounds(period);
  if (now < end) {
    throw Error(ErrorCode::kPeriodOpen, "period " + period + " is still open",
                json{{"closes_at", end}});
  }
  if (options.shard_size == 0) throw Error(ErrorCode::kInvalidArgument, "shard_size must be positive");

  std::vector<BattleRecord> complete;
  std::vector<BattleRecord> incomplete;
  for (auto& r : store.records()) {
    EpochSeconds t = placement_time(r);
    if (t < start || t >= end) continue;
    if (!privacy::is_scrubbed(r)) {
      throw Error(ErrorCode::kStorage, "record " + r.uuid + " carries raw identifiers; refusing to export");
    }
    (is_complete(r) ? complete : incomplete).push_back(std::move(r));
  }
  auto by_time = [](const BattleRecord& a, const BattleRecord& b) {
    EpochSeconds ta = placement_time(a);
    EpochSeconds tb = placement_time(b);
    return ta != tb ? ta < tb : a.uuid < b.uuid;
  };
  std::sort(complete.begin(), complete.end(), by_time);
  std::sort(incomplete.begin(), incomplete.end(), by_time);

  std::map<SystemKey, const endpoint::SystemDescriptor*> systems;
  for (const auto& d : registry) systems[d.key] = &d;

  const fs::path dir = out_root / period;
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir / "audio", ec);
  if (ec) throw Error(ErrorCode::kStorage, "cannot create " + dir.string() + ": " + ec.message());

  ReleaseManifest manifest;
  manifest.period = period;
  manifest.record_count = complete.size();
  manifest.incomplete_count = incomplete.size();
  manifest.salt_version = options.salt_version;
  if (manifest.salt_version.empty()) manifest.salt_version = store.salt_version().value_or("unknown");

  std::map<std::string, std::string> exclusions;
  std::set<std::string> copied;
  for (const auto* group : {&complete, &incomplete}) {
    for (const auto& r : *group) {
      for (const auto* meta : {&r.a_metadata, &r.b_metadata}) {
        if (!*meta) continue;
        const auto& m = **meta;
        auto it = systems.find(m.system_key);
        if (it == systems.end()) {
          exclusions.emplace(m.system_key.str(), "system not in registry");
          continue;
        }
        if (!it->second->audio_releasable) {
          exclusions.emplace(m.system_key.str(), "license does not permit audio redistribution");
          continue;
        }
        if (!copied.insert(m.checksum).second) continue;
        auto bytes = store.read_audio(m.checksum);
        store::write_file_durable(dir / store::audio_ref(m.checksum), bytes);
      }
    }
  }
  for (const auto& [key, reason] : exclusions) manifest.excluded_audio.push_back({key, reason});

  std::size_t shards = std::max<std::size_t>(1, (complete.size() + options.shard_size - 1) / options.shard_size);
  for (std::size_t s = 0; s < shards; ++s) {
    std::size_t begin = s * options.shard_size;
    std::size_t stop = std::min(complete.size(), begin + options.shard_size);
    store::write_file_durable(dir / shard_name(s), jsonl(complete, begin, stop));
  }
  if (!incomplete.empty()) {
    store::write_file_durable(dir / "incomplete.jsonl", jsonl(incomplete, 0, incomplete.size()));
  }

  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    manifest.files[fs::relative(entry.path(), dir).generic_string()] = file_digest(entry.path());
  }
  store::write_file_durable(dir / "manifest.json", json(manifest).dump(2) + "\n");
  return manifest;
}

VerifyReport verify_release(const fs::path& dir) {
  VerifyReport report;
  auto problem = [&](std::string message) {
    report.ok = false;
    report.problems.push_back(std::move(message));
  };

  ReleaseManifest manifest;
  try {
    auto bytes = store::read_file(dir / "manifest.json");
    manifest = json::parse(bytes.begin(), bytes.end()).get<ReleaseManifest>();
  } catch (const std::exception& e) {
    problem(std::string("manifest unreadable: ") + e.what());
    return report;
  }

  std::set<std::string> present;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    present.insert(rel);
    if (!manifest.files.count(rel)) problem("file not listed in manifest: " + rel);
  }
  for (const auto& [rel, digest] : manifest.files) {
    if (!present.count(rel)) {
      problem("listed file missing: " + rel);
      continue;
    }
    if (file_digest(dir / rel) != digest) problem("digest mismatch: " + rel);
  }

  std::pair<EpochSeconds, EpochSeconds> bounds{0.0, 0.0};
  try {
    bounds = period_bounds(manifest.period);
  } catch (const Error& e) {
    problem(e.what());
  }

  std::set<std::string> excluded;
  for (const auto& e : manifest.excluded_audio) excluded.insert(e.system_key);

  std::set<std::string> uuids;
  std::size_t complete = 0;
  std::size_t incomplete = 0;
  for (const auto& rel : present) {
    bool is_shard = rel.rfind("battles-", 0) == 0;
    bool is_incomplete = rel == "incomplete.jsonl";
    if (!is_shard && !is_incomplete) continue;
    auto bytes = store::read_file(dir / rel);
    std::string text(bytes.begin(), bytes.end());
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) nl = text.size();
      std::string line = text.substr(pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) continue;
      BattleRecord r;
      try {
        r = parse_battle(std::string_view(line));
      } catch (const Error& e) {
        problem(rel + ": " + e.what());
        continue;
      }
      ++report.records_checked;
      (is_shard ? complete : incomplete)++;
      if (!uuids.insert(r.uuid).second) problem("duplicate battle " + r.uuid);
      if (!privacy::is_scrubbed(r)) problem("raw identifiers in " + r.uuid);
      if (is_shard) {
        if (!is_complete(r)) problem("incomplete battle in " + rel + ": " + r.uuid);
        for (const auto& v : validate_battle(r)) problem(r.uuid + ": " + v.field + ": " + v.message);
      }
      EpochSeconds t = placement_time(r);
      if (t < bounds.first || t >= bounds.second) problem("battle outside period: " + r.uuid);
      for (const auto* meta : {&r.a_metadata, &r.b_metadata}) {
        if (!*meta) continue;
        if (present.count(store::audio_ref((*meta)->checksum))) continue;
        if (!excluded.count((*meta)->system_key.str())) {
          problem("missing audio " + (*meta)->checksum + " for " + r.uuid);
        }
      }
    }
  }
  if (complete != manifest.record_count) {
    problem("record_count " + std::to_string(manifest.record_count) + " but found " + std::to_string(complete));
  }
  if (incomplete != manifest.incomplete_count) {
    problem("incomplete_count " + std::to_string(manifest.incomplete_count) + " but found " +
            std::to_string(incomplete));
  }
  return report;
}

}  // namespace musicduel::release
