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

// Bradley-Terry leaderboard: outcome aggregation, MM fitting, bootstrap
// intervals, real-time factors, and table/scatter emission.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musicduel/domain.hpp"
#include "musicduel/endpoint.hpp"

namespace musicduel::leaderboard {

/// Pairwise outcome counts. TIE and BOTH_BAD are pooled into `ties`;
/// `both_bad` keeps the BOTH_BAD share for reporting.
struct OutcomeMatrix {
  std::vector<SystemKey> systems;
  std::vector<std::vector<std::int64_t>> wins;  // wins[i][j]: i beat j
  std::vector<std::vector<std::int64_t>> ties;  // symmetric
  std::vector<std::vector<std::int64_t>> both_bad;  // symmetric, subset of ties
  std::size_t battles = 0;
  std::size_t skipped = 0;  // unvoted or failed records

  std::size_t size() const { return systems.size(); }
  std::optional<std::size_t> index_of(const SystemKey& key) const;
  /// Row plus column total for system i (ties counted once per battle).
  std::int64_t votes(std::size_t i) const;
  std::int64_t both_bad_total(std::size_t i) const;

  /// Adds an empty row/column for `key` if absent; returns its index.
  std::size_t ensure(const SystemKey& key);
  void add(std::size_t a, std::size_t b, Preference preference, std::int64_t count = 1);
};

OutcomeMatrix build_outcomes(std::span<const BattleRecord> records);

struct BtConfig {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  /// Virtual tie weight added to each compared pair of a component whose
  /// maximum-likelihood estimate does not exist.
  double regularization = 0.1;
};

struct BtFit {
  std::vector<SystemKey> systems;
  std::vector<double> beta;
  /// Component id per system; components are fitted separately.
  std::vector<int> component;
  /// Per component: true when the unregularized MLE exists.
  std::vector<bool> well_posed;
  int iterations = 0;
  bool converged = true;
  std::vector<std::string> warnings;

  std::optional<double> beta_of(const SystemKey& key) const;
};

/// Maximum-likelihood strengths with ties as half wins; mean(beta) = 0 per
/// component. Systems without outcomes are omitted.
BtFit fit_bradley_terry(const OutcomeMatrix& m, const BtConfig& config = {});

/// 1000 + 400 * beta / ln 10.
double arena_score(double beta);

/// duration / span. Throws kInvalidArgument unless both are positive.
double rtf(double duration, double generation_span);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool unstable = false;
};

struct BootstrapConfig {
  std::uint64_t seed = 0;
  BtConfig bt;
  double lower_percentile = 2.5;
  double upper_percentile = 97.5;
  /// Systems with fewer votes than this get an unstable, unbounded interval.
  std::int64_t min_votes = 5;
  /// 0 uses std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Percentile intervals of the arena score over battle resamples. Throws
/// kInvalidArgument if n_resamples < 100.
std::map<SystemKey, Interval> bootstrap_ci(std::span<const BattleRecord> records, int n_resamples,
                                           const BootstrapConfig& config = {});

struct LeaderboardEntry {
  SystemKey system;
  std::string display_name;
  double arena_score = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool unstable = false;
  std::int64_t votes = 0;
  std::optional<double> median_rtf;
  std::string provider;
  std::string license;
  std::string training_data_info;
  std::optional<endpoint::Access> access;
  double both_bad_rate = 0.0;
  int component = 0;
};

struct LeaderboardConfig {
  int n_resamples = 1000;
  BootstrapConfig bootstrap;
};

/// Fits scores and intervals and joins registry attributes. Records
/// outside the registry still appear, with empty attributes.
std::vector<LeaderboardEntry> compute_leaderboard(std::span<const BattleRecord> records,
                                                  std::span<const endpoint::SystemDescriptor> registry,
                                                  const LeaderboardConfig& config = {});

struct ScatterRow {
  SystemKey system;
  std::optional<double> median_rtf;
  double arena_score = 0.0;
  std::string license_class;
  std::string training_data_class;
};

struct Filter {
  std::string field;  // access, provider, license
  std::string value;
};

/// "field=value". Throws kInvalidArgument.
Filter parse_filter(std::string_view text);

struct LeaderboardView {
  std::vector<LeaderboardEntry> table;
  std::vector<ScatterRow> scatter;
};

std::vector<std::string> sort_keys();

/// Filters, then sorts (arena_score, ci_low, ci_high, votes, both_bad_rate
/// descending; median_rtf descending = fastest first; system, provider,
/// license ascending). Throws kInvalidArgument for unknown keys or fields.
LeaderboardView emit_leaderboard(std::vector<LeaderboardEntry> entries, const std::string& sort_key = "arena_score",
                                 std::span<const Filter> filters = {});

/// "proprietary", "non-commercial", or "open".
std::string license_class(std::string_view license);
std::string training_data_class(std::string_view training_data_info);

std::string table_csv(std::span<const LeaderboardEntry> rows);
std::string scatter_csv(std::span<const ScatterRow> rows);
json to_json_table(std::span<const LeaderboardEntry> rows);

}  // namespace musicduel::leaderboard
