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

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "musicduel/leaderboard.hpp"
#include "oracles.hpp"

using namespace musicduel;
using namespace musicduel::leaderboard;
using testsupport::Matrix;

namespace {

SystemKey key(const std::string& tag) { return SystemKey{tag, "initial"}; }

GenerationMetadata meta(const std::string& tag, double duration = 10.0, double span = 2.0) {
  GenerationMetadata m;
  m.system_key = key(tag);
  m.duration = duration;
  m.system_time_started = 100.0;
  m.system_time_completed = 100.0 + span;
  m.gateway_time_started = 99.0;
  m.gateway_time_completed = 101.0 + span;
  return m;
}

BattleRecord battle(const std::string& a, const std::string& b, Preference p, int serial) {
  BattleRecord r;
  r.uuid = "battle-" + std::to_string(serial);
  r.a_metadata = meta(a);
  r.b_metadata = meta(b);
  Vote v;
  v.preference = p;
  v.preference_time = 1000.0 + serial;
  r.vote = v;
  return r;
}

/// `n` battles where `winner` beats `loser`, alternating sides.
void add_wins(std::vector<BattleRecord>& out, const std::string& winner, const std::string& loser, int n) {
  for (int i = 0; i < n; ++i) {
    int serial = static_cast<int>(out.size());
    if (serial % 2) out.push_back(battle(winner, loser, Preference::kA, serial));
    else out.push_back(battle(loser, winner, Preference::kB, serial));
  }
}

void add_ties(std::vector<BattleRecord>& out, const std::string& a, const std::string& b, int n,
              Preference kind = Preference::kTie) {
  for (int i = 0; i < n; ++i) out.push_back(battle(a, b, kind, static_cast<int>(out.size())));
}

double beta(const BtFit& fit, const std::string& tag) { return fit.beta_of(key(tag)).value(); }

// Converts matrices to the oracle's representation in the fit's system order.
void oracle_matrices(const OutcomeMatrix& m, const BtFit& fit, Matrix& wins, Matrix& ties) {
  const std::size_t n = fit.systems.size();
  wins = testsupport::zeros(n);
  ties = testsupport::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto mi = *m.index_of(fit.systems[i]);
      auto mj = *m.index_of(fit.systems[j]);
      wins[i][j] = static_cast<double>(m.wins[mi][mj]);
      if (i < j) ties[i][j] = static_cast<double>(m.ties[mi][mj]);
    }
  }
}

}  // namespace

TEST_SUITE("leaderboard") {
  TEST_CASE("outcome aggregation") {
    std::vector<BattleRecord> rs;
    rs.push_back(battle("x", "y", Preference::kA, 0));
    rs.push_back(battle("x", "y", Preference::kB, 1));
    rs.push_back(battle("y", "x", Preference::kB, 2));
    rs.push_back(battle("x", "y", Preference::kTie, 3));
    rs.push_back(battle("y", "x", Preference::kBothBad, 4));
    BattleRecord unvoted = battle("x", "y", Preference::kA, 5);
    unvoted.vote.reset();
    rs.push_back(unvoted);
    BattleRecord failed = battle("x", "y", Preference::kA, 6);
    failed.failure = FailureNote{"generate_A", "boom"};
    rs.push_back(failed);

    OutcomeMatrix m = build_outcomes(rs);
    auto x = *m.index_of(key("x"));
    auto y = *m.index_of(key("y"));
    CHECK(m.wins[x][y] == 2);
    CHECK(m.wins[y][x] == 1);
    CHECK(m.ties[x][y] == 2);
    CHECK(m.ties[y][x] == 2);
    CHECK(m.both_bad[x][y] == 1);
    CHECK(m.battles == 5);
    CHECK(m.skipped == 2);
    CHECK(m.votes(x) == 5);
    CHECK(m.both_bad_total(y) == 1);
    CHECK_FALSE(m.index_of(key("z")).has_value());
  }

  TEST_CASE("the example record counts as one win for riffusion") {
    BattleRecord r = parse_battle(std::string_view(testsupport::example_battle_text()));
    OutcomeMatrix m = build_outcomes(std::span<const BattleRecord>(&r, 1));
    auto riff = *m.index_of(SystemKey{"riffusion-fuzz-1-0", r.a_metadata->system_key.variant_tag});
    auto ace = *m.index_of(SystemKey{"acestep", r.b_metadata->system_key.variant_tag});
    CHECK(m.wins[riff][ace] == 1);
    CHECK(m.wins[ace][riff] == 0);
  }

  TEST_CASE("two-system closed forms") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "p", "q", 8);
    add_wins(rs, "q", "p", 2);
    BtFit fit = fit_bradley_terry(build_outcomes(rs));
    CHECK(beta(fit, "p") - beta(fit, "q") == doctest::Approx(1.3862943611198906).epsilon(1e-9));
    CHECK(beta(fit, "p") + beta(fit, "q") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.well_posed.at(0));
    CHECK(fit.converged);

    std::vector<BattleRecord> even;
    add_wins(even, "p", "q", 5);
    add_wins(even, "q", "p", 5);
    BtFit f2 = fit_bradley_terry(build_outcomes(even));
    CHECK(std::fabs(beta(f2, "p")) < 1e-9);

    // 6 wins, 2 losses, 4 ties: effective 8 - 4, so the gap is ln 2.
    std::vector<BattleRecord> tied;
    add_wins(tied, "p", "q", 6);
    add_wins(tied, "q", "p", 2);
    add_ties(tied, "p", "q", 4);
    BtFit f3 = fit_bradley_terry(build_outcomes(tied));
    CHECK(beta(f3, "p") - beta(f3, "q") == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }

  TEST_CASE("three systems agree with the brute-force maximizer") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "a", "b", 7);
    add_wins(rs, "b", "a", 3);
    add_wins(rs, "b", "c", 6);
    add_wins(rs, "c", "b", 4);
    add_wins(rs, "c", "a", 2);
    add_wins(rs, "a", "c", 5);
    add_ties(rs, "a", "c", 3, Preference::kBothBad);
    OutcomeMatrix m = build_outcomes(rs);
    BtFit fit = fit_bradley_terry(m);
    Matrix w, t;
    oracle_matrices(m, fit, w, t);
    auto expected = testsupport::grid_search_mle(w, t);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(fit.beta[i] == doctest::Approx(expected[i]).epsilon(1e-4));
  }

  TEST_CASE("random well-posed matrices agree with the brute-force maximizer") {
    std::mt19937_64 rng(20260301);
    int checked = 0;
    while (checked < 15) {
      std::vector<BattleRecord> rs;
      const int n = 3 + static_cast<int>(rng() % 2);
      const int battles = 6 + static_cast<int>(rng() % 15);
      for (int i = 0; i < battles; ++i) {
        int a = static_cast<int>(rng() % n);
        int b = static_cast<int>(rng() % (n - 1));
        if (b >= a) ++b;
        const Preference prefs[] = {Preference::kA, Preference::kB, Preference::kA, Preference::kB, Preference::kTie};
        rs.push_back(battle("s" + std::to_string(a), "s" + std::to_string(b), prefs[rng() % 5], i));
      }
      OutcomeMatrix m = build_outcomes(rs);
      BtFit fit = fit_bradley_terry(m);
      Matrix w, t;
      oracle_matrices(m, fit, w, t);
      if (fit.systems.size() < 2 || !testsupport::strongly_connected(w, t)) continue;
      REQUIRE(fit.well_posed.at(0));
      auto expected = testsupport::grid_search_mle(w, t);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(fit.beta[i] == doctest::Approx(expected[i]).epsilon(1e-3).scale(1.0));
      }
      ++checked;
    }
  }

  TEST_CASE("swapping sides leaves the fit unchanged") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "a", "b", 4);
    add_wins(rs, "b", "a", 3);
    add_wins(rs, "b", "c", 2);
    add_wins(rs, "c", "a", 3);
    add_wins(rs, "a", "c", 1);
    add_ties(rs, "b", "c", 2);
    std::vector<BattleRecord> swapped;
    for (const auto& r : rs) {
      BattleRecord s = r;
      std::swap(s.a_metadata, s.b_metadata);
      if (s.vote->preference == Preference::kA) s.vote->preference = Preference::kB;
      else if (s.vote->preference == Preference::kB) s.vote->preference = Preference::kA;
      swapped.push_back(s);
    }
    BtFit f1 = fit_bradley_terry(build_outcomes(rs));
    BtFit f2 = fit_bradley_terry(build_outcomes(swapped));
    double sum = 0;
    for (const char* s : {"a", "b", "c"}) {
      CHECK(beta(f1, s) == doctest::Approx(beta(f2, s)).epsilon(1e-9).scale(1.0));
      sum += beta(f1, s);
    }
    CHECK(std::fabs(sum) < 1e-9);
  }

  TEST_CASE("an extra win never lowers the winner relative to the loser") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "a", "b", 3);
    add_wins(rs, "b", "a", 3);
    add_wins(rs, "b", "c", 3);
    add_wins(rs, "c", "b", 2);
    add_wins(rs, "c", "a", 2);
    add_wins(rs, "a", "c", 2);
    BtFit before = fit_bradley_terry(build_outcomes(rs));
    add_wins(rs, "c", "a", 1);
    BtFit after = fit_bradley_terry(build_outcomes(rs));
    CHECK(beta(after, "c") - beta(after, "a") > beta(before, "c") - beta(before, "a"));
    CHECK(beta(after, "c") > beta(before, "c"));
  }

  TEST_CASE("ill-posed components are regularized with virtual ties") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "top", "mid", 3);
    add_wins(rs, "mid", "low", 2);
    add_wins(rs, "top", "low", 1);
    OutcomeMatrix m = build_outcomes(rs);
    BtFit fit = fit_bradley_terry(m);
    REQUIRE(fit.well_posed.size() == 1);
    CHECK_FALSE(fit.well_posed[0]);
    CHECK_FALSE(fit.warnings.empty());
    for (double b : fit.beta) CHECK(std::isfinite(b));
    CHECK(beta(fit, "top") > beta(fit, "mid"));
    CHECK(beta(fit, "mid") > beta(fit, "low"));
    Matrix w, t;
    oracle_matrices(m, fit, w, t);
    auto expected = testsupport::grid_search_mle(w, testsupport::with_virtual_ties(w, t, 0.1));
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(fit.beta[i] == doctest::Approx(expected[i]).epsilon(1e-4));
  }

  TEST_CASE("disconnected systems are fitted as separate components") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "a", "b", 3);
    add_wins(rs, "b", "a", 1);
    add_wins(rs, "c", "d", 1);
    add_wins(rs, "d", "c", 1);
    BtFit fit = fit_bradley_terry(build_outcomes(rs));
    auto comp = [&](const std::string& s) {
      for (std::size_t i = 0; i < fit.systems.size(); ++i) {
        if (fit.systems[i] == key(s)) return fit.component[i];
      }
      return -1;
    };
    CHECK(comp("a") == comp("b"));
    CHECK(comp("c") == comp("d"));
    CHECK(comp("a") != comp("c"));
    CHECK(beta(fit, "a") + beta(fit, "b") == doctest::Approx(0.0).scale(1.0));
    CHECK(beta(fit, "a") - beta(fit, "b") == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    CHECK(std::fabs(beta(fit, "c")) < 1e-9);
  }

  TEST_CASE("arena scores and real-time factors") {
    CHECK(arena_score(0.0) == 1000.0);
    CHECK(arena_score(std::log(10.0)) == doctest::Approx(1400.0));
    CHECK(arena_score(-std::log(10.0)) == doctest::Approx(600.0));
    // A 400-point gap means 10:1 odds.
    double ten_to_one = std::log(10.0);
    CHECK(1.0 / (1.0 + std::exp(-ten_to_one)) == doctest::Approx(10.0 / 11.0));
    CHECK(arena_score(ten_to_one) - arena_score(0.0) == doctest::Approx(400.0));

    CHECK(rtf(30.0, 3.0) == 10.0);
    CHECK(rtf(10.0, 20.0) == 0.5);
    CHECK_THROWS_AS(rtf(0.0, 1.0), Error);
    CHECK_THROWS_AS(rtf(10.0, 0.0), Error);
    CHECK_THROWS_AS(rtf(10.0, -1.0), Error);

    BattleRecord r = parse_battle(std::string_view(testsupport::example_battle_text()));
    const auto& ace = *r.b_metadata;
    CHECK(ace.system_span() == doctest::Approx(9.099915504455566).epsilon(1e-9));
    CHECK(rtf(ace.duration, ace.system_span()) == doctest::Approx(3.2914591333660943).epsilon(1e-9));
  }

  TEST_CASE("bootstrap intervals") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "a", "b", 30);
    add_wins(rs, "b", "a", 20);
    add_wins(rs, "b", "c", 28);
    add_wins(rs, "c", "b", 22);
    add_wins(rs, "a", "c", 32);
    add_wins(rs, "c", "a", 18);

    BootstrapConfig cfg;
    cfg.seed = 9;
    cfg.threads = 1;
    auto one = bootstrap_ci(rs, 200, cfg);
    cfg.threads = 4;
    auto four = bootstrap_ci(rs, 200, cfg);
    REQUIRE(one.size() == 3);
    for (const auto& [k, iv] : one) {
      CHECK(iv.low == four.at(k).low);
      CHECK(iv.high == four.at(k).high);
      CHECK(iv.low <= iv.high);
      CHECK_FALSE(iv.unstable);
    }
    BtFit fit = fit_bradley_terry(build_outcomes(rs));
    double score_a = arena_score(beta(fit, "a"));
    CHECK(one.at(key("a")).low <= score_a);
    CHECK(one.at(key("a")).high >= score_a);

    std::vector<BattleRecord> big;
    for (int rep = 0; rep < 4; ++rep) {
      add_wins(big, "a", "b", 30);
      add_wins(big, "b", "a", 20);
      add_wins(big, "b", "c", 28);
      add_wins(big, "c", "b", 22);
      add_wins(big, "a", "c", 32);
      add_wins(big, "c", "a", 18);
    }
    auto wide = bootstrap_ci(rs, 200, cfg);
    auto narrow = bootstrap_ci(big, 200, cfg);
    for (const auto& [k, iv] : wide) CHECK(narrow.at(k).high - narrow.at(k).low < iv.high - iv.low);

    std::vector<BattleRecord> single = {battle("a", "b", Preference::kA, 0)};
    auto sparse = bootstrap_ci(single, 100, cfg);
    CHECK(sparse.at(key("a")).unstable);
    CHECK(std::isinf(sparse.at(key("a")).high));
    CHECK_THROWS_AS(bootstrap_ci(rs, 99, cfg), Error);
  }

  TEST_CASE("leaderboard table, filters, and sorting") {
    std::vector<BattleRecord> rs;
    add_wins(rs, "open", "closed", 12);
    add_wins(rs, "closed", "open", 8);
    add_ties(rs, "open", "closed", 2, Preference::kBothBad);
    rs.push_back(battle("open", "ghost", Preference::kA, 999));

    endpoint::SystemDescriptor open;
    open.key = key("open");
    open.display_name = "Open";
    open.provider = "Lab";
    open.license = "Apache-2.0";
    open.training_data_info = "licensed stock music";
    open.access = endpoint::Access::kOpenWeights;
    endpoint::SystemDescriptor closed = open;
    closed.key = key("closed");
    closed.display_name = "Closed";
    closed.provider = "Corp";
    closed.license = "Proprietary";
    closed.training_data_info = "undisclosed";
    closed.access = endpoint::Access::kApi;
    std::vector<endpoint::SystemDescriptor> reg = {open, closed};

    LeaderboardConfig cfg;
    cfg.n_resamples = 200;
    auto entries = compute_leaderboard(rs, reg, cfg);
    REQUIRE(entries.size() == 3);
    for (const auto& e : entries) {
      CHECK(e.ci_low <= e.arena_score);
      CHECK(e.arena_score <= e.ci_high);
    }
    auto view = emit_leaderboard(entries);
    CHECK(view.table.front().system == key("open"));
    for (std::size_t i = 1; i < view.table.size(); ++i) {
      CHECK(view.table[i - 1].arena_score >= view.table[i].arena_score);
    }
    const auto& ghost = *std::find_if(entries.begin(), entries.end(), [](auto& e) { return e.system == key("ghost"); });
    CHECK(ghost.provider.empty());
    CHECK(ghost.unstable);
    const auto& o = *std::find_if(entries.begin(), entries.end(), [](auto& e) { return e.system == key("open"); });
    CHECK(o.votes == 23);
    CHECK(o.both_bad_rate == doctest::Approx(2.0 / 23.0));
    CHECK(o.median_rtf == std::optional<double>(5.0));

    std::vector<Filter> only_proprietary = {parse_filter("access=API")};
    auto filtered = emit_leaderboard(entries, "arena_score", only_proprietary);
    REQUIRE(filtered.table.size() == 1);
    CHECK(filtered.table[0].system == key("closed"));
    std::vector<Filter> by_provider = {parse_filter("provider=Lab")};
    CHECK(emit_leaderboard(entries, "votes", by_provider).table.size() == 1);

    auto by_name = emit_leaderboard(entries, "system");
    CHECK(by_name.table.front().system == key("closed"));
    for (const auto& k : sort_keys()) CHECK_NOTHROW(emit_leaderboard(entries, k));
    CHECK_THROWS_AS(emit_leaderboard(entries, "popularity"), Error);
    CHECK_THROWS_AS(parse_filter("access"), Error);
    std::vector<Filter> bad = {Filter{"color", "red"}};
    CHECK_THROWS_AS(emit_leaderboard(entries, "arena_score", bad), Error);

    CHECK(license_class("Apache-2.0") == "open");
    CHECK(license_class("Proprietary") == "proprietary");
    CHECK(license_class("CC-BY-NC-4.0") == "non-commercial");
    CHECK(license_class("") == "proprietary");
    CHECK(training_data_class("undisclosed") == "undisclosed");
    CHECK(training_data_class("licensed stock music") == "licensed");
    CHECK(training_data_class("CC0 recordings") == "open");
    REQUIRE(view.scatter.size() == 3);
    std::string table = table_csv(view.table);
    CHECK(table.rfind("system,arena_score,ci_low,ci_high,votes,median_rtf,provider,license,training_data_info,both_bad_rate", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
    CHECK(scatter_csv(view.scatter).find("open:initial") != std::string::npos);
    json j = to_json_table(view.table);
    CHECK(j.size() == 3);
  }
}
