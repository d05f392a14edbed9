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

#include "musicduel/leaderboard.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace musicduel::leaderboard {

std::optional<std::size_t> OutcomeMatrix::index_of(const SystemKey& key) const {
  auto it = std::find(systems.begin(), systems.end(), key);
  if (it == systems.end()) return std::nullopt;
  return static_cast<std::size_t>(it - systems.begin());
}

std::int64_t OutcomeMatrix::votes(std::size_t i) const {
  std::int64_t total = 0;
  for (std::size_t j = 0; j < size(); ++j) total += wins[i][j] + wins[j][i] + ties[i][j];
  return total;
}

std::int64_t OutcomeMatrix::both_bad_total(std::size_t i) const {
  return std::accumulate(both_bad[i].begin(), both_bad[i].end(), std::int64_t{0});
}

std::size_t OutcomeMatrix::ensure(const SystemKey& key) {
  if (auto i = index_of(key)) return *i;
  systems.push_back(key);
  for (auto* grid : {&wins, &ties, &both_bad}) {
    for (auto& row : *grid) row.push_back(0);
    grid->emplace_back(systems.size(), 0);
  }
  return systems.size() - 1;
}

void OutcomeMatrix::add(std::size_t a, std::size_t b, Preference preference, std::int64_t count) {
  if (a == b) throw Error(ErrorCode::kInvalidArgument, "a system cannot battle itself");
  switch (preference) {
    case Preference::kA: wins[a][b] += count; break;
    case Preference::kB: wins[b][a] += count; break;
    case Preference::kBothBad:
      both_bad[a][b] += count;
      both_bad[b][a] += count;
      [[fallthrough]];
    case Preference::kTie:
      ties[a][b] += count;
      ties[b][a] += count;
      break;
  }
  battles += static_cast<std::size_t>(count);
}

namespace {

bool contributes(const BattleRecord& r) {
  return r.vote && !r.failure && r.a_metadata && r.b_metadata;
}

}  // namespace

OutcomeMatrix build_outcomes(std::span<const BattleRecord> records) {
  OutcomeMatrix m;
  for (const auto& r : records) {
    if (!contributes(r)) {
      ++m.skipped;
      continue;
    }
    std::size_t a = m.ensure(r.a_metadata->system_key);
    std::size_t b = m.ensure(r.b_metadata->system_key);
    m.add(a, b, r.vote->preference);
  }
  return m;
}

std::optional<double> BtFit::beta_of(const SystemKey& key) const {
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (systems[i] == key) return beta[i];
  }
  return std::nullopt;
}

namespace {

bool reaches_all(const std::vector<std::vector<bool>>& edge, std::size_t n) {
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack = {0};
  seen[0] = true;
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      if (edge[u][v] && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

struct ComponentFit {
  std::vector<double> beta;
  int iterations = 0;
  bool converged = true;
  bool well_posed = true;
};

// Minorization-maximization over one connected component.
ComponentFit fit_component(const OutcomeMatrix& m, const std::vector<std::size_t>& members, const BtConfig& cfg) {
  const std::size_t n = members.size();
  ComponentFit out;
  out.beta.assign(n, 0.0);
  if (n < 2) return out;

  std::vector<std::vector<double>> games(n, std::vector<double>(n, 0.0));
  std::vector<double> credit(n, 0.0);
  std::vector<std::vector<bool>> beats(n, std::vector<bool>(n, false));
  std::vector<std::vector<bool>> beaten_by(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      std::size_t i = members[a];
      std::size_t j = members[b];
      games[a][b] = static_cast<double>(m.wins[i][j] + m.wins[j][i] + m.ties[i][j]);
      credit[a] += static_cast<double>(m.wins[i][j]) + 0.5 * static_cast<double>(m.ties[i][j]);
      if (m.wins[i][j] > 0 || m.ties[i][j] > 0) {
        beats[a][b] = true;
        beaten_by[b][a] = true;
      }
    }
  }

  out.well_posed = reaches_all(beats, n) && reaches_all(beaten_by, n);
  if (!out.well_posed) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || games[a][b] == 0.0) continue;
        games[a][b] += cfg.regularization;
        credit[a] += 0.5 * cfg.regularization;
      }
    }
  }

  std::vector<double> p(n, 1.0);
  std::vector<double> next(n);
  out.converged = false;
  for (out.iterations = 1; out.iterations <= cfg.max_iterations; ++out.iterations) {
    for (std::size_t a = 0; a < n; ++a) {
      double denom = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        if (games[a][b] > 0.0) denom += games[a][b] / (p[a] + p[b]);
      }
      next[a] = credit[a] / denom;
    }
    double mean_log = 0.0;
    for (double v : next) mean_log += std::log(v);
    mean_log /= static_cast<double>(n);
    double delta = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      double beta = std::log(next[a]) - mean_log;
      delta = std::max(delta, std::abs(beta - std::log(p[a])));
      p[a] = std::exp(beta);
    }
    if (delta < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.iterations = std::min(out.iterations, cfg.max_iterations);
  for (std::size_t a = 0; a < n; ++a) out.beta[a] = std::log(p[a]);
  return out;
}

}  // namespace

BtFit fit_bradley_terry(const OutcomeMatrix& m, const BtConfig& config) {
  BtFit fit;
  const std::size_t n = m.size();
  std::vector<int> comp(n, -1);
  int components = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0 || m.votes(s) == 0) continue;
    std::vector<std::size_t> stack = {s};
    comp[s] = components;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (comp[v] < 0 && (m.wins[u][v] + m.wins[v][u] + m.ties[u][v]) > 0) {
          comp[v] = components;
          stack.push_back(v);
        }
      }
    }
    ++components;
  }
  if (components > 1) {
    fit.warnings.push_back("comparison graph has " + std::to_string(components) +
                           " components; scores are comparable only within a component");
  }

  for (int c = 0; c < components; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] == c) members.push_back(s);
    }
    ComponentFit cf = fit_component(m, members, config);
    fit.well_posed.push_back(cf.well_posed);
    fit.iterations = std::max(fit.iterations, cf.iterations);
    fit.converged = fit.converged && cf.converged;
    if (!cf.well_posed) {
      fit.warnings.push_back("component " + std::to_string(c) +
                             " has no finite maximum-likelihood estimate; regularized with virtual ties");
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
      fit.systems.push_back(m.systems[members[k]]);
      fit.beta.push_back(cf.beta[k]);
      fit.component.push_back(c);
    }
  }
  if (!fit.converged) fit.warnings.push_back("iteration limit reached before convergence");
  return fit;
}

double arena_score(double beta) { return 1000.0 + 400.0 * beta / std::log(10.0); }

double rtf(double duration, double generation_span) {
  if (!(duration > 0.0) || !(generation_span > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rtf needs positive duration and generation span");
  }
  return duration / generation_span;
}

namespace {

double percentile(std::vector<double>& values, double pct) {
  std::sort(values.begin(), values.end());
  double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<BattleRecord> contributing(std::span<const BattleRecord> records) {
  std::vector<BattleRecord> out;
  for (const auto& r : records) {
    if (contributes(r)) out.push_back(r);
  }
  return out;
}

}  // namespace

std::map<SystemKey, Interval> bootstrap_ci(std::span<const BattleRecord> records, int n_resamples,
                                           const BootstrapConfig& config) {
  if (n_resamples < 100) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs at least 100 resamples");
  const std::vector<BattleRecord> voted = contributing(records);
  const OutcomeMatrix full = build_outcomes(voted);
  const BtFit full_fit = fit_bradley_terry(full, config.bt);

  std::map<SystemKey, Interval> out;
  if (voted.empty()) return out;

  // Compact per-battle outcomes so resamples do not copy records.
  struct Outcome {
    std::size_t a;
    std::size_t b;
    Preference preference;
  };
  std::vector<Outcome> outcomes;
  for (const auto& r : voted) {
    outcomes.push_back({*full.index_of(r.a_metadata->system_key), *full.index_of(r.b_metadata->system_key),
                        r.vote->preference});
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> draws(static_cast<std::size_t>(n_resamples));
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t r = first; r < draws.size(); r += stride) {
      std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                        static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<std::size_t> pick(0, outcomes.size() - 1);
      OutcomeMatrix m;
      m.systems = full.systems;
      for (auto* grid : {&m.wins, &m.ties, &m.both_bad}) {
        grid->assign(full.size(), std::vector<std::int64_t>(full.size(), 0));
      }
      for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const Outcome& o = outcomes[pick(rng)];
        m.add(o.a, o.b, o.preference);
      }
      BtFit f = fit_bradley_terry(m, config.bt);
      for (std::size_t s = 0; s < f.systems.size(); ++s) {
        draws[r].emplace_back(*full.index_of(f.systems[s]), arena_score(f.beta[s]));
      }
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_resamples));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(run, t, threads);
  run(0, threads);
  for (auto& th : pool) th.join();

  std::vector<std::vector<double>> scores(full.size());
  for (const auto& draw : draws) {
    for (const auto& [s, score] : draw) scores[s].push_back(score);
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < full_fit.systems.size(); ++k) {
    std::size_t s = *full.index_of(full_fit.systems[k]);
    Interval iv;
    bool ill_posed = !full_fit.well_posed[static_cast<std::size_t>(full_fit.component[k])];
    if (full.votes(s) < config.min_votes || ill_posed || scores[s].size() < 2) {
      iv = Interval{-kInf, kInf, true};
    } else {
      iv.low = percentile(scores[s], config.lower_percentile);
      iv.high = percentile(scores[s], config.upper_percentile);
    }
    out[full.systems[s]] = iv;
  }
  return out;
}

std::vector<LeaderboardEntry> compute_leaderboard(std::span<const BattleRecord> records,
                                                  std::span<const endpoint::SystemDescriptor> registry,
                                                  const LeaderboardConfig& config) {
  const std::vector<BattleRecord> voted = contributing(records);
  const OutcomeMatrix m = build_outcomes(voted);
  const BtFit fit = fit_bradley_terry(m, config.bootstrap.bt);
  std::map<SystemKey, Interval> cis;
  if (!voted.empty()) cis = bootstrap_ci(voted, config.n_resamples, config.bootstrap);

  std::map<SystemKey, std::vector<double>> rtfs;
  for (const auto& r : records) {
    for (const auto* meta : {&r.a_metadata, &r.b_metadata}) {
      if (!*meta) continue;
      const auto& md = **meta;
      if (md.duration > 0.0 && md.system_span() > 0.0) {
        rtfs[md.system_key].push_back(rtf(md.duration, md.system_span()));
      }
    }
  }

  std::vector<LeaderboardEntry> out;
  for (std::size_t k = 0; k < fit.systems.size(); ++k) {
    LeaderboardEntry e;
    e.system = fit.systems[k];
    e.arena_score = arena_score(fit.beta[k]);
    e.component = fit.component[k];
    std::size_t s = *m.index_of(e.system);
    e.votes = m.votes(s);
    e.both_bad_rate = e.votes > 0 ? static_cast<double>(m.both_bad_total(s)) / static_cast<double>(e.votes) : 0.0;
    const Interval iv = cis.count(e.system) ? cis.at(e.system) : Interval{};
    e.unstable = iv.unstable;
    e.ci_low = std::min(iv.low, e.arena_score);
    e.ci_high = std::max(iv.high, e.arena_score);
    if (auto it = rtfs.find(e.system); it != rtfs.end()) {
      std::vector<double> v = it->second;
      e.median_rtf = percentile(v, 50.0);
    }
    for (const auto& d : registry) {
      if (d.key != e.system) continue;
      e.display_name = d.display_name;
      e.provider = d.provider;
      e.license = d.license;
      e.training_data_info = d.training_data_info;
      e.access = d.access;
    }
    out.push_back(std::move(e));
  }
  return out;
}

Filter parse_filter(std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kInvalidArgument, "filter must look like field=value, got '" + std::string(text) + "'");
  }
  return Filter{trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

std::vector<std::string> sort_keys() {
  return {"arena_score", "ci_low", "ci_high", "votes", "median_rtf", "both_bad_rate", "system", "provider", "license"};
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

bool matches(const LeaderboardEntry& e, const Filter& f) {
  if (f.field == "access") {
    return e.access && *e.access == endpoint::access_from_string(f.value);
  }
  if (f.field == "provider") return to_lower(e.provider) == to_lower(f.value);
  if (f.field == "license") return to_lower(e.license) == to_lower(f.value);
  throw Error(ErrorCode::kInvalidArgument,
              "unknown filter field '" + f.field + "'; valid fields: access, provider, license");
}

std::function<bool(const LeaderboardEntry&, const LeaderboardEntry&)> comparator(const std::string& key) {
  using E = LeaderboardEntry;
  auto desc = [](auto get) {
    return [get](const E& a, const E& b) {
      auto x = get(a);
      auto y = get(b);
      return x != y ? x > y : a.system < b.system;
    };
  };
  auto asc = [](auto get) {
    return [get](const E& a, const E& b) {
      auto x = get(a);
      auto y = get(b);
      return x != y ? x < y : a.system < b.system;
    };
  };
  if (key == "arena_score") return desc([](const E& e) { return e.arena_score; });
  if (key == "ci_low") return desc([](const E& e) { return e.ci_low; });
  if (key == "ci_high") return desc([](const E& e) { return e.ci_high; });
  if (key == "votes") return desc([](const E& e) { return e.votes; });
  if (key == "both_bad_rate") return desc([](const E& e) { return e.both_bad_rate; });
  if (key == "median_rtf") {
    return desc([](const E& e) { return e.median_rtf.value_or(-std::numeric_limits<double>::infinity()); });
  }
  if (key == "system") return asc([](const E& e) { return e.system; });
  if (key == "provider") return asc([](const E& e) { return to_lower(e.provider); });
  if (key == "license") return asc([](const E& e) { return to_lower(e.license); });
  throw Error(ErrorCode::kInvalidArgument, "unknown sort key '" + key + "'; valid keys: " + join(sort_keys()),
              json{{"valid_keys", sort_keys()}});
}

}  // namespace

std::string license_class(std::string_view license) {
  const std::string l = to_lower(license);
  auto has = [&](std::string_view s) { return l.find(s) != std::string::npos; };
  if (l.empty() || has("proprietary") || has("closed") || has("api") || has("terms of service")) return "proprietary";
  if (has("-nc") || has("non-commercial") || has("noncommercial")) return "non-commercial";
  return "open";
}

std::string training_data_class(std::string_view info) {
  const std::string t = to_lower(info);
  auto has = [&](std::string_view s) { return t.find(s) != std::string::npos; };
  if (t.empty() || has("undisclosed") || has("unknown") || has("not disclosed")) return "undisclosed";
  if (has("public domain") || has("creative commons") || has("cc0") || has("cc-by")) return "open";
  if (has("licensed")) return "licensed";
  return "other";
}

LeaderboardView emit_leaderboard(std::vector<LeaderboardEntry> entries, const std::string& sort_key,
                                 std::span<const Filter> filters) {
  auto cmp = comparator(sort_key);
  LeaderboardView view;
  for (auto& e : entries) {
    bool keep = true;
    for (const auto& f : filters) keep = keep && matches(e, f);
    if (keep) view.table.push_back(std::move(e));
  }
  std::stable_sort(view.table.begin(), view.table.end(), cmp);
  for (const auto& e : view.table) {
    view.scatter.push_back(
        ScatterRow{e.system, e.median_rtf, e.arena_score, license_class(e.license), training_data_class(e.training_data_info)});
  }
  return view;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string table_csv(std::span<const LeaderboardEntry> rows) {
  std::string out = "system,arena_score,ci_low,ci_high,votes,median_rtf,provider,license,training_data_info,both_bad_rate\n";
  for (const auto& e : rows) {
    out += csv_field(e.system.str()) + "," + format_double(e.arena_score) + "," + format_double(e.ci_low) + "," +
           format_double(e.ci_high) + "," + std::to_string(e.votes) + "," + opt(e.median_rtf) + "," +
           csv_field(e.provider) + "," + csv_field(e.license) + "," + csv_field(e.training_data_info) + "," +
           format_double(e.both_bad_rate) + "\n";
  }
  return out;
}

std::string scatter_csv(std::span<const ScatterRow> rows) {
  std::string out = "system,median_rtf,arena_score,license_class,training_data_class\n";
  for (const auto& r : rows) {
    out += csv_field(r.system.str()) + "," + opt(r.median_rtf) + "," + format_double(r.arena_score) + "," +
           r.license_class + "," + r.training_data_class + "\n";
  }
  return out;
}

json to_json_table(std::span<const LeaderboardEntry> rows) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json out = json::array();
  for (const auto& e : rows) {
    out.push_back({{"system", e.system.str()},
                   {"display_name", e.display_name},
                   {"arena_score", e.arena_score},
                   {"ci_low", num(e.ci_low)},
                   {"ci_high", num(e.ci_high)},
                   {"unstable", e.unstable},
                   {"votes", e.votes},
                   {"median_rtf", e.median_rtf ? json(*e.median_rtf) : json(nullptr)},
                   {"provider", e.provider},
                   {"license", e.license},
                   {"training_data_info", e.training_data_info},
                   {"access", e.access ? json(endpoint::to_string(*e.access)) : json(nullptr)},
                   {"both_bad_rate", e.both_bad_rate},
                   {"component", e.component}});
  }
  return out;
}

}  // namespace musicduel::leaderboard
