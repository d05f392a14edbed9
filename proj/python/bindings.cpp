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

// Python bindings. Structured values cross the boundary as JSON text; the
// musicduel package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "musicduel/gate.hpp"
#include "musicduel/leaderboard.hpp"
#include "musicduel/privacy.hpp"
#include "musicduel/release.hpp"
#include "musicduel/store.hpp"

namespace py = pybind11;
using namespace musicduel;

namespace {

std::vector<BattleRecord> parse_records(const std::vector<std::string>& texts) {
  std::vector<BattleRecord> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(parse_battle(std::string_view(t)));
  return out;
}

std::vector<endpoint::SystemDescriptor> parse_registry(const std::string& text) {
  std::vector<endpoint::SystemDescriptor> out;
  if (text.empty()) return out;
  for (const auto& d : json::parse(text)) out.push_back(d.get<endpoint::SystemDescriptor>());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "musicduel core";
  static py::exception<Error> error_type(m, "MusicDuelError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string text = std::string(to_string(e.code())) + ": " + e.what();
      PyErr_SetString(error_type.ptr(), text.c_str());
    }
  });

  m.def("effective_listen_seconds",
        [](const std::vector<std::pair<std::string, double>>& events, double now) {
          std::vector<ListenEvent> parsed;
          for (const auto& [kind, t] : events) parsed.push_back({listen_kind_from_string(kind), t});
          return effective_listen_seconds(parsed, now);
        },
        py::arg("events"), py::arg("now"));

  m.def("pseudonymize",
        [](const std::string& raw, const std::string& salt) {
          return privacy::pseudonymize(raw, privacy::SaltConfig(salt, "python"));
        },
        py::arg("raw"), py::arg("salt"));

  m.def("normalize_battle", [](const std::string& text) { return serialize_battle(parse_battle(std::string_view(text))); },
        py::arg("record_json"));

  m.def("validate_battle",
        [](const std::string& text, double vote_gate_seconds) {
          ValidationOptions options;
          options.vote_gate_seconds = vote_gate_seconds;
          std::vector<std::pair<std::string, std::string>> out;
          for (const auto& v : validate_battle(parse_battle(std::string_view(text)), options)) {
            out.emplace_back(v.field, v.message);
          }
          return out;
        },
        py::arg("record_json"), py::arg("vote_gate_seconds") = kDefaultVoteGateSeconds);

  m.def("analyze_prompt",
        [](const std::string& text, const std::string& rules_path) {
          auto rules = rules_path.empty() ? gate::RuleConfig::builtin() : gate::RuleConfig::load(rules_path);
          return json(gate::rule_analyze(make_prompt(text), rules)).dump();
        },
        py::arg("text"), py::arg("rules_path") = "");

  m.def("arena_score", &leaderboard::arena_score, py::arg("beta"));
  m.def("rtf", &leaderboard::rtf, py::arg("duration"), py::arg("generation_span"));

  m.def("fit_bradley_terry",
        [](const std::vector<std::string>& records) {
          auto rs = parse_records(records);
          auto fit = leaderboard::fit_bradley_terry(leaderboard::build_outcomes(rs));
          std::map<std::string, double> out;
          for (std::size_t i = 0; i < fit.systems.size(); ++i) out[fit.systems[i].str()] = fit.beta[i];
          return out;
        },
        py::arg("records"));

  m.def("leaderboard",
        [](const std::vector<std::string>& records, const std::string& registry_json, int resamples,
           std::uint64_t seed, const std::string& sort_key) {
          auto rs = parse_records(records);
          auto reg = parse_registry(registry_json);
          leaderboard::LeaderboardConfig cfg;
          cfg.n_resamples = resamples;
          cfg.bootstrap.seed = seed;
          py::gil_scoped_release release;
          auto view = leaderboard::emit_leaderboard(leaderboard::compute_leaderboard(rs, reg, cfg), sort_key);
          return leaderboard::to_json_table(view.table).dump();
        },
        py::arg("records"), py::arg("registry_json") = "", py::arg("resamples") = 1000, py::arg("seed") = 1,
        py::arg("sort_key") = "arena_score");

  m.def("store_records",
        [](const std::string& root) {
          std::vector<std::string> out;
          for (const auto& r : store::Store(root).records()) out.push_back(serialize_battle(r));
          return out;
        },
        py::arg("store_dir"));

  m.def("export_release",
        [](const std::string& period, const std::string& store_dir, const std::string& out_root, double now,
           std::size_t shard_size) {
          store::Store st(store_dir);
          auto reg = st.load_registry().value_or(std::vector<endpoint::SystemDescriptor>{});
          release::ExportOptions options;
          options.shard_size = shard_size;
          return json(release::export_release(period, st, reg, out_root, now, options)).dump();
        },
        py::arg("period"), py::arg("store_dir"), py::arg("out_root"), py::arg("now"), py::arg("shard_size") = 1000);

  m.def("verify_release",
        [](const std::string& dir) {
          auto report = release::verify_release(dir);
          return py::make_tuple(report.ok, report.problems, report.records_checked);
        },
        py::arg("release_dir"));
}
