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

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

#include "musicduel/gate.hpp"
#include "musicduel/http_endpoint.hpp"
#include "musicduel/leaderboard.hpp"
#include "musicduel/mock_endpoints.hpp"
#include "musicduel/orchestrator.hpp"
#include "musicduel/registry.hpp"
#include "musicduel/release.hpp"
#include "musicduel/service.hpp"
#include "musicduel/simulate.hpp"
#include "musicduel/store.hpp"

using namespace musicduel;

namespace {

std::shared_ptr<gate::AnalyzerBackend> make_analyzer(const std::string& rules_path, const std::string& analyzer_url) {
  if (!analyzer_url.empty()) {
    gate::RemoteAnalyzerConfig cfg;
    cfg.base_url = analyzer_url;
    cfg.instruction_template = gate::kDefaultInstructionTemplate;
    return std::make_shared<gate::RemoteAnalyzer>(cfg);
  }
  return std::make_shared<gate::RuleAnalyzer>(rules_path.empty() ? gate::RuleConfig::builtin()
                                                                 : gate::RuleConfig::load(rules_path));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kStorage, "cannot write " + path);
  out << text;
}

std::vector<endpoint::SystemDescriptor> registry_for(const store::Store& st, const std::string& registry_path) {
  if (!registry_path.empty()) {
    std::vector<endpoint::SystemDescriptor> out;
    for (const auto& entry : registry::read_registry(registry_path).at("systems")) {
      out.push_back(entry.at("descriptor").get<endpoint::SystemDescriptor>());
    }
    return out;
  }
  return st.load_registry().value_or(std::vector<endpoint::SystemDescriptor>{});
}

std::function<void()> g_stop;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"musicduel: live pairwise text-to-music evaluation"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the gateway HTTP service");
  std::string registry_path;
  std::string store_dir = "musicduel-store";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string rules_path;
  std::string analyzer_url;
  orchestrator::GatewayConfig gw_cfg;
  double deadline = gw_cfg.generate_deadline.count();
  double idle = 3600.0;
  serve->add_option("--registry", registry_path, "Endpoint registry JSON")->required();
  serve->add_option("--store", store_dir, "Store directory");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--rules", rules_path, "Rule file for the prompt gate (default: built in)");
  serve->add_option("--analyzer-url", analyzer_url, "Remote analysis service instead of rules");
  serve->add_option("--gate-seconds", gw_cfg.vote_gate_seconds, "Listening required per side before voting");
  serve->add_option("--deadline", deadline, "Generation deadline in seconds");
  serve->add_option("--retries", gw_cfg.max_retries, "Retries per generation");
  serve->add_option("--idle-finalize", idle, "Finalize battles idle this many seconds");

  // mock-endpoint
  auto* mock = app.add_subcommand("mock-endpoint", "Serve one mock generation system over HTTP");
  std::string mock_config;
  std::string mock_kind = "tone";
  std::string mock_tag = "mock-tone";
  std::string mock_provider = "musicduel";
  int mock_port = 9100;
  mock->add_option("--config", mock_config, "MockOptions JSON (descriptor, kind, latency, ...)");
  mock->add_option("--kind", mock_kind, "tone, noise, slow, or flaky");
  mock->add_option("--tag", mock_tag);
  mock->add_option("--provider", mock_provider);
  mock->add_option("--host", host);
  mock->add_option("--port", mock_port);

  // export
  auto* exp = app.add_subcommand("export", "Write the public release for a closed month");
  std::string period;
  std::string out_root = "release";
  std::size_t shard_size = 1000;
  exp->add_option("--store", store_dir)->required();
  exp->add_option("--period", period, "YYYY-MM")->required();
  exp->add_option("--out", out_root, "Release root directory");
  exp->add_option("--registry", registry_path, "Registry JSON (default: the store's copy)");
  exp->add_option("--shard-size", shard_size);

  // verify
  auto* ver = app.add_subcommand("verify", "Check a release directory");
  std::string release_dir;
  ver->add_option("--release", release_dir, "release/<YYYY-MM>")->required();

  // leaderboard
  auto* lb = app.add_subcommand("leaderboard", "Fit and emit the leaderboard");
  std::string sort_key = "arena_score";
  std::vector<std::string> filters;
  std::string table_out = "table.csv";
  std::string scatter_out;
  int resamples = 1000;
  std::uint64_t seed = 1;
  lb->add_option("--store", store_dir)->required();
  lb->add_option("--period", period, "Only battles voted in YYYY-MM");
  lb->add_option("--sort", sort_key, "Sort key");
  lb->add_option("--filter", filters, "field=value (access, provider, license)");
  lb->add_option("--out", table_out);
  lb->add_option("--scatter", scatter_out);
  lb->add_option("--registry", registry_path);
  lb->add_option("--resamples", resamples);
  lb->add_option("--seed", seed);

  // simulate
  auto* simc = app.add_subcommand("simulate", "Drive scripted battles against a registry into a store");
  sim::SimulationOptions sim_opts;
  double start_time = 0.0;
  simc->add_option("--registry", registry_path)->required();
  simc->add_option("--store", store_dir)->required();
  simc->add_option("--battles", sim_opts.battles);
  simc->add_option("--seed", sim_opts.seed);
  simc->add_option("--start", start_time, "Epoch seconds of the first battle (default: now)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      gw_cfg.generate_deadline = endpoint::Seconds(deadline);
      auto st = std::make_shared<store::Store>(store_dir);
      auto gw = std::make_shared<orchestrator::Gateway>(gw_cfg, make_analyzer(rules_path, analyzer_url),
                                                        registry::load_endpoints(registry_path),
                                                        privacy::SaltConfig::from_env(), st);
      service::Service svc(gw);
      std::atomic<bool> running{true};
      std::thread reaper([&] {
        while (running.load()) {
          std::this_thread::sleep_for(std::chrono::seconds(1));
          try {
            gw->finalize_idle(gw->clock().now(), idle);
          } catch (const std::exception& e) {
            std::cerr << "finalize: " << e.what() << "\n";
          }
        }
      });
      g_stop = [&] { svc.stop(); };
      std::signal(SIGINT, [](int) { if (g_stop) g_stop(); });
      std::signal(SIGTERM, [](int) { if (g_stop) g_stop(); });
      std::cerr << "musicduel serving on " << host << ":" << port << "\n";
      svc.listen(host, port);
      running = false;
      reaper.join();
      gw->finalize_all();
      return 0;
    }

    if (*mock) {
      endpoint::MockOptions opts;
      if (!mock_config.empty()) {
        std::ifstream in(mock_config);
        if (!in) throw Error(ErrorCode::kConfiguration, "cannot open " + mock_config);
        opts = endpoint::mock_options_from_json(json::parse(in));
      } else {
        json j{{"descriptor", endpoint::mock_descriptor(mock_tag, mock_provider)}, {"kind", mock_kind}};
        if (mock_kind == "slow") j["latency"] = 2.0;
        if (mock_kind == "flaky") j["failure_rate"] = 0.3;
        opts = endpoint::mock_options_from_json(j);
      }
      endpoint::EndpointServer server(std::make_shared<endpoint::MockEndpoint>(opts));
      std::cerr << "mock endpoint " << opts.descriptor.key.str() << " on " << host << ":" << mock_port << "\n";
      server.listen(host, mock_port);
      return 0;
    }

    if (*exp) {
      store::Store st(store_dir);
      auto reg = registry_for(st, registry_path);
      release::ExportOptions options;
      options.shard_size = shard_size;
      auto manifest = release::export_release(period, st, reg, out_root, SystemClock().now(), options);
      std::cout << json(manifest).dump(2) << "\n";
      return 0;
    }

    if (*ver) {
      auto report = release::verify_release(release_dir);
      for (const auto& p : report.problems) std::cout << "PROBLEM " << p << "\n";
      std::cout << (report.ok ? "OK" : "FAILED") << " (" << report.records_checked << " records)\n";
      return report.ok ? 0 : 1;
    }

    if (*lb) {
      store::Store st(store_dir);
      auto records = st.records();
      if (!period.empty()) {
        auto [start, end] = release::period_bounds(period);
        std::erase_if(records, [&](const BattleRecord& r) {
          return !r.vote || r.vote->preference_time < start || r.vote->preference_time >= end;
        });
      }
      std::vector<leaderboard::Filter> parsed;
      for (const auto& f : filters) parsed.push_back(leaderboard::parse_filter(f));
      leaderboard::LeaderboardConfig cfg;
      cfg.n_resamples = resamples;
      cfg.bootstrap.seed = seed;
      auto reg = registry_for(st, registry_path);
      auto view = leaderboard::emit_leaderboard(leaderboard::compute_leaderboard(records, reg, cfg), sort_key, parsed);
      write_text(table_out, leaderboard::table_csv(view.table));
      if (!scatter_out.empty()) write_text(scatter_out, leaderboard::scatter_csv(view.scatter));
      std::cout << leaderboard::table_csv(view.table);
      return 0;
    }

    if (*simc) {
      OffsetClock clock(start_time > 0.0 ? start_time - SystemClock().now() : 0.0);
      auto st = std::make_shared<store::Store>(store_dir, &clock);
      orchestrator::GatewayConfig cfg;
      cfg.seed = sim_opts.seed;
      cfg.rate_limit_burst = 1e9;
      orchestrator::Gateway gw(cfg, make_analyzer("", ""), registry::load_endpoints(registry_path, &clock),
                               privacy::SaltConfig::from_env(), st, &clock);
      auto report = sim::run(gw, clock, sim_opts);
      std::cout << json{{"completed", report.completed}, {"failed", report.failed}, {"rejected", report.rejected}}.dump()
                << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
