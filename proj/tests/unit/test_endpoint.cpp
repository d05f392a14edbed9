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

#include <random>

#include "fixtures.hpp"
#include "musicduel/http_endpoint.hpp"
#include "musicduel/mock_endpoints.hpp"
#include "musicduel/wav.hpp"

using namespace musicduel;
using namespace musicduel::endpoint;

namespace {

SystemDescriptor system(const std::string& tag, bool lyrics, bool duration_control, double lo, double hi) {
  SystemDescriptor d = mock_descriptor(tag, "test-provider");
  d.supports_lyrics = lyrics;
  d.supports_duration = duration_control;
  d.min_duration = lo;
  d.max_duration = hi;
  return d;
}

DetailedPrompt prompt(bool instrumental, std::optional<double> duration = std::nullopt) {
  return DetailedPrompt{"test prompt", instrumental, std::nullopt, duration};
}

GenerateRequest request(bool instrumental, std::optional<double> duration = std::nullopt) {
  GenerateRequest r;
  r.detailed = prompt(instrumental, duration);
  return r;
}

std::vector<std::string> tags(const std::vector<SystemDescriptor>& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(d.key.system_tag);
  return out;
}

}  // namespace

TEST_SUITE("endpoint") {
  TEST_CASE("routing by capability") {
    // Three vocal-capable systems and four instrumental-only ones.
    std::vector<SystemDescriptor> registry = {
        system("v1", true, true, 1, 240),      system("v2", true, false, 190, 190), system("v3", true, false, 10, 60),
        system("i1", false, true, 1, 120),     system("i2", false, false, 29.952, 29.952),
        system("i3", false, false, 190, 190),  system("i4", false, false, 37, 37)};
    CHECK(tags(compatible_systems(prompt(false), registry)) == std::vector<std::string>{"v1", "v2", "v3"});
    CHECK(compatible_systems(prompt(true), registry).size() == registry.size());

    // Fixed-length systems must land within 25% of an explicit request.
    CHECK(tags(compatible_systems(prompt(true, 30.0), registry)) ==
          std::vector<std::string>{"v1", "v3", "i1", "i2", "i4"});
    CHECK_FALSE(is_compatible(prompt(true, 30.0), registry[5]));  // 190 s fixed output
    CHECK_FALSE(is_compatible(prompt(true, 30.0), system("x", false, false, 40, 40)));  // 33% off
    CHECK(is_compatible(prompt(true, 30.0), system("x", false, false, 37.5, 37.5)));    // exactly 25%
    CHECK_FALSE(is_compatible(prompt(true, 300.0), registry[0]));  // beyond duration-controlled max
  }

  TEST_CASE("relaxing a prompt never shrinks the compatible set") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> len(1.0, 300.0);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<SystemDescriptor> registry;
      for (int i = 0; i < 8; ++i) {
        double a = len(rng);
        double b = coin(rng) ? a : len(rng);
        registry.push_back(system("s" + std::to_string(i), coin(rng), coin(rng), std::min(a, b), std::max(a, b)));
      }
      double want = len(rng);
      auto strict = compatible_systems(prompt(false, want), registry).size();
      CHECK(compatible_systems(prompt(false), registry).size() >= strict);
      CHECK(compatible_systems(prompt(true, want), registry).size() >= strict);
      CHECK(compatible_systems(prompt(true), registry).size() == registry.size());
    }
  }

  TEST_CASE("descriptor invariants") {
    SystemDescriptor bad = system("b", false, false, 10, 5);
    CHECK_THROWS_AS(validate_descriptor(bad), Error);
    SystemDescriptor lyric_only = system("l", false, false, 1, 5);
    lyric_only.requires_explicit_lyrics = true;
    CHECK_THROWS_AS(validate_descriptor(lyric_only), Error);
    SystemDescriptor ok = system("o", true, true, 1, 5);
    CHECK_NOTHROW(validate_descriptor(ok));
    CHECK(json(ok).get<SystemDescriptor>() == ok);
  }

  TEST_CASE("mocks honor capabilities and are deterministic") {
    auto tone = make_tone_endpoint(system("tone", true, true, 1, 120));
    auto again = make_tone_endpoint(system("tone", true, true, 1, 120));
    auto r1 = tone->generate(request(true, 30.0));
    auto r2 = again->generate(request(true, 30.0));
    CHECK(r1.metadata.duration == 30.0);
    CHECK(r1.metadata.checksum == r2.metadata.checksum);
    CHECK(r1.audio == r2.audio);
    CHECK_NOTHROW(check_response(r1));
    auto info = wav::parse_header(r1.audio);
    REQUIRE(info.has_value());
    CHECK(info->duration() == 30.0);

    auto fixed = make_noise_endpoint(system("fixed", false, false, 29.952, 29.952), 29.952);
    CHECK(fixed->generate(request(true, 30.0)).metadata.duration == doctest::Approx(29.952).epsilon(1e-9));
    CHECK(fixed->generate(request(true)).metadata.duration == doctest::Approx(29.952).epsilon(1e-9));

    auto other = make_tone_endpoint(system("other-tag", true, true, 1, 120));
    CHECK(other->generate(request(true, 30.0)).metadata.checksum != r1.metadata.checksum);
  }

  TEST_CASE("contract violations are permanent failures") {
    auto instrumental_only = make_noise_endpoint(system("inst", false, true, 1, 60));
    try {
      instrumental_only->generate(request(false));
      FAIL("vocal request accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCapabilityMismatch);
      CHECK_FALSE(e.retryable());
    }
    SystemDescriptor needs_lyrics = system("needs", true, true, 1, 60);
    needs_lyrics.requires_explicit_lyrics = true;
    CHECK_THROWS_AS(check_request(needs_lyrics, request(false)), Error);
    GenerateRequest with_lyrics = request(false);
    with_lyrics.provisioned_lyrics = "la";
    CHECK_NOTHROW(check_request(needs_lyrics, with_lyrics));
    CHECK_THROWS_AS(check_request(system("joint", true, true, 1, 60), with_lyrics), Error);
  }

  TEST_CASE("responses are checked against their payload") {
    auto tone = make_tone_endpoint(system("tone", true, true, 1, 120));
    auto good = tone->generate(request(true, 2.0));
    auto tampered = good;
    tampered.audio[100] ^= 0xff;
    CHECK_THROWS_AS(check_response(tampered), Error);
    auto wrong_duration = good;
    wrong_duration.metadata.duration = 3.0;
    CHECK_THROWS_AS(check_response(wrong_duration), Error);
    auto backwards = good;
    backwards.metadata.system_time_completed = backwards.metadata.system_time_started - 1.0;
    CHECK_THROWS_AS(check_response(backwards), Error);
  }

  TEST_CASE("health probing") {
    auto tone = make_tone_endpoint(system("tone", true, true, 1, 120));
    CHECK(tone->health(Seconds(1.0)).healthy);
    tone->set_refuse_connections(true);
    auto refused = tone->health(Seconds(1.0));
    CHECK_FALSE(refused.healthy);
    CHECK(refused.reason == "connection refused");

    MockOptions slow;
    slow.descriptor = system("slow-health", false, true, 1, 60);
    slow.health_latency = Seconds(0.3);
    MockEndpoint probe(slow);
    auto timed_out = probe.health(Seconds(0.05));
    CHECK_FALSE(timed_out.healthy);
    CHECK(timed_out.reason == "timeout");
    CHECK(probe.health(Seconds(1.0)).healthy);
  }

  TEST_CASE("default probe budget covers the example record health check") {
    json doc = json::parse(testsupport::example_battle_text());
    double start = 0, end = 0;
    for (const auto& t : doc["timings"]) {
      if (t[0] == "health_check_riffusion-fuzz-1-0:initial_start") start = t[1];
      if (t[0] == "health_check_riffusion-fuzz-1-0:initial_end") end = t[1];
    }
    const double span = end - start;
    CHECK(span == doctest::Approx(6.617).epsilon(1e-3));
    CHECK(kDefaultHealthBudget.count() > span);
  }

  TEST_CASE("flaky endpoint caps consecutive failures") {
    auto flaky = make_flaky_endpoint(system("flaky", false, true, 1, 60), 1.0, 3, 1);
    CHECK_THROWS_AS(flaky->generate(request(true, 2.0)), Error);
    CHECK_NOTHROW(flaky->generate(request(true, 2.0)));
    CHECK_THROWS_AS(flaky->generate(request(true, 2.0)), Error);
    CHECK(flaky->injected_failures() == 2);
    CHECK(flaky->generate_calls() == 3);
  }

  TEST_CASE("slow endpoint times out at the deadline") {
    auto slow = make_slow_endpoint(system("slow", false, true, 1, 60), Seconds(0.5));
    GenerateRequest r = request(true, 2.0);
    r.deadline = Seconds(0.05);
    try {
      slow->generate(r);
      FAIL("no timeout");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kTimeout);
      CHECK(e.retryable());
    }
  }

  TEST_CASE("health tracker cool-down") {
    HealthTracker tracker(Seconds(60.0));
    SystemKey k{"a", "b"};
    CHECK(tracker.available(k, 0.0));
    tracker.mark_unhealthy(k, 100.0);
    CHECK_FALSE(tracker.available(k, 159.0));
    CHECK(tracker.available(k, 160.5));
    tracker.mark_unhealthy(k, 200.0);
    tracker.mark_healthy(k);
    CHECK(tracker.available(k, 201.0));
  }

  TEST_CASE("wire protocol round trip over loopback") {
    auto tone = make_tone_endpoint(system("wire", true, true, 1, 60), 4.0, 9);
    EndpointServer server(tone);
    int port = server.start();
    const std::string url = "http://127.0.0.1:" + std::to_string(port);

    RemoteEndpoint remote(url);
    CHECK(remote.capabilities() == tone->capabilities());
    CHECK(remote.health(Seconds(2.0)).healthy);

    auto over_wire = remote.generate(request(true, 3.0));
    CHECK(over_wire.audio == tone->render(request(true, 3.0)));
    CHECK_NOTHROW(check_response(over_wire));

    auto inst = make_noise_endpoint(system("wire-inst", false, true, 1, 60));
    EndpointServer inst_server(inst);
    RemoteEndpoint inst_remote("http://127.0.0.1:" + std::to_string(inst_server.start()));
    try {
      inst_remote.generate(request(false));
      FAIL("mismatch not reported");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCapabilityMismatch);
    }

    tone->set_refuse_connections(true);
    CHECK_FALSE(remote.health(Seconds(2.0)).healthy);
    server.stop();
    auto dead = remote.health(Seconds(0.5));
    CHECK_FALSE(dead.healthy);
    CHECK_THROWS_AS(remote.generate(request(true, 3.0)), Error);
    CHECK_THROWS_AS(RemoteEndpoint(url, Seconds(0.5)), Error);
  }

  TEST_CASE("mock options from JSON") {
    json j = {{"descriptor", system("cfg", false, true, 1, 30)},
              {"kind", "flaky"},
              {"failure_rate", 0.25},
              {"latency", 0.1},
              {"seed", 4}};
    MockOptions o = mock_options_from_json(j);
    CHECK(o.failure_rate == 0.25);
    CHECK(o.latency.count() == doctest::Approx(0.1));
    CHECK(o.seed == 4);
    CHECK_THROWS_AS(mock_options_from_json(json{{"kind", "tone"}}), Error);
  }
}
