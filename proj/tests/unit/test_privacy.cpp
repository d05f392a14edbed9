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
#include <regex>
#include <set>

#include "fixtures.hpp"
#include "musicduel/privacy.hpp"
#include "reference_sha256.hpp"

using namespace musicduel;
using namespace musicduel::privacy;

namespace {

std::string random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::string s(n, '\0');
  for (auto& c : s) c = static_cast<char>(byte(rng));
  return s;
}

}  // namespace

TEST_SUITE("privacy") {
  TEST_CASE("reference SHA-256 reproduces published vectors") {
    auto hex = [](const auto& d) { return to_hex(d); };
    CHECK(hex(testsupport::reference_sha256("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hex(testsupport::reference_sha256("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  }

  TEST_CASE("pseudonymize matches the reference hash on 1000 random inputs") {
    std::mt19937_64 rng(2026);
    std::uniform_int_distribution<std::size_t> len(1, 200);
    for (int i = 0; i < 1000; ++i) {
      SaltConfig cfg(random_bytes(rng, 16 + i % 48), "v1");
      std::string raw = random_bytes(rng, len(rng));
      REQUIRE(pseudonymize(raw, cfg) == testsupport::reference_pseudonym(cfg.salt(), raw));
    }
  }

  TEST_CASE("digest shape, determinism, and salt sensitivity") {
    SaltConfig a("0123456789abcdef-salt-one", "1");
    SaltConfig b("0123456789abcdef-salt-two", "2");
    const std::regex shape("^[0-9a-f]{32}$");
    std::string d1 = pseudonymize("198.51.100.23", a);
    CHECK(std::regex_match(d1, shape));
    CHECK(d1 == pseudonymize("198.51.100.23", a));
    CHECK(d1 != pseudonymize("198.51.100.23", b));
    CHECK(d1 != pseudonymize("198.51.100.24", a));
    CHECK_THROWS_AS(pseudonymize("", a), Error);
  }

  TEST_CASE("record linkage holds under one salt") {
    SaltConfig cfg = SaltConfig::generate("v1");
    std::set<std::string> digests;
    for (int i = 0; i < 2000; ++i) digests.insert(pseudonymize("10.0." + std::to_string(i / 256) + "." + std::to_string(i % 256), cfg));
    CHECK(digests.size() == 2000);
  }

  TEST_CASE("salts shorter than 16 octets are refused") {
    CHECK_THROWS_AS(SaltConfig("short", "v"), Error);
    CHECK_NOTHROW(SaltConfig(std::string(16, 'x'), "v"));
    CHECK(SaltConfig::generate("v").salt().size() >= kMinSaltBytes);
  }

  TEST_CASE("identify clears raw fields") {
    SaltConfig cfg = SaltConfig::generate("v");
    UserIdentity with_fp = identify(RawIdentity{"203.0.113.9", std::string("fp-abc")}, cfg);
    CHECK_FALSE(with_fp.ip.has_value());
    CHECK_FALSE(with_fp.fingerprint.has_value());
    CHECK(with_fp.salted_ip == pseudonymize("203.0.113.9", cfg));
    CHECK(with_fp.salted_fingerprint == pseudonymize("fp-abc", cfg));
    UserIdentity without_fp = identify(RawIdentity{"203.0.113.9", std::nullopt}, cfg);
    CHECK_FALSE(without_fp.salted_fingerprint.has_value());
  }

  TEST_CASE("scrub nulls raw identifiers and is idempotent") {
    SaltConfig cfg = SaltConfig::generate("v");
    BattleRecord r = parse_battle(std::string_view(testsupport::example_battle_text()));
    CHECK(is_scrubbed(r));
    CHECK(scrub(r, cfg) == r);

    r.prompt_user.ip = "203.0.113.50";
    r.prompt_user.salted_ip.clear();
    r.vote_user->fingerprint = "browser-77";
    CHECK_FALSE(is_scrubbed(r));
    BattleRecord once = scrub(r, cfg);
    CHECK(is_scrubbed(once));
    CHECK_FALSE(once.prompt_user.ip.has_value());
    CHECK(once.prompt_user.salted_ip == pseudonymize("203.0.113.50", cfg));
    CHECK(once.vote_user->salted_fingerprint == pseudonymize("browser-77", cfg));
    CHECK(scrub(once, cfg) == once);
    CHECK(serialize_battle(once).find("203.0.113.50") == std::string::npos);
    CHECK(serialize_battle(once).find("browser-77") == std::string::npos);
  }
}
