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

#include <set>

#include "musicduel/common.hpp"
#include "musicduel/hashing.hpp"

using namespace musicduel;

TEST_SUITE("common") {
  TEST_CASE("uuids are version-4, lowercase, and distinct") {
    std::set<std::string> seen;
    for (int i = 0; i < 200; ++i) {
      std::string u = make_uuid();
      REQUIRE(u.size() == 36);
      CHECK(u[14] == '4');
      CHECK(std::string("89ab").find(u[19]) != std::string::npos);
      for (char c : u) CHECK((c == '-' || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
      seen.insert(u);
    }
    CHECK(seen.size() == 200);
  }

  TEST_CASE("hex and utf8 helpers") {
    std::vector<std::uint8_t> bytes = {0x00, 0xab, 0xff};
    CHECK(to_hex(bytes) == "00abff");
    CHECK(is_lower_hex("d15300d2f8f7a122a14793494c85057d", 32));
    CHECK_FALSE(is_lower_hex("D15300d2f8f7a122a14793494c85057d", 32));
    CHECK_FALSE(is_lower_hex("abc", 32));
    CHECK(utf8_length("abc") == 3);
    CHECK(utf8_length("m\xc3\xbasica") == 6);
    CHECK(trim("  a b \n") == "a b");
    CHECK(to_lower("LoFi") == "lofi");
  }

  TEST_CASE("base64 known vectors and round trip") {
    auto enc = [](std::string_view s) {
      return base64_encode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    };
    // RFC 4648 test vectors.
    CHECK(enc("") == "");
    CHECK(enc("f") == "Zg==");
    CHECK(enc("fo") == "Zm8=");
    CHECK(enc("foo") == "Zm9v");
    CHECK(enc("foob") == "Zm9vYg==");
    CHECK(enc("fooba") == "Zm9vYmE=");
    CHECK(enc("foobar") == "Zm9vYmFy");
    std::vector<std::uint8_t> all(256);
    for (int i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
    CHECK(base64_decode(base64_encode(all)) == all);
    CHECK_THROWS_AS(base64_decode("@@@@"), Error);
  }

  TEST_CASE("calendar helpers use UTC") {
    CHECK(month_of(0.0) == "1970-01");
    CHECK(day_of(0.0) == "1970-01-01");
    // 2025-07-26T23:30:27Z
    CHECK(day_of(1753572627.3779469) == "2025-07-26");
    CHECK(month_of(1753572627.3779469) == "2025-07");
  }

  TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1753572627.3779469, 29.952, 1e-9, -3.5}) {
      CHECK(std::stod(format_double(v)) == v);
    }
  }

  TEST_CASE("clocks") {
    ManualClock manual(100.0);
    manual.advance(2.5);
    CHECK(manual.now() == 102.5);
    manual.set(7.0);
    CHECK(manual.now() == 7.0);

    OffsetClock offset(1000.0);
    SystemClock sys;
    double before = sys.now();
    offset.advance(50.0);
    double t = offset.now();
    CHECK(t >= before + 1050.0);
    CHECK(t < sys.now() + 1050.0 + 1.0);
  }

  TEST_CASE("retryable error codes") {
    CHECK(Error(ErrorCode::kTimeout, "x").retryable());
    CHECK(Error(ErrorCode::kGateUnavailable, "x").retryable());
    CHECK(Error(ErrorCode::kGenerationFailed, "x").retryable());
    CHECK_FALSE(Error(ErrorCode::kCapabilityMismatch, "x").retryable());
    CHECK_FALSE(Error(ErrorCode::kModerationRejected, "x").retryable());
    CHECK(to_string(ErrorCode::kGateNotMet) == "gate_not_met");
  }

  TEST_CASE("sha256 known answers") {
    // FIPS 180-2 appendix B vectors.
    CHECK(hashing::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hashing::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hashing::digest128_hex("abc") == "ba7816bf8f01cfea414140de5dae2223");
    hashing::Sha256 h;
    h.update(std::string_view("ab"));
    h.update(std::string_view("c"));
    CHECK(to_hex(h.finish()) == hashing::sha256_hex("abc"));
  }
}
