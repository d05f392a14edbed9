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

#include <atomic>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace musicduel {

using json = nlohmann::json;

/// Fractional seconds since the Unix epoch.
using EpochSeconds = double;

enum class ErrorCode {
  kInvalidArgument,
  kOrdering,
  kConsentRequired,
  kNoOpponents,
  kGateUnavailable,
  kGateNotMet,
  kModerationRejected,
  kConflict,
  kNotFound,
  kIllegalTransition,
  kCapabilityMismatch,
  kTimeout,
  kUnavailable,
  kGenerationFailed,
  kStorage,
  kConfiguration,
  kRateLimited,
  kPeriodOpen,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. `details` carries
/// structured data for the service layer (e.g. remaining listen seconds).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, json details = nullptr);

  ErrorCode code() const { return code_; }
  const json& details() const { return details_; }
  bool retryable() const;

 private:
  ErrorCode code_;
  json details_;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual EpochSeconds now() const = 0;
};

class SystemClock final : public Clock {
 public:
  EpochSeconds now() const override;
};

/// A clock whose time can be pushed forward.
class SteppableClock : public Clock {
 public:
  virtual void advance(double seconds) = 0;
};

/// Test clock; thread-safe.
class ManualClock final : public SteppableClock {
 public:
  explicit ManualClock(EpochSeconds start = 0.0) : now_(start) {}
  EpochSeconds now() const override { return now_.load(); }
  void set(EpochSeconds t) { now_.store(t); }
  void advance(double seconds) override;

 private:
  std::atomic<double> now_;
};

/// Real elapsed time plus an adjustable offset: durations measured on it
/// are genuine while simulated waits cost nothing.
class OffsetClock final : public SteppableClock {
 public:
  explicit OffsetClock(double offset = 0.0) : offset_(offset) {}
  EpochSeconds now() const override { return base_.now() + offset_.load(); }
  void advance(double seconds) override;

 private:
  SystemClock base_;
  std::atomic<double> offset_;
};

/// Random RFC 4122 version-4 uuid, lowercase.
std::string make_uuid();

std::string to_hex(std::span<const std::uint8_t> bytes);

bool is_lower_hex(std::string_view s, std::size_t length);

/// Number of Unicode code points in a UTF-8 string (invalid bytes count as one).
std::size_t utf8_length(std::string_view s);

std::string trim(std::string_view s);

std::string to_lower(std::string_view s);

/// Formats a time or quantity with enough digits to round-trip.
std::string format_double(double value);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws kInvalidArgument on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// "YYYY-MM" for the UTC calendar month containing `t`.
std::string month_of(EpochSeconds t);

/// "YYYY-MM-DD" for the UTC day containing `t`.
std::string day_of(EpochSeconds t);

}  // namespace musicduel
