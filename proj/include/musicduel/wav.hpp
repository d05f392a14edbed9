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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace musicduel::wav {

struct Info {
  std::uint32_t sample_rate = 0;
  std::uint16_t num_channels = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint64_t frames = 0;

  double duration() const {
    return sample_rate == 0 ? 0.0 : static_cast<double>(frames) / sample_rate;
  }
};

/// 16-bit PCM RIFF/WAVE from interleaved samples.
std::vector<std::uint8_t> encode_pcm16(std::span<const std::int16_t> interleaved,
                                       std::uint32_t sample_rate, std::uint16_t num_channels);

/// Header of a PCM WAV payload; nullopt when the bytes are not one.
std::optional<Info> parse_header(std::span<const std::uint8_t> bytes);

}  // namespace musicduel::wav
