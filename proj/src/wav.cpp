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

#include "musicduel/wav.hpp"

#include <cstring>
#include <string_view>

namespace musicduel::wav {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}
std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}
std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}
bool tag_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view tag) {
  return std::memcmp(b.data() + at, tag.data(), 4) == 0;
}

}  // namespace

std::vector<std::uint8_t> encode_pcm16(std::span<const std::int16_t> interleaved,
                                       std::uint32_t sample_rate, std::uint16_t num_channels) {
  const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, num_channels);
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * num_channels * 2);
  put_u16(out, static_cast<std::uint16_t>(num_channels * 2));
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (auto s : interleaved) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::optional<Info> parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) return std::nullopt;
  Info info;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    std::uint32_t size = get_u32(bytes, at + 4);
    std::size_t body = at + 8;
    if (tag_is(bytes, at, "fmt ")) {
      if (size < 16 || body + 16 > bytes.size()) return std::nullopt;
      info.num_channels = get_u16(bytes, body + 2);
      info.sample_rate = get_u32(bytes, body + 4);
      info.bits_per_sample = get_u16(bytes, body + 14);
      have_fmt = true;
    } else if (tag_is(bytes, at, "data")) {
      if (!have_fmt || info.num_channels == 0 || info.bits_per_sample == 0) return std::nullopt;
      std::uint64_t frame_bytes = std::uint64_t{info.num_channels} * (info.bits_per_sample / 8);
      if (frame_bytes == 0) return std::nullopt;
      info.frames = size / frame_bytes;
      return info;
    }
    at = body + size + (size & 1);
  }
  return std::nullopt;
}

}  // namespace musicduel::wav
