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

// Endpoint registry file:
//
//   {"systems": [
//     {"descriptor": {...SystemDescriptor...},
//      "endpoint": {"kind": "mock", "mock": "tone", "default_duration": 10}},
//     {"descriptor": {...}, "endpoint": {"kind": "http", "url": "http://host:port"}}
//   ]}
//
// Mock endpoints accept every MockOptions field; "mock" is one of tone,
// noise, slow, flaky.

#include <filesystem>
#include <memory>
#include <vector>

#include "musicduel/endpoint.hpp"

namespace musicduel::registry {

std::vector<std::shared_ptr<endpoint::Endpoint>> build_endpoints(const json& registry,
                                                                 const Clock* clock = nullptr);

/// Throws kConfiguration on unreadable or malformed files.
std::vector<std::shared_ptr<endpoint::Endpoint>> load_endpoints(const std::filesystem::path& path,
                                                                const Clock* clock = nullptr);

json read_registry(const std::filesystem::path& path);

}  // namespace musicduel::registry
