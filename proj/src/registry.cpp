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

#include "musicduel/registry.hpp"

#include <fstream>

#include "musicduel/http_endpoint.hpp"
#include "musicduel/mock_endpoints.hpp"

namespace musicduel::registry {

std::vector<std::shared_ptr<endpoint::Endpoint>> build_endpoints(const json& registry, const Clock* clock) {
  std::vector<std::shared_ptr<endpoint::Endpoint>> out;
  try {
    for (const auto& entry : registry.at("systems")) {
      const json& ep = entry.at("endpoint");
      const std::string kind = ep.at("kind").get<std::string>();
      if (kind == "mock") {
        json options = ep;
        options["descriptor"] = entry.at("descriptor");
        options["kind"] = ep.value("mock", std::string("tone"));
        out.push_back(std::make_shared<endpoint::MockEndpoint>(endpoint::mock_options_from_json(options), clock));
      } else if (kind == "http") {
        out.push_back(std::make_shared<endpoint::RemoteEndpoint>(
            ep.at("url").get<std::string>(), entry.at("descriptor").get<endpoint::SystemDescriptor>()));
      } else {
        throw Error(ErrorCode::kConfiguration, "unknown endpoint kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("malformed registry: ") + e.what());
  }
  return out;
}

json read_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfiguration, "cannot open registry " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfiguration, "registry " + path.string() + ": " + e.what());
  }
}

std::vector<std::shared_ptr<endpoint::Endpoint>> load_endpoints(const std::filesystem::path& path,
                                                                const Clock* clock) {
  return build_endpoints(read_registry(path), clock);
}

}  // namespace musicduel::registry
