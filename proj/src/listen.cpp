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

#include <algorithm>
#include <optional>

#include "musicduel/domain.hpp"

namespace musicduel {

bool is_time_ordered(std::span<const ListenEvent> events) {
  return std::is_sorted(events.begin(), events.end(),
                        [](const ListenEvent& a, const ListenEvent& b) { return a.time < b.time; });
}

double effective_listen_seconds(std::span<const ListenEvent> events, EpochSeconds now) {
  if (!is_time_ordered(events)) {
    throw Error(ErrorCode::kOrdering, "listen events are not in time order");
  }
  double total = 0.0;
  std::optional<EpochSeconds> open;
  for (const auto& e : events) {
    switch (e.kind) {
      case ListenKind::kPlay:
        open = e.time;
        break;
      case ListenKind::kPause:
        if (open) {
          total += e.time - *open;
          open.reset();
        }
        break;
      case ListenKind::kTick:
        break;
    }
  }
  if (open) total += std::max(0.0, now - *open);
  return total;
}

}  // namespace musicduel
