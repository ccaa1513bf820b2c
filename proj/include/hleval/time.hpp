// Copyright 2026 The hleval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HLEVAL_TIME_HPP_
#define HLEVAL_TIME_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>

namespace hleval {

/// All timestamps are integer milliseconds from the start of the dialogue.
using Ms = std::chrono::milliseconds;

inline double to_seconds(Ms t) { return static_cast<double>(t.count()) / 1000.0; }

/// Converts a seconds value carrying at most three decimals into milliseconds.
/// Returns nullopt when the value is not finite or has finer precision.
inline std::optional<Ms> seconds_to_ms(double seconds) {
  if (!std::isfinite(seconds)) return std::nullopt;
  const double scaled = seconds * 1000.0;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6 * std::max(1.0, std::abs(scaled))) {
    return std::nullopt;
  }
  return Ms{static_cast<std::int64_t>(rounded)};
}

/// Length of the intersection of [a0, a1) and [b0, b1); zero when disjoint.
inline Ms overlap(Ms a0, Ms a1, Ms b0, Ms b1) {
  const Ms lo = std::max(a0, b0);
  const Ms hi = std::min(a1, b1);
  return hi > lo ? hi - lo : Ms{0};
}

}  // namespace hleval

#endif  // HLEVAL_TIME_HPP_
