// Copyright 2026 The exrec Authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace exrec {

// Deterministic random stream. All randomness in the library goes through
// this wrapper instead of <random> distributions, whose output is
// implementation-defined and would break byte-identical reruns across
// standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Uniform in [lo, hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, bound). Modulo bias is negligible for bounds far
  // below 2^64.
  uint64_t next_index(uint64_t bound) { return engine_() % bound; }

  // Standard normal via Box-Muller.
  double next_gaussian() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    constexpr double two_pi = 6.283185307179586476925287;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(next_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace exrec
