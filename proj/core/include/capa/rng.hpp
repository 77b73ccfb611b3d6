// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CAPA_RNG_HPP
#define CAPA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace capa {

/// Portable seeded generator for scenario layouts.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform reals are built from the top 53 bits of one draw,
/// u = (x >> 11) * 2^-53 in [0, 1), so a given seed yields the same layout
/// on every conforming platform and can be replicated in other languages.
/// std::uniform_real_distribution is deliberately avoided because its
/// algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform index in [0, n).
  int index(int n) {
    const int i = static_cast<int>(std::floor(unit() * n));
    return i < n ? i : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace capa

#endif  // CAPA_RNG_HPP
