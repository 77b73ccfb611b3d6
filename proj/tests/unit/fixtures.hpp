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

#ifndef CAPA_TEST_FIXTURES_HPP
#define CAPA_TEST_FIXTURES_HPP

#include <map>
#include <tuple>

#include "capa/pipeline.hpp"
#include "capa/scenario.hpp"

namespace capa::test {

inline constexpr double kPt = 1e-5;

// Reference deployment: L = 14, M = 6, P_t = 10 mA^2.
inline const Scenario& reference_scenario(std::uint64_t seed, int surfaces, double aperture = 1.0) {
  static std::map<std::tuple<std::uint64_t, int, double>, Scenario> cache;
  const auto key = std::make_tuple(seed, surfaces, aperture);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, generate_scenario(seed, surfaces, 14, 6, aperture, kPt)).first;
  }
  return it->second;
}

inline const LinkModel& reference_link(std::uint64_t seed, int surfaces, int nodes = 32) {
  static std::map<std::tuple<std::uint64_t, int, int>, LinkModel> cache;
  const auto key = std::make_tuple(seed, surfaces, nodes);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, build_link(reference_scenario(seed, surfaces), LinkOptions{nodes, {}})).first;
  }
  return it->second;
}

}  // namespace capa::test

#endif  // CAPA_TEST_FIXTURES_HPP
