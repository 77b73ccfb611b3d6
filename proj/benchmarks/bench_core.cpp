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

#include <benchmark/benchmark.h>

#include "capa/alopt.hpp"
#include "capa/emfield.hpp"
#include "capa/pipeline.hpp"
#include "capa/scenario.hpp"

namespace {

using namespace capa;

const Scenario& scenario(int S) {
  static std::vector<Scenario> cache;
  if (cache.empty()) {
    for (int s = 1; s <= 6; ++s) cache.push_back(generate_scenario(1, s, 14, 6, 1.0, 1e-5));
  }
  return cache[S - 1];
}

void BM_GreenDyadic(benchmark::State& state) {
  const auto c = PhysicalConstants::at_wavelength(0.1);
  Vec3 r(1.0, -2.0, 3.0);
  const Vec3 u(0.1, 0.2, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(green_dyadic(r, u, c));
    r.x() += 1e-9;
  }
}
BENCHMARK(BM_GreenDyadic);

void BM_SampleChannels(benchmark::State& state) {
  const Scenario& scn = scenario(static_cast<int>(state.range(0)));
  const int n = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sample_channels(scn, n));
}
BENCHMARK(BM_SampleChannels)->Args({1, 16})->Args({1, 32})->Args({6, 32})->Unit(benchmark::kMillisecond);

void BM_BuildLink(benchmark::State& state) {
  const Scenario& scn = scenario(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_link(scn));
}
BENCHMARK(BM_BuildLink)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_AlGradient(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const Scenario& scn = scenario(S);
  const LinkModel link = build_link(scn);
  const QosModel model = QosModel::build(scn, link.gains);
  QosTargets t = qos_targets(link.gains, scn);
  t.gamma_epa *= 2.0;
  t.q_epa *= 2.0;
  ALState st;
  st.lambda_se = Eigen::VectorXd::Ones(scn.num_iu);
  st.lambda_he = Eigen::VectorXd::Ones(scn.num_eu);
  const PowerAllocation epa = epa_allocation(scn.total_power, S, scn.num_users());
  for (auto _ : state) benchmark::DoNotOptimize(al_gradient(epa, st, model, t));
}
BENCHMARK(BM_AlGradient)->Arg(1)->Arg(6);

void BM_Solve(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const Scenario& scn = scenario(S);
  const LinkModel link = build_link(scn);
  const QosTargets t = qos_targets(link.gains, scn);
  for (auto _ : state) benchmark::DoNotOptimize(solve(scn, link.gains, t));
}
BENCHMARK(BM_Solve)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
