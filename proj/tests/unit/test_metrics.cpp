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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "capa/metrics.hpp"
#include "fixtures.hpp"

using namespace capa;

namespace {

int count_columns(const std::string& line) { return 1 + static_cast<int>(std::count(line.begin(), line.end(), ',')); }

}  // namespace

TEST_CASE("EPA allocation") {
  const PowerAllocation epa = epa_allocation(10e-6, 2, 20);
  CHECK(epa.omega.rows() == 2);
  CHECK(epa.omega.cols() == 20);
  CHECK((epa.omega.array().square() - 2.5e-7).abs().maxCoeff() < 1e-21);
  for (int s = 0; s < 2; ++s) CHECK(epa.omega.row(s).squaredNorm() == doctest::Approx(5e-6).epsilon(1e-14));
  CHECK(power_consumption(epa) == doctest::Approx(10e-6).epsilon(1e-14));
  const std::vector<double> budgets(2, 5e-6);
  CHECK(epa.within_box(budgets));
  CHECK(epa.nonnegative());
  CHECK(power_consumption(PowerAllocation{Eigen::MatrixXd::Zero(3, 4)}) == 0.0);
}

TEST_CASE("SINR reductions") {
  CouplingGains g(1, 1);
  g.set(0, 0, 0, cdouble(3.0, 4.0));
  const std::vector<double> noise{1e-9};
  const PowerAllocation a{Eigen::MatrixXd::Constant(1, 1, 1e-3)};
  CHECK(sinr(g, a, noise)(0) == doctest::Approx(1e-6 * 25.0 / 1e-9).epsilon(1e-14));
  CHECK(sinr(g, PowerAllocation{Eigen::MatrixXd::Zero(1, 1)}, noise)(0) == 0.0);

  const Scenario& scn = test::reference_scenario(1, 3);
  const LinkModel& link = test::reference_link(1, 3);
  const PowerAllocation epa = epa_allocation(test::kPt, 3, 20);
  const Eigen::VectorXd g1 = sinr(link.gains, epa, iu_noise(scn));
  const Eigen::VectorXd g2 = sinr(link.gains, PowerAllocation{2.0 * epa.omega}, iu_noise(scn));
  CHECK((g2.array() > g1.array()).all());
}

TEST_CASE("spectral efficiency") {
  Eigen::VectorXd g(3);
  g << 0.0, 1.0, 3.0;
  const Eigen::VectorXd r = spectral_efficiency(g);
  CHECK(r(0) == 0.0);
  CHECK(r(1) == 1.0);
  CHECK(r(2) == 2.0);
}

TEST_CASE("linear harvesting") {
  const Scenario& scn = test::reference_scenario(2, 2);
  const LinkModel& link = test::reference_link(2, 2);
  const PowerAllocation epa = epa_allocation(test::kPt, 2, 20);
  User eu = scn.users[15];
  CHECK(harvested_power(link.gains, PowerAllocation{Eigen::MatrixXd::Zero(2, 20)}, eu, scn.constants) == 0.0);
  const double q1 = harvested_power(link.gains, epa, eu, scn.constants);
  const double q2 = harvested_power(link.gains, PowerAllocation{2.0 * epa.omega}, eu, scn.constants);
  CHECK(q1 > 0.0);
  CHECK(q2 == doctest::Approx(4.0 * q1).epsilon(1e-14));
  eu.incidence_cos = 0.0;
  CHECK(harvested_power(link.gains, epa, eu, scn.constants) == 0.0);
}

TEST_CASE("rectifier model") {
  const auto c = PhysicalConstants::at_wavelength(0.1);
  CHECK(std::abs(nl_harvest(0.0, c)) <= 1e-18);
  CHECK(nl_harvest(0.0022, c) == doctest::Approx(0.01155740199118512).epsilon(1e-12));
  CHECK(nl_harvest(1.0, c) == doctest::Approx(c.eh_q_max).epsilon(1e-12));
  CHECK(nl_harvest(1e6, c) <= c.eh_q_max * (1.0 + 1e-14));
  double prev = -1.0;
  for (double q = 0.0; q < 0.02; q += 1e-5) {
    const double v = nl_harvest(q, c);
    CHECK(v >= prev);
    CHECK(v >= 0.0);
    CHECK(v <= c.eh_q_max * (1.0 + 1e-14));
    prev = v;
  }
}

TEST_CASE("QoS targets") {
  const Scenario& scn = test::reference_scenario(3, 2);
  const LinkModel& link = test::reference_link(3, 2);
  const QosTargets t = qos_targets(link.gains, scn);
  CHECK((t.gamma_epa.array() >= 0.0).all());
  CHECK((t.q_epa.array() >= 0.0).all());

  Scenario doubled = scn;
  doubled.total_power *= 2.0;
  for (auto& s : doubled.surfaces) s.power_budget *= 2.0;
  const QosTargets t2 = qos_targets(link.gains, doubled);
  for (int m = 0; m < 6; ++m) CHECK(t2.q_epa(m) == doctest::Approx(2.0 * t.q_epa(m)).epsilon(1e-14));
  CHECK((t2.gamma_epa.array() > t.gamma_epa.array()).all());
}

TEST_CASE("power density") {
  const LinkModel& link = test::reference_link(1, 2);
  const Eigen::MatrixXd omega = Eigen::MatrixXd::Constant(2, 20, std::sqrt(test::kPt / 40.0));
  const PowerAllocation a{omega};
  for (int s = 0; s < 2; ++s) {
    const auto& w = link.channels.rule(s).weights;
    double radiated = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) radiated += w[i] * surface_power_density(a, link.beams, s, static_cast<int>(i));
    CHECK(radiated == doctest::Approx(omega.row(s).squaredNorm()).epsilon(1e-10));
  }
  const PeakDensity peak = peak_power_density(a, link.beams);
  // Surface average is P_s / area; the peak can only be larger.
  CHECK(peak.value >= (test::kPt / 2) / 0.5);
  CHECK(surface_power_density(a, link.beams, peak.surface, peak.node) == peak.value);
}

TEST_CASE("metrics report") {
  const Scenario& scn = test::reference_scenario(1, 2);
  const LinkModel& link = test::reference_link(1, 2);
  const PowerAllocation epa = epa_allocation(test::kPt, 2, 20);
  const MetricsReport r = evaluate_metrics(scn, link.gains, link.beams, epa);
  CHECK(r.pc == doctest::Approx(test::kPt).epsilon(1e-14));
  for (int l = 0; l < 14; ++l) CHECK(r.se(l) == std::log2(1.0 + r.sinr(l)));
  for (int m = 0; m < 6; ++m) {
    CHECK(r.q_nl(m) >= 0.0);
    CHECK(r.q_nl(m) < scn.constants.eh_q_max);
  }
  CHECK(r.epa_average_density == doctest::Approx(test::kPt / 1.0));
  CHECK(r.per_surface_power.size() == 2);
  CHECK(count_columns(MetricsReport::csv_header()) == count_columns(r.csv_row(scn)));
}
