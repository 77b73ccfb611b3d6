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

#include "capa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "capa/error.hpp"

namespace capa {

bool PowerAllocation::within_box(std::span<const double> budgets, double tol) const {
  if (static_cast<int>(budgets.size()) != num_surfaces()) return false;
  for (int s = 0; s < num_surfaces(); ++s) {
    const double hi = std::sqrt(budgets[s]) + tol;
    for (int j = 0; j < num_users(); ++j) {
      if (omega(s, j) < -tol || omega(s, j) > hi) return false;
    }
  }
  return true;
}

std::vector<double> iu_noise(const Scenario& scn) {
  std::vector<double> out;
  for (int l = 0; l < scn.num_iu; ++l) out.push_back(scn.users[l].noise_power);
  return out;
}

namespace {

void check_shape(const CouplingGains& gains, const PowerAllocation& alloc) {
  if (alloc.num_surfaces() != gains.num_surfaces() || alloc.num_users() != gains.num_users()) {
    throw ValidationError("allocation is " + std::to_string(alloc.num_surfaces()) + " x " +
                          std::to_string(alloc.num_users()) + " but gains are " +
                          std::to_string(gains.num_surfaces()) + " x " +
                          std::to_string(gains.num_users()));
  }
}

}  // namespace

Eigen::VectorXd sinr(const CouplingGains& gains, const PowerAllocation& alloc,
                     std::span<const double> noise) {
  check_shape(gains, alloc);
  const int L = static_cast<int>(noise.size());
  Eigen::VectorXd out(L);
  for (int l = 0; l < L; ++l) {
    double num = 0.0;
    double den = noise[l];
    for (int s = 0; s < gains.num_surfaces(); ++s) {
      for (int j = 0; j < gains.num_users(); ++j) {
        const double p = alloc.omega(s, j) * alloc.omega(s, j) * gains.magsq(s, l, j);
        (j == l ? num : den) += p;
      }
    }
    out(l) = num / den;
  }
  return out;
}

Eigen::VectorXd spectral_efficiency(const Eigen::VectorXd& sinr) {
  return sinr.unaryExpr([](double g) { return std::log2(1.0 + g); });
}

double harvest_coefficient(const User& user, const PhysicalConstants& constants) {
  return constants.receiver_aperture * user.incidence_cos / (2.0 * constants.receiver_impedance);
}

double harvested_power(const CouplingGains& gains, const PowerAllocation& alloc, const User& user,
                       const PhysicalConstants& constants) {
  check_shape(gains, alloc);
  double acc = 0.0;
  for (int s = 0; s < gains.num_surfaces(); ++s) {
    for (int j = 0; j < gains.num_users(); ++j) {
      acc += alloc.omega(s, j) * alloc.omega(s, j) * gains.magsq(s, user.id, j);
    }
  }
  return harvest_coefficient(user, constants) * acc;
}

double nl_harvest(double q_lin, const PhysicalConstants& constants) {
  const double a = constants.eh_a;
  const double b = constants.eh_b;
  const double qmax = constants.eh_q_max;
  const double eab = std::exp(a * b);
  const double varsigma = eab / (1.0 + eab);
  const double zeta = qmax / eab;
  const double expo = std::clamp(-a * (q_lin - b), -700.0, 700.0);
  const double q = qmax / (varsigma * (1.0 + std::exp(expo))) - zeta;
  return std::max(q, 0.0);
}

double power_consumption(const PowerAllocation& alloc) { return alloc.omega.squaredNorm(); }

PowerAllocation epa_allocation(double total_power, int num_surfaces, int num_users) {
  if (!(total_power > 0.0) || num_surfaces < 1 || num_users < 1) {
    throw ConfigError("EPA needs positive power, surfaces and users");
  }
  const double amp = std::sqrt(total_power / (static_cast<double>(num_surfaces) * num_users));
  return PowerAllocation{Eigen::MatrixXd::Constant(num_surfaces, num_users, amp)};
}

QosTargets qos_targets(const CouplingGains& gains, const Scenario& scn) {
  const PowerAllocation epa = epa_allocation(scn.total_power, scn.num_surfaces(), scn.num_users());
  QosTargets t;
  t.gamma_epa = sinr(gains, epa, iu_noise(scn));
  t.q_epa.resize(scn.num_eu);
  for (int m = 0; m < scn.num_eu; ++m) {
    t.q_epa(m) = harvested_power(gains, epa, scn.users[scn.num_iu + m], scn.constants);
  }
  return t;
}

double surface_power_density(const PowerAllocation& alloc, const BeamformerSet& beams, int s, int i) {
  double d = 0.0;
  for (int j = 0; j < beams.num_beams(); ++j) {
    d += alloc.omega(s, j) * alloc.omega(s, j) * std::norm(beams.beam(s, j)[i]);
  }
  return d;
}

PeakDensity peak_power_density(const PowerAllocation& alloc, const BeamformerSet& beams) {
  PeakDensity peak;
  peak.value = -1.0;
  for (int s = 0; s < beams.num_surfaces(); ++s) {
    for (int i = 0; i < beams.nodes_per_surface(); ++i) {
      const double d = surface_power_density(alloc, beams, s, i);
      if (d > peak.value) peak = {d, s, i};
    }
  }
  return peak;
}

MetricsReport evaluate_metrics(const Scenario& scn, const CouplingGains& gains,
                               const BeamformerSet& beams, const PowerAllocation& alloc) {
  MetricsReport r;
  r.sinr = sinr(gains, alloc, iu_noise(scn));
  r.se = spectral_efficiency(r.sinr);
  r.q_lin.resize(scn.num_eu);
  r.q_nl.resize(scn.num_eu);
  for (int m = 0; m < scn.num_eu; ++m) {
    r.q_lin(m) = harvested_power(gains, alloc, scn.users[scn.num_iu + m], scn.constants);
    r.q_nl(m) = nl_harvest(r.q_lin(m), scn.constants);
  }
  r.pc = power_consumption(alloc);
  r.peak_density = peak_power_density(alloc, beams).value;
  r.epa_average_density = scn.total_power / scn.total_aperture;
  r.per_surface_power = alloc.omega.rowwise().squaredNorm();
  return r;
}

std::string MetricsReport::csv_header() {
  return "S,K,L,M,total_aperture_m2,total_power_A2,pc_A2,pc_ratio,min_sinr,mean_se_bps_hz,"
         "min_q_lin_W,sum_q_nl_W,peak_density_A2_per_m2,epa_avg_density_A2_per_m2,peak_ratio,"
         "max_surface_power_A2";
}

std::string MetricsReport::csv_row(const Scenario& scn) const {
  std::ostringstream os;
  os.precision(17);
  os << scn.num_surfaces() << ',' << scn.num_users() << ',' << scn.num_iu << ',' << scn.num_eu
     << ',' << scn.total_aperture << ',' << scn.total_power << ',' << pc << ','
     << pc / scn.total_power << ',' << (sinr.size() ? sinr.minCoeff() : 0.0) << ','
     << (se.size() ? se.mean() : 0.0) << ',' << (q_lin.size() ? q_lin.minCoeff() : 0.0) << ','
     << q_nl.sum() << ',' << peak_density << ',' << epa_average_density << ','
     << peak_density / epa_average_density << ',' << per_surface_power.maxCoeff();
  return os.str();
}

}  // namespace capa
