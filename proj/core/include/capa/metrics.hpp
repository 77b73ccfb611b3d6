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

#ifndef CAPA_METRICS_HPP
#define CAPA_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "capa/beamform.hpp"
#include "capa/scenario.hpp"

namespace capa {

/// Nonnegative S x K amplitude matrix Omega (units of sqrt(A^2) = A).
struct PowerAllocation {
  Eigen::MatrixXd omega;

  int num_surfaces() const { return static_cast<int>(omega.rows()); }
  int num_users() const { return static_cast<int>(omega.cols()); }

  bool nonnegative() const { return (omega.array() >= 0.0).all(); }
  /// 0 <= omega(s, j) <= sqrt(budget_s) (+ tol)
  bool within_box(std::span<const double> budgets, double tol = 0.0) const;
};

/// Thresholds taken from the equal-power allocation.
struct QosTargets {
  Eigen::VectorXd gamma_epa;  // L, linear SINR
  Eigen::VectorXd q_epa;      // M, W
};

struct MetricsReport {
  Eigen::VectorXd sinr;   // L
  Eigen::VectorXd se;     // L, bit/s/Hz
  Eigen::VectorXd q_lin;  // M, W
  Eigen::VectorXd q_nl;   // M, W
  double pc = 0.0;            // A^2
  double peak_density = 0.0;  // A^2 / m^2
  double epa_average_density = 0.0;  // P_t / total aperture
  Eigen::VectorXd per_surface_power;  // S, A^2

  static std::string csv_header();
  /// One flat row; SCHEMA.md lists the columns.
  std::string csv_row(const Scenario& scn) const;
};

/// Per-IU noise powers in user order.
std::vector<double> iu_noise(const Scenario& scn);

/// SINR of every IU (users 0..L-1 where L = noise.size()); powers add
/// incoherently across surfaces and beams.
Eigen::VectorXd sinr(const CouplingGains& gains, const PowerAllocation& alloc,
                     std::span<const double> noise);

Eigen::VectorXd spectral_efficiency(const Eigen::VectorXd& sinr);

/// A_R cos(phi_m) / (2 Z) for one energy user.
double harvest_coefficient(const User& user, const PhysicalConstants& constants);

/// Linear RF power harvested at `user` (W). Every beam contributes.
double harvested_power(const CouplingGains& gains, const PowerAllocation& alloc, const User& user,
                       const PhysicalConstants& constants);

/// Logistic rectifier model; 0 at q = 0, saturating at eh_q_max.
double nl_harvest(double q_lin, const PhysicalConstants& constants);

double power_consumption(const PowerAllocation& alloc);

/// omega = sqrt(P_t / (S K)) everywhere, so each surface spends exactly P_t / S.
PowerAllocation epa_allocation(double total_power, int num_surfaces, int num_users);

QosTargets qos_targets(const CouplingGains& gains, const Scenario& scn);

/// E||J_s(u_i)||^2 = sum_j omega(s, j)^2 |theta[s][j](u_i)|^2.
double surface_power_density(const PowerAllocation& alloc, const BeamformerSet& beams, int s, int i);

struct PeakDensity {
  double value = 0.0;
  int surface = 0;
  int node = 0;
};
PeakDensity peak_power_density(const PowerAllocation& alloc, const BeamformerSet& beams);

MetricsReport evaluate_metrics(const Scenario& scn, const CouplingGains& gains,
                               const BeamformerSet& beams, const PowerAllocation& alloc);

}  // namespace capa

#endif  // CAPA_METRICS_HPP
