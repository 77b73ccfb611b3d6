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

#ifndef CAPA_ORACLE_HPP
#define CAPA_ORACLE_HPP

// Brute-force references. Nothing here calls into the formulas it checks:
// SINR, harvested power and the dyadic kernel are written out again.

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "capa/alopt.hpp"
#include "capa/beamform.hpp"
#include "capa/emfield.hpp"
#include "capa/metrics.hpp"
#include "capa/scenario.hpp"

namespace capa {

struct OracleReport {
  std::string name;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  long samples = 0;
  double tolerance = 0.0;  // applies to max_rel_err
  bool pass = false;

  static std::string csv_header();
  std::string csv_row() const;
};

/// Appends rows to `path`, writing the header first when the file is new.
void append_checks_csv(const std::filesystem::path& path, std::span<const OracleReport> reports);

using AllocationFunction = std::function<double(const Eigen::MatrixXd&)>;

/// Central differences (f(x + h e) - f(x - h e)) / 2h per coordinate with
/// h = step * max(1, |x|). Throws DomainError unless every coordinate sits
/// at least 2h inside [0, sqrt(budget_s)].
Eigen::MatrixXd fd_gradient(const AllocationFunction& f, const Eigen::MatrixXd& omega, double step,
                            std::span<const double> budgets);

/// Normwise relative error ||a - b||_inf / ||b||_inf (absolute when b == 0).
double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Written-out dyadic Green's function, element by element.
Mat3c green_dyadic_reference(const Vec3& r, const Vec3& u, double wavenumber, double impedance);

struct RefinedChannels {
  int nodes_per_side = 0;
  ChannelSet channels;
  std::vector<CorrelationMatrix> correlations;
};

/// Channels and correlations on a rule with nodes_per_side * factor nodes.
RefinedChannels refine_quadrature(const Scenario& scn, int nodes_per_side, int factor = 2);

/// Largest change of any A^(s) entry between N and 2N nodes, measured against
/// sqrt(A_kk A_k'k') of the finer rule.
OracleReport quadrature_self_convergence(const Scenario& scn, int nodes_per_side, double tolerance);

struct GridSearchResult {
  bool feasible = false;  // false: infeasible at this resolution
  Eigen::MatrixXd omega;  // best grid point, S x K
  double pc = 0.0;
  double spacing = 0.0;   // grid step on the widest axis
  long evaluated = 0;
};

struct GridSearchOptions {
  int grid_n = 200;      // points per coordinate
  double epsilon = 1e-3;
  Normalization normalization = Normalization::Relative;
  bool surface_sum = false;  // also require sum_j Omega_sj^2 <= P_s
  int threads = 1;
};

/// Exhaustive search over a uniform grid on [0, sqrt(P_s)] per coordinate,
/// keeping points with max(||v_SE||, ||v_HE||) <= epsilon. Ties go to the
/// first point in scan order. Requires S * K <= 4.
GridSearchResult grid_search_pa(const Scenario& scn, const CouplingGains& gains,
                                const QosTargets& targets, const GridSearchOptions& options = {});

}  // namespace capa

#endif  // CAPA_ORACLE_HPP
