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

#ifndef CAPA_ALOPT_HPP
#define CAPA_ALOPT_HPP

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "capa/beamform.hpp"
#include "capa/metrics.hpp"
#include "capa/scenario.hpp"

namespace capa {

/// Units of the augmented Lagrangian. Relative divides each hinge by its EPA
/// target (zero targets keep unit scale) and the PC term by the total power,
/// so SINR and harvested-power violations share one dimensionless tolerance.
/// Absolute keeps PC in A^2 and raw residuals.
enum class Normalization { Relative, Absolute };

/// Solver knobs. Defaults follow the reference experiments; the line-search
/// constants are standard choices.
struct SolveOptions {
  int memory_q = 10;
  double rho0 = 20.0;
  double beta = 10.0;
  double delta = 1e-9;    // inner step / gradient-change tolerance
  double epsilon = 1e-3;  // outer feasibility tolerance on max(||v_SE||, ||v_HE||)
  int max_inner = 300;
  int max_outer = 30;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;          // quasi-Newton line search
  int max_cauchy_backtracks = 100;  // steepest-descent path, starts at alpha = 1
  double pg_tol_factor = 1e3;       // stop when ||P(x - g) - x|| <= pg_tol_factor * delta
  Normalization normalization = Normalization::Relative;
  std::optional<double> alpha_zf;   // forwarded to the link model

  void validate() const;
};

/// Augmented-Lagrangian state of one outer iteration.
struct ALState {
  Eigen::VectorXd lambda_se;  // L
  Eigen::VectorXd lambda_he;  // M
  double rho = 20.0;
  double beta = 10.0;
  int outer_iter = 0;
};

/// The QoS side of the problem in solver-friendly form: one K x K block of
/// |g|^2 per surface (row = observing user, column = beam).
struct QosModel {
  int num_iu = 0;
  int num_eu = 0;
  Normalization normalization = Normalization::Relative;
  double pc_scale = 1.0;          // divides sum(Omega^2) in the objective
  std::vector<Eigen::MatrixXd> magsq;
  Eigen::VectorXd noise;          // L
  Eigen::VectorXd harvest_coeff;  // M, A_R cos(phi) / (2 Z)

  static QosModel build(const Scenario& scn, const CouplingGains& gains,
                        Normalization norm = Normalization::Relative);

  int num_surfaces() const { return static_cast<int>(magsq.size()); }
  int num_users() const { return num_iu + num_eu; }
};

/// SINR pieces and harvested power at one allocation.
struct QosEvaluation {
  Eigen::VectorXd signal;        // L, numerator of the SINR
  Eigen::VectorXd denominator;   // L, interference + noise
  Eigen::VectorXd sinr;          // L
  Eigen::VectorXd harvested;     // M, W
};

QosEvaluation evaluate_qos(const Eigen::MatrixXd& omega, const QosModel& model);

/// Hinge residuals max(target - achieved, 0), divided by the target under
/// Normalization::Relative.
struct Violations {
  Eigen::VectorXd se;  // L
  Eigen::VectorXd he;  // M

  double norm_max() const;  // max(||se||, ||he||)
};

Violations violations(const QosEvaluation& eval, const QosTargets& targets,
                      Normalization norm = Normalization::Relative);

/// f(Omega) = sum Omega^2 + lambda_SE.v_SE + rho/2 ||v_SE||^2
///            + beta (lambda_HE.v_HE + rho/2 ||v_HE||^2)
/// with hinge residuals v.
double al_objective(const PowerAllocation& alloc, const ALState& state, const QosModel& model,
                    const QosTargets& targets);

/// Closed-form gradient of al_objective (S x K). Interference terms enter
/// with a negative SINR derivative; satisfied constraints contribute zero.
Eigen::MatrixXd al_gradient(const PowerAllocation& alloc, const ALState& state,
                            const QosModel& model, const QosTargets& targets);

// ---------------------------------------------------------------------------
// Box-constrained quasi-Newton machinery on flattened (column-major) vectors.

/// Lower bound is 0 everywhere.
struct Box {
  Eigen::VectorXd upper;

  /// Entry (s, j) of an S x K allocation has upper bound sqrt(budgets[s]).
  static Box for_allocation(std::span<const double> budgets, int num_users);
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
};

struct SmoothObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Box& box);
PowerAllocation project_box(const PowerAllocation& alloc, std::span<const double> budgets);

struct CauchyResult {
  Eigen::VectorXd point;
  double value = 0.0;
  double step = 0.0;
  bool stalled = false;
};

/// Projected steepest descent P(x - alpha g) with alpha the first of
/// 1, shrink, shrink^2, ... giving a strict decrease.
CauchyResult cauchy_point(const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& grad,
                          const Box& box, const SmoothObjective& f, const SolveOptions& options);

/// Last q curvature pairs. Pairs with y^T s <= 0 are rejected.
class LbfgsMemory {
 public:
  struct Pair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
  };

  explicit LbfgsMemory(int capacity) : capacity_(capacity) {}

  bool push(const Eigen::VectorXd& s, const Eigen::VectorXd& y);
  void clear();

  int size() const { return static_cast<int>(pairs_.size()); }
  int capacity() const { return capacity_; }
  double h0_scale() const { return h0_scale_; }
  const std::deque<Pair>& pairs() const { return pairs_; }
  bool curvature_ok() const;

 private:
  int capacity_;
  double h0_scale_ = 1.0;
  std::deque<Pair> pairs_;
};

/// p = -H grad via the two-loop recursion, H0 = h0_scale * I.
Eigen::VectorXd two_loop_direction(const LbfgsMemory& memory, const Eigen::VectorXd& grad);

struct LineSearchResult {
  double alpha = 0.0;
  Eigen::VectorXd point;
  double value = 0.0;
  bool flipped = false;  // accepted along -p
  bool stalled = false;
};

/// Backtracking on phi(alpha) = f(P(xc + alpha p)) from alpha = 1 with the
/// Armijo test against the projected step; falls back to -p once.
LineSearchResult line_search(const Eigen::VectorXd& xc, double fc, const Eigen::VectorXd& gc,
                             const Eigen::VectorXd& p, const Box& box, const SmoothObjective& f,
                             const SolveOptions& options);

enum class InnerStop { StepTolerance, GradientTolerance, ProjectedGradient, Stall, IterationCap };
const char* to_string(InnerStop stop);

struct InnerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  InnerStop stop = InnerStop::IterationCap;
  std::vector<double> values;  // f at x0 and after every accepted iteration
  int flips = 0;
  int rejected_pairs = 0;
  bool curvature_ok = true;   // every stored pair had y^T s > 0
  double max_box_violation = 0.0;
};

/// Projected L-BFGS loop: Cauchy point, two-loop direction, projected line
/// search, curvature update. `memory` (optional) receives the final pairs.
InnerResult lbfgsb_minimize(const Eigen::VectorXd& x0, const SmoothObjective& f, const Box& box,
                            const SolveOptions& options, LbfgsMemory* memory = nullptr);

// ---------------------------------------------------------------------------

enum class SolveStatus { Converged, IterationCap, Degenerate };
const char* to_string(SolveStatus status);

struct OuterRecord {
  int iter = 0;
  double objective = 0.0;  // inner optimum of the AL function
  double pc = 0.0;
  double max_v_se = 0.0;   // largest single residual
  double max_v_he = 0.0;
  double norm_v_se = 0.0;  // Euclidean norms used for convergence
  double norm_v_he = 0.0;
  double rho = 0.0;        // penalty used during this iteration
  int inner_iters = 0;
  InnerStop inner_stop = InnerStop::IterationCap;
  bool inner_monotone = true;
  bool inner_curvature_ok = true;
  bool inner_in_box = true;
  bool rescaled = false;   // per-surface sum safeguard fired after this iteration
};

struct SolveResult {
  PowerAllocation omega_star;
  double pc = 0.0;
  Eigen::VectorXd violations_se;
  Eigen::VectorXd violations_he;
  Eigen::VectorXd surface_excess;  // max(sum_j omega_sj^2 - P_s, 0)
  std::vector<OuterRecord> trace;
  SolveStatus status = SolveStatus::IterationCap;
  ALState final_state;
};

/// Augmented-Lagrangian outer loop around lbfgsb_minimize, started at EPA.
SolveResult solve(const Scenario& scn, const CouplingGains& gains, const QosTargets& targets,
                  const SolveOptions& options = {});

std::string trace_csv_header();
std::string trace_csv(const SolveResult& result);

}  // namespace capa

#endif  // CAPA_ALOPT_HPP
