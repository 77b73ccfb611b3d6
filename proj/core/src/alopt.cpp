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

#include "capa/alopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "capa/error.hpp"

namespace capa {

void SolveOptions::validate() const {
  if (memory_q < 1) throw ConfigError("memory_q must be >= 1");
  if (!(rho0 > 0.0) || !(beta > 0.0)) throw ConfigError("rho0 and beta must be > 0");
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (max_inner < 1 || max_outer < 1) throw ConfigError("iteration caps must be >= 1");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("armijo_c must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("shrink must lie in (0, 1)");
  if (max_backtracks < 1 || max_cauchy_backtracks < 1) throw ConfigError("backtrack caps must be >= 1");
  if (alpha_zf && !(*alpha_zf > 0.0)) throw ConfigError("alpha_zf must be > 0");
}

QosModel QosModel::build(const Scenario& scn, const CouplingGains& gains, Normalization norm) {
  const int S = gains.num_surfaces();
  const int K = gains.num_users();
  if (S != scn.num_surfaces() || K != scn.num_users()) {
    throw ValidationError("coupling gains do not match the scenario");
  }
  QosModel m;
  m.num_iu = scn.num_iu;
  m.num_eu = scn.num_eu;
  m.normalization = norm;
  m.pc_scale = norm == Normalization::Relative ? scn.total_power : 1.0;
  m.magsq.assign(S, Eigen::MatrixXd(K, K));
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) m.magsq[s](k, j) = gains.magsq(s, k, j);
    }
  }
  m.noise.resize(scn.num_iu);
  for (int l = 0; l < scn.num_iu; ++l) m.noise(l) = scn.users[l].noise_power;
  m.harvest_coeff.resize(scn.num_eu);
  for (int e = 0; e < scn.num_eu; ++e) {
    m.harvest_coeff(e) = harvest_coefficient(scn.users[scn.num_iu + e], scn.constants);
  }
  return m;
}

QosEvaluation evaluate_qos(const Eigen::MatrixXd& omega, const QosModel& model) {
  const int S = model.num_surfaces();
  const int K = model.num_users();
  const int L = model.num_iu;
  const Eigen::MatrixXd power = omega.array().square().matrix();

  QosEvaluation ev;
  ev.signal = Eigen::VectorXd::Zero(L);
  ev.denominator = model.noise;
  ev.harvested = Eigen::VectorXd::Zero(model.num_eu);
  for (int s = 0; s < S; ++s) {
    const Eigen::MatrixXd& g2 = model.magsq[s];
    for (int l = 0; l < L; ++l) {
      for (int j = 0; j < K; ++j) {
        const double p = power(s, j) * g2(l, j);
        if (j == l) {
          ev.signal(l) += p;
        } else {
          ev.denominator(l) += p;
        }
      }
    }
    for (int e = 0; e < model.num_eu; ++e) {
      ev.harvested(e) += g2.row(L + e).dot(power.row(s));
    }
  }
  ev.sinr = ev.signal.cwiseQuotient(ev.denominator);
  ev.harvested = ev.harvested.cwiseProduct(model.harvest_coeff);
  return ev;
}

double Violations::norm_max() const {
  return std::max(se.size() ? se.norm() : 0.0, he.size() ? he.norm() : 0.0);
}

namespace {

Eigen::VectorXd residual_scale(const Eigen::VectorXd& target, Normalization norm) {
  if (norm == Normalization::Absolute) return Eigen::VectorXd::Ones(target.size());
  return target.unaryExpr([](double t) { return t > 0.0 ? t : 1.0; });
}

}  // namespace

Violations violations(const QosEvaluation& eval, const QosTargets& targets, Normalization norm) {
  Violations v;
  v.se = (targets.gamma_epa - eval.sinr).cwiseMax(0.0).cwiseQuotient(residual_scale(targets.gamma_epa, norm));
  v.he = (targets.q_epa - eval.harvested).cwiseMax(0.0).cwiseQuotient(residual_scale(targets.q_epa, norm));
  return v;
}

double al_objective(const PowerAllocation& alloc, const ALState& state, const QosModel& model,
                    const QosTargets& targets) {
  const QosEvaluation ev = evaluate_qos(alloc.omega, model);
  const Violations v = violations(ev, targets, model.normalization);
  const double se_pen = state.lambda_se.dot(v.se) + 0.5 * state.rho * v.se.squaredNorm();
  const double he_pen = state.lambda_he.dot(v.he) + 0.5 * state.rho * v.he.squaredNorm();
  return alloc.omega.squaredNorm() / model.pc_scale + se_pen + state.beta * he_pen;
}

Eigen::MatrixXd al_gradient(const PowerAllocation& alloc, const ALState& state,
                            const QosModel& model, const QosTargets& targets) {
  const Eigen::MatrixXd& omega = alloc.omega;
  const int S = model.num_surfaces();
  const int K = model.num_users();
  const int L = model.num_iu;
  const QosEvaluation ev = evaluate_qos(omega, model);
  const Violations v = violations(ev, targets, model.normalization);
  const Eigen::VectorXd se_scale = residual_scale(targets.gamma_epa, model.normalization);
  const Eigen::VectorXd he_scale = residual_scale(targets.q_epa, model.normalization);

  Eigen::MatrixXd grad = (2.0 / model.pc_scale) * omega;
  for (int l = 0; l < L; ++l) {
    if (!(v.se(l) > 0.0)) continue;
    const double w = (state.lambda_se(l) + state.rho * v.se(l)) / se_scale(l);
    const double den = ev.denominator(l);
    const double own = 2.0 / den;                             // d Gamma / d Omega_sl = own * Omega_sl * |g_sll|^2
    const double cross = 2.0 * ev.signal(l) / (den * den);    // interferers lower Gamma
    for (int s = 0; s < S; ++s) {
      const Eigen::MatrixXd& g2 = model.magsq[s];
      for (int j = 0; j < K; ++j) {
        const double dgamma = j == l ? own * omega(s, l) * g2(l, l) : -cross * omega(s, j) * g2(l, j);
        grad(s, j) -= w * dgamma;
      }
    }
  }
  for (int e = 0; e < model.num_eu; ++e) {
    if (!(v.he(e) > 0.0)) continue;
    const double u = (state.lambda_he(e) + state.rho * v.he(e)) / he_scale(e);
    const double c = 2.0 * model.harvest_coeff(e);
    for (int s = 0; s < S; ++s) {
      const Eigen::MatrixXd& g2 = model.magsq[s];
      for (int j = 0; j < K; ++j) grad(s, j) -= state.beta * u * c * omega(s, j) * g2(L + e, j);
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------

Box Box::for_allocation(std::span<const double> budgets, int num_users) {
  const int S = static_cast<int>(budgets.size());
  Box box;
  box.upper.resize(static_cast<Eigen::Index>(S) * num_users);
  for (int j = 0; j < num_users; ++j) {
    for (int s = 0; s < S; ++s) box.upper(s + j * S) = std::sqrt(budgets[s]);
  }
  return box;
}

bool Box::contains(const Eigen::VectorXd& x, double tol) const {
  return x.size() == upper.size() && (x.array() >= -tol).all() && (x.array() <= upper.array() + tol).all();
}

Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Box& box) {
  return x.cwiseMax(0.0).cwiseMin(box.upper);
}

PowerAllocation project_box(const PowerAllocation& alloc, std::span<const double> budgets) {
  PowerAllocation out = alloc;
  for (int s = 0; s < alloc.num_surfaces(); ++s) {
    const double hi = std::sqrt(budgets[s]);
    out.omega.row(s) = alloc.omega.row(s).cwiseMax(0.0).cwiseMin(hi);
  }
  return out;
}

CauchyResult cauchy_point(const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& grad,
                          const Box& box, const SmoothObjective& f, const SolveOptions& options) {
  CauchyResult out{x, fx, 0.0, true};
  if (grad.squaredNorm() == 0.0) return out;
  double alpha = 1.0;
  for (int n = 0; n < options.max_cauchy_backtracks; ++n, alpha *= options.shrink) {
    Eigen::VectorXd trial = project_box(x - alpha * grad, box);
    if (trial == x) break;  // projected path is pinned at the bounds
    const double ft = f.value(trial);
    if (ft < fx) return CauchyResult{std::move(trial), ft, alpha, false};
  }
  return out;
}

bool LbfgsMemory::push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  const double sy = s.dot(y);
  if (!(sy > 0.0) || !std::isfinite(sy)) return false;
  pairs_.push_back({s, y});
  if (static_cast<int>(pairs_.size()) > capacity_) pairs_.pop_front();
  h0_scale_ = sy / y.squaredNorm();
  return true;
}

void LbfgsMemory::clear() {
  pairs_.clear();
  h0_scale_ = 1.0;
}

bool LbfgsMemory::curvature_ok() const {
  return std::all_of(pairs_.begin(), pairs_.end(), [](const Pair& p) { return p.s.dot(p.y) > 0.0; });
}

Eigen::VectorXd two_loop_direction(const LbfgsMemory& memory, const Eigen::VectorXd& grad) {
  const auto& pairs = memory.pairs();
  const int n = memory.size();
  std::vector<double> alpha(n), rho(n);
  Eigen::VectorXd q = grad;
  for (int i = n - 1; i >= 0; --i) {
    rho[i] = 1.0 / pairs[i].y.dot(pairs[i].s);
    alpha[i] = rho[i] * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  Eigen::VectorXd r = memory.h0_scale() * q;
  for (int i = 0; i < n; ++i) {
    const double beta = rho[i] * pairs[i].y.dot(r);
    r += (alpha[i] - beta) * pairs[i].s;
  }
  return -r;
}

namespace {

// Backtracks along one direction; returns true on acceptance.
bool backtrack(const Eigen::VectorXd& xc, double fc, const Eigen::VectorXd& gc,
               const Eigen::VectorXd& p, const Box& box, const SmoothObjective& f,
               const SolveOptions& options, LineSearchResult& out) {
  double alpha = 1.0;
  for (int n = 0; n < options.max_backtracks; ++n, alpha *= options.shrink) {
    Eigen::VectorXd trial = project_box(xc + alpha * p, box);
    const Eigen::VectorXd step = trial - xc;
    if (step.squaredNorm() == 0.0) return false;
    const double ft = f.value(trial);
    if (ft < fc && ft <= fc + options.armijo_c * gc.dot(step)) {
      out.alpha = alpha;
      out.point = std::move(trial);
      out.value = ft;
      return true;
    }
  }
  return false;
}

}  // namespace

LineSearchResult line_search(const Eigen::VectorXd& xc, double fc, const Eigen::VectorXd& gc,
                             const Eigen::VectorXd& p, const Box& box, const SmoothObjective& f,
                             const SolveOptions& options) {
  LineSearchResult out;
  if (backtrack(xc, fc, gc, p, box, f, options, out)) return out;
  if (backtrack(xc, fc, gc, -p, box, f, options, out)) {
    out.flipped = true;
    return out;
  }
  out.point = xc;
  out.value = fc;
  out.stalled = true;
  return out;
}

const char* to_string(InnerStop stop) {
  switch (stop) {
    case InnerStop::StepTolerance: return "step";
    case InnerStop::GradientTolerance: return "grad_change";
    case InnerStop::ProjectedGradient: return "proj_grad";
    case InnerStop::Stall: return "stall";
    case InnerStop::IterationCap: return "inner_cap";
  }
  return "unknown";
}

InnerResult lbfgsb_minimize(const Eigen::VectorXd& x0, const SmoothObjective& f, const Box& box,
                            const SolveOptions& options, LbfgsMemory* memory) {
  LbfgsMemory local(options.memory_q);
  LbfgsMemory& mem = memory ? *memory : local;
  mem.clear();

  InnerResult res;
  Eigen::VectorXd x = project_box(x0, box);
  double fx = f.value(x);
  Eigen::VectorXd g = f.gradient(x);
  res.values.push_back(fx);
  const double pg_tol = options.pg_tol_factor * options.delta;

  for (int t = 0; t < options.max_inner; ++t) {
    if ((project_box(x - g, box) - x).norm() <= pg_tol) {
      res.stop = InnerStop::ProjectedGradient;
      break;
    }

    const CauchyResult cp = cauchy_point(x, fx, g, box, f, options);
    const Eigen::VectorXd gc = cp.stalled ? g : f.gradient(cp.point);
    const Eigen::VectorXd p = two_loop_direction(mem, gc);
    const LineSearchResult ls = line_search(cp.point, cp.value, gc, p, box, f, options);

    if (ls.stalled && cp.stalled) {
      res.stop = InnerStop::Stall;
      break;
    }
    if (ls.flipped) ++res.flips;
    const Eigen::VectorXd& x_new = ls.stalled ? cp.point : ls.point;
    const double f_new = ls.stalled ? cp.value : ls.value;
    const Eigen::VectorXd g_new = ls.stalled ? gc : f.gradient(x_new);

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    if (!mem.push(s, y)) ++res.rejected_pairs;

    x = x_new;
    fx = f_new;
    g = g_new;
    res.values.push_back(fx);
    ++res.iterations;
    const double outside = std::max({0.0, (-x.array()).maxCoeff(), (x - box.upper).maxCoeff()});
    res.max_box_violation = std::max(res.max_box_violation, outside);

    if (s.norm() <= options.delta) {
      res.stop = InnerStop::StepTolerance;
      break;
    }
    if (y.norm() <= options.delta) {
      res.stop = InnerStop::GradientTolerance;
      break;
    }
  }

  res.x = std::move(x);
  res.value = fx;
  res.curvature_ok = mem.curvature_ok();
  return res;
}

// ---------------------------------------------------------------------------

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationCap: return "iteration_cap";
    case SolveStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int rows, int cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

struct Candidate {
  Eigen::MatrixXd omega;
  double pc = 0.0;
  double violation = 0.0;
};

// Feasible points (violation <= eps) beat infeasible ones; then lower PC,
// or lower violation among infeasible points.
bool better(const Candidate& a, const Candidate& b, double eps) {
  const bool fa = a.violation <= eps;
  const bool fb = b.violation <= eps;
  if (fa != fb) return fa;
  return fa ? a.pc < b.pc : a.violation < b.violation;
}

}  // namespace

SolveResult solve(const Scenario& scn, const CouplingGains& gains, const QosTargets& targets,
                  const SolveOptions& options) {
  options.validate();
  const int S = scn.num_surfaces();
  const int K = scn.num_users();
  const QosModel model = QosModel::build(scn, gains, options.normalization);
  if (targets.gamma_epa.size() != scn.num_iu || targets.q_epa.size() != scn.num_eu) {
    throw ValidationError("QoS targets do not match the scenario");
  }

  std::vector<double> budgets;
  for (const auto& s : scn.surfaces) budgets.push_back(s.power_budget);
  SolveResult result;
  const PowerAllocation epa = epa_allocation(scn.total_power, S, K);

  // Inner iterations run on x = Omega / xs so step tolerances are relative.
  const double xs = options.normalization == Normalization::Relative ? epa.omega(0, 0) : 1.0;
  Box box = Box::for_allocation(budgets, K);
  box.upper /= xs;

  ALState state;
  state.lambda_se = Eigen::VectorXd::Zero(scn.num_iu);
  state.lambda_he = Eigen::VectorXd::Zero(scn.num_eu);
  state.rho = options.rho0;
  state.beta = options.beta;

  auto finish = [&](const Eigen::MatrixXd& omega, SolveStatus status) {
    result.omega_star = PowerAllocation{omega};
    result.pc = power_consumption(result.omega_star);
    const Violations v = violations(evaluate_qos(omega, model), targets, model.normalization);
    result.violations_se = v.se;
    result.violations_he = v.he;
    result.surface_excess.resize(S);
    for (int s = 0; s < S; ++s) {
      result.surface_excess(s) = std::max(omega.row(s).squaredNorm() - budgets[s], 0.0);
    }
    result.status = status;
    result.final_state = state;
    return result;
  };

  bool any_gain = false;
  for (const auto& m : model.magsq) any_gain = any_gain || (m.array() > 0.0).any();
  if (!any_gain) return finish(epa.omega, SolveStatus::Degenerate);

  Candidate best{epa.omega, power_consumption(epa),
                 violations(evaluate_qos(epa.omega, model), targets, model.normalization).norm_max()};
  Eigen::VectorXd x = flatten(epa.omega) / xs;
  bool rescued = false;

  for (int u = 0; u < options.max_outer; ++u) {
    state.outer_iter = u;
    const ALState frozen = state;
    SmoothObjective f;
    f.value = [&](const Eigen::VectorXd& v) -> double {
      return al_objective(PowerAllocation{unflatten(xs * v, S, K)}, frozen, model, targets);
    };
    f.gradient = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return xs * flatten(al_gradient(PowerAllocation{unflatten(xs * v, S, K)}, frozen, model, targets));
    };

    const InnerResult inner = lbfgsb_minimize(x, f, box, options);
    x = inner.x;
    Eigen::MatrixXd omega = unflatten(xs * x, S, K);
    const Violations v = violations(evaluate_qos(omega, model), targets, model.normalization);

    OuterRecord rec;
    rec.iter = u;
    rec.objective = inner.value;
    rec.pc = omega.squaredNorm();
    rec.max_v_se = v.se.size() ? v.se.maxCoeff() : 0.0;
    rec.max_v_he = v.he.size() ? v.he.maxCoeff() : 0.0;
    rec.norm_v_se = v.se.size() ? v.se.norm() : 0.0;
    rec.norm_v_he = v.he.size() ? v.he.norm() : 0.0;
    rec.rho = state.rho;
    rec.inner_iters = inner.iterations;
    rec.inner_stop = inner.stop;
    rec.inner_monotone = std::is_sorted(inner.values.rbegin(), inner.values.rend());
    rec.inner_curvature_ok = inner.curvature_ok;
    rec.inner_in_box = inner.max_box_violation == 0.0;

    state.lambda_se += state.rho * v.se;
    state.lambda_he += state.rho * v.he;
    state.rho *= 2.0;

    const double vmax = v.norm_max();
    const Candidate cand{omega, rec.pc, vmax};
    if (better(cand, best, options.epsilon)) best = cand;

    if (vmax <= options.epsilon) {
      bool exceeded = false;
      for (int s = 0; s < S; ++s) exceeded = exceeded || omega.row(s).squaredNorm() > budgets[s];
      if (exceeded && !rescued) {
        for (int s = 0; s < S; ++s) {
          const double sum = omega.row(s).squaredNorm();
          if (sum > budgets[s]) omega.row(s) *= std::sqrt(budgets[s] / sum);
        }
        x = flatten(omega) / xs;
        rescued = true;
        rec.rescaled = true;
        result.trace.push_back(rec);
        continue;
      }
      result.trace.push_back(rec);
      return finish(omega, SolveStatus::Converged);
    }
    result.trace.push_back(rec);
  }
  return finish(best.omega, SolveStatus::IterationCap);
}

std::string trace_csv_header() {
  return "u,f,pc_A2,max_v_se,max_v_he,norm_v_se,norm_v_he,rho,inner_iters,inner_stop,status";
}

std::string trace_csv(const SolveResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << trace_csv_header() << '\n';
  for (std::size_t n = 0; n < result.trace.size(); ++n) {
    const auto& r = result.trace[n];
    const bool last = n + 1 == result.trace.size();
    os << r.iter << ',' << r.objective << ',' << r.pc << ',' << r.max_v_se << ',' << r.max_v_he
       << ',' << r.norm_v_se << ',' << r.norm_v_he << ',' << r.rho << ',' << r.inner_iters << ','
       << to_string(r.inner_stop) << ',' << (last ? to_string(result.status) : "running") << '\n';
  }
  return os.str();
}

}  // namespace capa
