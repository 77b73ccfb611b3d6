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

#include "capa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "capa/error.hpp"

namespace capa {

std::string OracleReport::csv_header() {
  return "name,max_abs_err,max_rel_err,samples,tolerance,pass";
}

std::string OracleReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << name << ',' << max_abs_err << ',' << max_rel_err << ',' << samples << ',' << tolerance << ','
     << (pass ? "true" : "false");
  return os.str();
}

void append_checks_csv(const std::filesystem::path& path, std::span<const OracleReport> reports) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open " + path.string());
  if (fresh) out << OracleReport::csv_header() << '\n';
  for (const auto& r : reports) out << r.csv_row() << '\n';
}

Eigen::MatrixXd fd_gradient(const AllocationFunction& f, const Eigen::MatrixXd& omega, double step,
                            std::span<const double> budgets) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be > 0");
  if (static_cast<Eigen::Index>(budgets.size()) != omega.rows()) {
    throw DomainError("one budget per surface required");
  }
  Eigen::MatrixXd grad(omega.rows(), omega.cols());
  Eigen::MatrixXd probe = omega;
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    for (Eigen::Index s = 0; s < omega.rows(); ++s) {
      const double x = omega(s, j);
      const double h = step * std::max(1.0, std::abs(x));
      const double hi = std::sqrt(budgets[s]);
      if (x < 2.0 * h || x > hi - 2.0 * h) {
        throw DomainError("allocation is not interior to the box by 2 steps");
      }
      probe(s, j) = x + h;
      const double fp = f(probe);
      probe(s, j) = x - h;
      const double fm = f(probe);
      probe(s, j) = x;
      grad(s, j) = (fp - fm) / (2.0 * h);
    }
  }
  return grad;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double diff = (a - b).cwiseAbs().maxCoeff();
  const double scale = b.cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

Mat3c green_dyadic_reference(const Vec3& r, const Vec3& u, double wavenumber, double impedance) {
  const double dx = r.x() - u.x();
  const double dy = r.y() - u.y();
  const double dz = r.z() - u.z();
  const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (!(dist > 0.0)) throw DomainError("coincident points");
  const double p[3] = {dx / dist, dy / dist, dz / dist};
  const double x = wavenumber * dist;
  const double amp = wavenumber * impedance / (4.0 * std::numbers::pi * dist);
  // j * e^{jx} = -sin x + j cos x
  const cdouble c(-amp * std::sin(x), amp * std::cos(x));
  const cdouble diag(1.0 + 1.0 / (x * x), 1.0 / x);
  const cdouble radial(1.0 + 3.0 / (x * x), 3.0 / x);
  Mat3c g;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      g(a, b) = c * ((a == b ? diag : cdouble(0.0)) - p[a] * p[b] * radial);
    }
  }
  return g;
}

RefinedChannels refine_quadrature(const Scenario& scn, int nodes_per_side, int factor) {
  if (nodes_per_side < 1 || factor < 1) throw ConfigError("quadrature order and factor must be >= 1");
  RefinedChannels out;
  out.nodes_per_side = nodes_per_side * factor;
  out.channels = sample_channels(scn, out.nodes_per_side);
  out.correlations = correlations(out.channels);
  return out;
}

OracleReport quadrature_self_convergence(const Scenario& scn, int nodes_per_side, double tolerance) {
  const auto coarse = refine_quadrature(scn, nodes_per_side, 1);
  const auto fine = refine_quadrature(scn, nodes_per_side, 2);
  OracleReport rep;
  rep.name = "quadrature_N" + std::to_string(nodes_per_side) + "_S" + std::to_string(scn.num_surfaces());
  rep.tolerance = tolerance;
  for (int s = 0; s < scn.num_surfaces(); ++s) {
    const Eigen::MatrixXcd& a = coarse.correlations[s].a;
    const Eigen::MatrixXcd& b = fine.correlations[s].a;
    for (Eigen::Index k = 0; k < b.rows(); ++k) {
      for (Eigen::Index q = 0; q < b.cols(); ++q) {
        const double d = std::abs(a(k, q) - b(k, q));
        const double scale = std::sqrt(b(k, k).real() * b(q, q).real());
        rep.max_abs_err = std::max(rep.max_abs_err, d);
        rep.max_rel_err = std::max(rep.max_rel_err, scale > 0.0 ? d / scale : d);
        ++rep.samples;
      }
    }
  }
  rep.pass = rep.max_rel_err < tolerance;
  return rep;
}

namespace {

struct GridProblem {
  int S = 0, K = 0, L = 0, M = 0;
  std::vector<double> g2;  // [s][k][j]
  std::vector<double> noise, coeff, budget;
  std::vector<double> gamma_t, q_t, gamma_scale, q_scale;
  int n = 0;
  std::vector<double> levels;  // per surface, grid_n values

  double gain(int s, int k, int j) const { return g2[(static_cast<std::size_t>(s) * K + k) * K + j]; }
};

struct Best {
  double pc = std::numeric_limits<double>::infinity();
  long index = -1;
};

void decode(const GridProblem& p, long idx, std::vector<double>& amp) {
  // coordinate d = s + j * S, first coordinate varies fastest
  for (int d = 0; d < p.S * p.K; ++d) {
    amp[d] = p.levels[static_cast<std::size_t>(d % p.S) * p.n + idx % p.n];
    idx /= p.n;
  }
}

Best scan(const GridProblem& p, long begin, long end, double eps, bool surface_sum) {
  Best best;
  std::vector<double> amp(static_cast<std::size_t>(p.S) * p.K);
  for (long idx = begin; idx < end; ++idx) {
    decode(p, idx, amp);
    auto P = [&](int s, int j) { return amp[s + j * p.S] * amp[s + j * p.S]; };
    double pc = 0.0;
    bool within = true;
    for (int s = 0; s < p.S && within; ++s) {
      double sum = 0.0;
      for (int j = 0; j < p.K; ++j) sum += P(s, j);
      within = !surface_sum || sum <= p.budget[s] * (1.0 + 1e-12);
      pc += sum;
    }
    if (!within || pc >= best.pc) continue;

    double se2 = 0.0;
    for (int l = 0; l < p.L; ++l) {
      double num = 0.0, den = p.noise[l];
      for (int s = 0; s < p.S; ++s) {
        for (int j = 0; j < p.K; ++j) {
          (j == l ? num : den) += P(s, j) * p.gain(s, l, j);
        }
      }
      const double v = std::max(p.gamma_t[l] - num / den, 0.0) / p.gamma_scale[l];
      se2 += v * v;
    }
    double he2 = 0.0;
    for (int m = 0; m < p.M; ++m) {
      double acc = 0.0;
      for (int s = 0; s < p.S; ++s) {
        for (int j = 0; j < p.K; ++j) acc += P(s, j) * p.gain(s, p.L + m, j);
      }
      const double v = std::max(p.q_t[m] - p.coeff[m] * acc, 0.0) / p.q_scale[m];
      he2 += v * v;
    }
    if (std::sqrt(std::max(se2, he2)) <= eps) best = Best{pc, idx};
  }
  return best;
}

}  // namespace

GridSearchResult grid_search_pa(const Scenario& scn, const CouplingGains& gains,
                                const QosTargets& targets, const GridSearchOptions& options) {
  const int grid_n = options.grid_n;
  const Normalization norm = options.normalization;
  GridProblem p;
  p.S = scn.num_surfaces();
  p.K = scn.num_users();
  p.L = scn.num_iu;
  p.M = scn.num_eu;
  if (p.S * p.K > 4) throw DomainError("grid search needs S * K <= 4");
  if (grid_n < 2) throw ConfigError("grid needs at least 2 points per axis");
  if (gains.num_surfaces() != p.S || gains.num_users() != p.K ||
      targets.gamma_epa.size() != p.L || targets.q_epa.size() != p.M) {
    throw ValidationError("grid search inputs do not match the scenario");
  }
  p.n = grid_n;
  for (int s = 0; s < p.S; ++s) {
    for (int k = 0; k < p.K; ++k) {
      for (int j = 0; j < p.K; ++j) p.g2.push_back(std::norm(gains.g(s, k, j)));
    }
  }
  for (int l = 0; l < p.L; ++l) {
    p.noise.push_back(scn.users[l].noise_power);
    p.gamma_t.push_back(targets.gamma_epa(l));
    const double t = targets.gamma_epa(l);
    p.gamma_scale.push_back(norm == Normalization::Relative && t > 0.0 ? t : 1.0);
  }
  const auto& c = scn.constants;
  for (int m = 0; m < p.M; ++m) {
    const User& u = scn.users[p.L + m];
    p.coeff.push_back(c.receiver_aperture * u.incidence_cos / (2.0 * c.receiver_impedance));
    p.q_t.push_back(targets.q_epa(m));
    const double t = targets.q_epa(m);
    p.q_scale.push_back(norm == Normalization::Relative && t > 0.0 ? t : 1.0);
  }
  GridSearchResult out;
  for (int s = 0; s < p.S; ++s) {
    const double hi = std::sqrt(scn.surfaces[s].power_budget);
    p.budget.push_back(scn.surfaces[s].power_budget);
    for (int i = 0; i < grid_n; ++i) p.levels.push_back(hi * i / (grid_n - 1));
    out.spacing = std::max(out.spacing, hi / (grid_n - 1));
  }

  long total = 1;
  for (int d = 0; d < p.S * p.K; ++d) total *= grid_n;
  const int workers = std::clamp(options.threads, 1, 64);
  std::vector<Best> partial(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    const long begin = total * w / workers;
    const long end = total * (w + 1) / workers;
    if (workers == 1) {
      partial[w] = scan(p, begin, end, options.epsilon, options.surface_sum);
    } else {
      pool.emplace_back([&, w, begin, end] { partial[w] = scan(p, begin, end, options.epsilon, options.surface_sum); });
    }
  }
  for (auto& t : pool) t.join();

  Best best;
  for (const Best& b : partial) {
    if (b.index >= 0 && b.pc < best.pc) best = b;  // chunks are in scan order
  }
  out.evaluated = total;
  out.feasible = best.index >= 0;
  out.omega = Eigen::MatrixXd::Zero(p.S, p.K);
  if (out.feasible) {
    std::vector<double> amp(static_cast<std::size_t>(p.S) * p.K);
    decode(p, best.index, amp);
    for (int s = 0; s < p.S; ++s) {
      for (int j = 0; j < p.K; ++j) out.omega(s, j) = amp[s + j * p.S];
    }
    out.pc = best.pc;
  }
  return out;
}

}  // namespace capa
