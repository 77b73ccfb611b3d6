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

#include "capa/emfield.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "capa/error.hpp"

namespace capa {

Mat3c green_dyadic(const Vec3& r, const Vec3& u, double wavenumber, double impedance) {
  const Vec3 p = r - u;
  const double dist = p.norm();
  if (!(dist > 0.0)) throw DomainError("Green's function is singular at r == u");
  const Vec3 ph = p / dist;
  const Eigen::Matrix3d outer = ph * ph.transpose();
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();

  const cdouble j(0.0, 1.0);
  const double kr = wavenumber * dist;
  const cdouble prefactor =
      j * wavenumber * impedance / (4.0 * std::numbers::pi) * std::exp(j * kr) / dist;
  // (I - pp) + (j/kr)(I - 3pp) + (1/kr^2)(I - 3pp)
  const cdouble radial = j / kr + 1.0 / (kr * kr);
  const Mat3c bracket = (eye - outer).cast<cdouble>() + radial * (eye - 3.0 * outer).cast<cdouble>();
  return prefactor * bracket;
}

Mat3c green_dyadic(const Vec3& r, const Vec3& u, const PhysicalConstants& constants) {
  return green_dyadic(r, u, constants.wavenumber, constants.free_space_impedance);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre order must be >= 1");
  if (n == 1) return {{0.0}, {2.0}};
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = weight;
    w[n - 1 - i] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {x, w};
}

QuadratureRule build_quadrature(const Surface& surface, int nodes_per_side) {
  if (nodes_per_side < 2) throw ConfigError("quadrature needs at least 2 nodes per side");
  const auto [x, w] = gauss_legendre(nodes_per_side);
  const double half = 0.5 * surface.side;
  const double jac = half * half;

  QuadratureRule rule;
  rule.surface_id = surface.id;
  rule.order = nodes_per_side;
  rule.nodes.reserve(static_cast<std::size_t>(nodes_per_side) * nodes_per_side);
  rule.weights.reserve(rule.nodes.capacity());
  for (int a = 0; a < nodes_per_side; ++a) {
    for (int b = 0; b < nodes_per_side; ++b) {
      rule.nodes.push_back(surface.center + half * (x[a] * surface.basis.i + x[b] * surface.basis.j));
      rule.weights.push_back(jac * w[a] * w[b]);
    }
  }
  return rule;
}

std::vector<cdouble> scalar_channel(const Surface& surface, const User& user,
                                    const QuadratureRule& rule, const PhysicalConstants& constants) {
  const Basis& tx = surface.basis;
  const Basis& rx = user.rx_basis;
  std::vector<cdouble> h(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Mat3c g = green_dyadic(user.position, rule.nodes[i], constants);
    h[i] = rx.i.cast<cdouble>().dot(g * tx.i.cast<cdouble>()) +
           rx.j.cast<cdouble>().dot(g * tx.j.cast<cdouble>()) +
           rx.k.cast<cdouble>().dot(g * tx.k.cast<cdouble>());
  }
  return h;
}

ChannelSet::ChannelSet(int num_surfaces, int num_users, std::vector<QuadratureRule> rules)
    : num_surfaces_(num_surfaces), num_users_(num_users), rules_(std::move(rules)) {
  if (static_cast<int>(rules_.size()) != num_surfaces) {
    throw ValidationError("channel set needs one quadrature rule per surface");
  }
  nodes_ = rules_.empty() ? 0 : rules_.front().size();
  for (const auto& r : rules_) {
    if (r.size() != nodes_) throw ValidationError("all surfaces must share the same rule size");
  }
  samples_.assign(static_cast<std::size_t>(num_surfaces) * num_users * nodes_, cdouble{});
}

bool ChannelSet::all_finite() const {
  for (const auto& v : samples_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

ChannelSet sample_channels(const Scenario& scn, int nodes_per_side) {
  std::vector<QuadratureRule> rules;
  for (const auto& s : scn.surfaces) rules.push_back(build_quadrature(s, nodes_per_side));
  ChannelSet set(scn.num_surfaces(), scn.num_users(), std::move(rules));
  for (int s = 0; s < scn.num_surfaces(); ++s) {
    for (int k = 0; k < scn.num_users(); ++k) {
      const auto h = scalar_channel(scn.surfaces[s], scn.users[k], set.rule(s), scn.constants);
      std::copy(h.begin(), h.end(), set.channel(s, k).begin());
    }
  }
  return set;
}

bool CorrelationMatrix::hermitian(double tol) const {
  return (a - a.adjoint()).norm() <= tol * a.norm();
}

bool CorrelationMatrix::positive_semidefinite(double tol) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * a.trace().real();
}

CorrelationMatrix correlation(const ChannelSet& channels, int s) {
  const int K = channels.num_users();
  const int n = channels.nodes_per_surface();
  const auto& w = channels.rule(s).weights;
  // Weighted channel matrix H(i, k) = sqrt(w_i) h_k(u_i); A = H^T conj(H).
  Eigen::MatrixXcd hw(n, K);
  for (int k = 0; k < K; ++k) {
    const auto h = channels.channel(s, k);
    for (int i = 0; i < n; ++i) hw(i, k) = std::sqrt(w[i]) * h[i];
  }
  CorrelationMatrix out;
  out.surface_id = s;
  out.a = hw.transpose() * hw.conjugate();
  // Pin exact Hermitian symmetry and a real diagonal.
  for (int k = 0; k < K; ++k) {
    out.a(k, k) = out.a(k, k).real();
    for (int kk = k + 1; kk < K; ++kk) out.a(kk, k) = std::conj(out.a(k, kk));
  }
  return out;
}

std::vector<CorrelationMatrix> correlations(const ChannelSet& channels) {
  std::vector<CorrelationMatrix> out;
  for (int s = 0; s < channels.num_surfaces(); ++s) out.push_back(correlation(channels, s));
  return out;
}

void save_channel_dump(const ChannelSet& channels, const std::filesystem::path& path) {
  using nlohmann::json;
  json root;
  root["format_version"] = 1;
  root["num_surfaces"] = channels.num_surfaces();
  root["num_users"] = channels.num_users();
  json surfaces = json::array();
  for (int s = 0; s < channels.num_surfaces(); ++s) {
    const auto& rule = channels.rule(s);
    json nodes = json::array();
    for (const auto& u : rule.nodes) nodes.push_back({u.x(), u.y(), u.z()});
    json users = json::array();
    for (int k = 0; k < channels.num_users(); ++k) {
      json h = json::array();
      for (const auto& v : channels.channel(s, k)) h.push_back({v.real(), v.imag()});
      users.push_back(std::move(h));
    }
    surfaces.push_back({{"surface_id", rule.surface_id},
                        {"order", rule.order},
                        {"nodes_m", std::move(nodes)},
                        {"weights_m2", rule.weights},
                        {"h", std::move(users)}});
  }
  root["surfaces"] = std::move(surfaces);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << root.dump() << "\n";
}

ChannelSet load_channel_dump(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open channel dump '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    const json root = json::parse(buf.str());
    if (root.at("format_version").get<int>() != 1) throw ParseError("unsupported format_version");
    const int S = root.at("num_surfaces").get<int>();
    const int K = root.at("num_users").get<int>();
    std::vector<QuadratureRule> rules;
    for (const auto& js : root.at("surfaces")) {
      QuadratureRule r;
      r.surface_id = js.at("surface_id").get<int>();
      r.order = js.at("order").get<int>();
      for (const auto& n : js.at("nodes_m")) r.nodes.emplace_back(n.at(0), n.at(1), n.at(2));
      r.weights = js.at("weights_m2").get<std::vector<double>>();
      rules.push_back(std::move(r));
    }
    ChannelSet set(S, K, std::move(rules));
    for (int s = 0; s < S; ++s) {
      const auto& hs = root.at("surfaces").at(s).at("h");
      for (int k = 0; k < K; ++k) {
        auto dst = set.channel(s, k);
        const auto& hk = hs.at(k);
        if (static_cast<int>(hk.size()) != set.nodes_per_surface()) {
          throw ParseError("surface " + std::to_string(s) + " user " + std::to_string(k) +
                           ": sample count does not match node count");
        }
        for (int i = 0; i < set.nodes_per_surface(); ++i) {
          dst[i] = cdouble(hk.at(i).at(0).get<double>(), hk.at(i).at(1).get<double>());
        }
      }
    }
    return set;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed channel dump: ") + e.what());
  }
}

}  // namespace capa
