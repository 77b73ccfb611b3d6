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

#ifndef CAPA_EMFIELD_HPP
#define CAPA_EMFIELD_HPP

#include <complex>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "capa/scenario.hpp"

namespace capa {

using cdouble = std::complex<double>;
using Mat3c = Eigen::Matrix3cd;

/// Free-space dyadic Green's function G(r, u) with all three range terms
/// (far, middle and near field). Throws DomainError when r == u.
Mat3c green_dyadic(const Vec3& r, const Vec3& u, double wavenumber, double impedance);
Mat3c green_dyadic(const Vec3& r, const Vec3& u, const PhysicalConstants& constants);

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Tensor-product rule on one square aperture. Node index i = ix * order + iy.
struct QuadratureRule {
  int surface_id = 0;
  int order = 0;  // nodes per side
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // m^2, sum = surface area

  int size() const { return static_cast<int>(weights.size()); }
};

QuadratureRule build_quadrature(const Surface& surface, int nodes_per_side);

/// Co-polar scalar channel h_sk(u_i) = sum over the three aligned axis
/// pairs of (rx axis)^T G(r_k, u_i) (tx axis), at every node of `rule`.
std::vector<cdouble> scalar_channel(const Surface& surface, const User& user,
                                    const QuadratureRule& rule, const PhysicalConstants& constants);

/// Dense cache of h[s][k][i] for every surface, user and node. All surfaces
/// share the same nodes-per-side so the tensor is rectangular.
class ChannelSet {
 public:
  ChannelSet() = default;
  ChannelSet(int num_surfaces, int num_users, std::vector<QuadratureRule> rules);

  int num_surfaces() const { return num_surfaces_; }
  int num_users() const { return num_users_; }
  int nodes_per_surface() const { return nodes_; }
  const std::vector<QuadratureRule>& rules() const { return rules_; }
  const QuadratureRule& rule(int s) const { return rules_[s]; }

  std::span<const cdouble> channel(int s, int k) const {
    return {samples_.data() + offset(s, k), static_cast<std::size_t>(nodes_)};
  }
  std::span<cdouble> channel(int s, int k) {
    return {samples_.data() + offset(s, k), static_cast<std::size_t>(nodes_)};
  }

  bool all_finite() const;

 private:
  std::size_t offset(int s, int k) const {
    return (static_cast<std::size_t>(s) * num_users_ + k) * nodes_;
  }

  int num_surfaces_ = 0;
  int num_users_ = 0;
  int nodes_ = 0;
  std::vector<QuadratureRule> rules_;
  std::vector<cdouble> samples_;
};

/// Samples every (surface, user) channel on an N x N rule per surface.
ChannelSet sample_channels(const Scenario& scn, int nodes_per_side);

struct CorrelationMatrix {
  int surface_id = 0;
  Eigen::MatrixXcd a;  // K x K, a(k, k') = sum_i w_i h_k(u_i) conj(h_k'(u_i))

  /// ||A - A^H||_F <= tol * ||A||_F
  bool hermitian(double tol = 1e-12) const;
  /// min eigenvalue >= -tol * trace(A)
  bool positive_semidefinite(double tol = 1e-10) const;
};

CorrelationMatrix correlation(const ChannelSet& channels, int s);
std::vector<CorrelationMatrix> correlations(const ChannelSet& channels);

/// Regression-fixture dump: per surface the node list and the h samples
/// as [re, im] pairs, full precision (JSON, `format_version: 1`).
void save_channel_dump(const ChannelSet& channels, const std::filesystem::path& path);
ChannelSet load_channel_dump(const std::filesystem::path& path);

}  // namespace capa

#endif  // CAPA_EMFIELD_HPP
