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

#ifndef CAPA_BEAMFORM_HPP
#define CAPA_BEAMFORM_HPP

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "capa/emfield.hpp"

namespace capa {

/// Column j of `b` is the precoding vector b_j of beam j (length K).
struct PrecoderSet {
  Eigen::MatrixXcd b;
  double alpha_zf = 0.0;
};

/// Default RZF regularization: 1e-2 * trace(A_L) / L.
double default_alpha_zf(const Eigen::MatrixXcd& a_total, int num_iu);

/// RZF precoders for the IU beams: column l of (A_L + alpha I_L)^-1, zero
/// padded on EU indices. EU columns of the result are zero. Throws
/// LinalgError when A_L + alpha I is numerically singular.
PrecoderSet rzf_precoders(const Eigen::MatrixXcd& a_total, int num_iu, double alpha_zf);

/// MRT precoders for the EU beams: b_m = e_m. IU columns are zero.
PrecoderSet mrt_precoders(int num_users, int num_iu);

/// RZF for IUs and MRT for EUs in one K x K matrix.
PrecoderSet combined_precoders(const Eigen::MatrixXcd& a_total, int num_iu, double alpha_zf);

/// Continuous beamformers sampled on the quadrature nodes of each surface:
///   theta[s][j](u) = sum_k b_jk conj(h_sk(u)) / sqrt(b_j^H A^(s) b_j)
/// which has unit energy over the aperture.
class BeamformerSet {
 public:
  BeamformerSet() = default;
  BeamformerSet(int num_surfaces, int num_beams, int nodes);

  int num_surfaces() const { return num_surfaces_; }
  int num_beams() const { return num_beams_; }
  int nodes_per_surface() const { return nodes_; }

  std::span<const cdouble> beam(int s, int j) const {
    return {theta_.data() + offset(s, j), static_cast<std::size_t>(nodes_)};
  }
  std::span<cdouble> beam(int s, int j) {
    return {theta_.data() + offset(s, j), static_cast<std::size_t>(nodes_)};
  }

  // b_j^H A^(s) b_j, S x K.
  Eigen::MatrixXd norms;

 private:
  std::size_t offset(int s, int j) const {
    return (static_cast<std::size_t>(s) * num_beams_ + j) * nodes_;
  }

  int num_surfaces_ = 0;
  int num_beams_ = 0;
  int nodes_ = 0;
  std::vector<cdouble> theta_;
};

BeamformerSet synthesize_beamformers(const PrecoderSet& precoders, const ChannelSet& channels,
                                     const std::vector<CorrelationMatrix>& correlations);

/// g[s][k][j]: beam j of surface s observed at user k.
class CouplingGains {
 public:
  CouplingGains() = default;
  CouplingGains(int num_surfaces, int num_users);

  int num_surfaces() const { return num_surfaces_; }
  int num_users() const { return num_users_; }

  cdouble g(int s, int k, int j) const { return g_[index(s, k, j)]; }
  double magsq(int s, int k, int j) const { return magsq_[index(s, k, j)]; }

  void set(int s, int k, int j, cdouble value);

 private:
  std::size_t index(int s, int k, int j) const {
    return (static_cast<std::size_t>(s) * num_users_ + k) * num_users_ + j;
  }

  int num_surfaces_ = 0;
  int num_users_ = 0;
  std::vector<cdouble> g_;
  std::vector<double> magsq_;
};

CouplingGains coupling_gains(const ChannelSet& channels, const BeamformerSet& beams);

/// Gridded CSV of sum_j amp(s, j)^2 |theta[s][j](u)|^2 per surface:
/// columns `surface,ix,iy,x_m,y_m,density_A2_per_m2`. `amplitudes` is S x K.
void write_density_csv(const std::filesystem::path& path, const ChannelSet& channels,
                       const BeamformerSet& beams, const Eigen::MatrixXd& amplitudes);

}  // namespace capa

#endif  // CAPA_BEAMFORM_HPP
