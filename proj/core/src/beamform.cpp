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

#include "capa/beamform.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "capa/error.hpp"

namespace capa {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kNormFloor = 1e-300;

}  // namespace

double default_alpha_zf(const Eigen::MatrixXcd& a_total, int num_iu) {
  return 1e-2 * a_total.topLeftCorner(num_iu, num_iu).trace().real() / num_iu;
}

PrecoderSet rzf_precoders(const Eigen::MatrixXcd& a_total, int num_iu, double alpha_zf) {
  const int K = static_cast<int>(a_total.rows());
  if (num_iu < 1 || num_iu > K) throw ConfigError("RZF needs 1 <= L <= K");
  if (!(alpha_zf > 0.0)) throw ConfigError("alpha_zf must be > 0");

  const Eigen::MatrixXcd reg =
      a_total.topLeftCorner(num_iu, num_iu) + alpha_zf * Eigen::MatrixXcd::Identity(num_iu, num_iu);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(reg, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw LinalgError("A_L + alpha_zf I is numerically singular (condition estimate " +
                      std::to_string(lo > 0.0 ? hi / lo : INFINITY) +
                      "); increase alpha_zf");
  }

  PrecoderSet out;
  out.alpha_zf = alpha_zf;
  out.b = Eigen::MatrixXcd::Zero(K, K);
  out.b.topLeftCorner(num_iu, num_iu) = reg.partialPivLu().inverse();
  return out;
}

PrecoderSet mrt_precoders(int num_users, int num_iu) {
  PrecoderSet out;
  out.b = Eigen::MatrixXcd::Zero(num_users, num_users);
  for (int m = num_iu; m < num_users; ++m) out.b(m, m) = 1.0;
  return out;
}

PrecoderSet combined_precoders(const Eigen::MatrixXcd& a_total, int num_iu, double alpha_zf) {
  PrecoderSet out = rzf_precoders(a_total, num_iu, alpha_zf);
  out.b += mrt_precoders(static_cast<int>(a_total.rows()), num_iu).b;
  return out;
}

BeamformerSet::BeamformerSet(int num_surfaces, int num_beams, int nodes)
    : norms(Eigen::MatrixXd::Zero(num_surfaces, num_beams)),
      num_surfaces_(num_surfaces),
      num_beams_(num_beams),
      nodes_(nodes),
      theta_(static_cast<std::size_t>(num_surfaces) * num_beams * nodes) {}

BeamformerSet synthesize_beamformers(const PrecoderSet& precoders, const ChannelSet& channels,
                                     const std::vector<CorrelationMatrix>& correlations) {
  const int S = channels.num_surfaces();
  const int K = channels.num_users();
  const int n = channels.nodes_per_surface();
  if (static_cast<int>(correlations.size()) != S) {
    throw ValidationError("need one correlation matrix per surface");
  }
  if (precoders.b.rows() != K || precoders.b.cols() != K) {
    throw ValidationError("precoder matrix must be K x K");
  }

  BeamformerSet out(S, K, n);
  for (int s = 0; s < S; ++s) {
    Eigen::MatrixXcd hconj(n, K);
    for (int k = 0; k < K; ++k) {
      const auto h = channels.channel(s, k);
      for (int i = 0; i < n; ++i) hconj(i, k) = std::conj(h[i]);
    }
    const Eigen::MatrixXcd raw = hconj * precoders.b;  // column j = sum_k b_jk conj(h_k)
    for (int j = 0; j < K; ++j) {
      const auto bj = precoders.b.col(j);
      const double norm2 = (bj.adjoint() * correlations[s].a * bj)(0, 0).real();
      if (!(norm2 > kNormFloor)) {
        throw DegenerateBeamError(s, j, "degenerate beam: b^H A b = " + std::to_string(norm2) +
                                            " on surface " + std::to_string(s) + ", beam " +
                                            std::to_string(j));
      }
      out.norms(s, j) = norm2;
      const double scale = 1.0 / std::sqrt(norm2);
      auto dst = out.beam(s, j);
      for (int i = 0; i < n; ++i) dst[i] = scale * raw(i, j);
    }
  }
  return out;
}

CouplingGains::CouplingGains(int num_surfaces, int num_users)
    : num_surfaces_(num_surfaces),
      num_users_(num_users),
      g_(static_cast<std::size_t>(num_surfaces) * num_users * num_users),
      magsq_(g_.size()) {}

void CouplingGains::set(int s, int k, int j, cdouble value) {
  g_[index(s, k, j)] = value;
  magsq_[index(s, k, j)] = std::norm(value);
}

CouplingGains coupling_gains(const ChannelSet& channels, const BeamformerSet& beams) {
  const int S = channels.num_surfaces();
  const int K = channels.num_users();
  const int n = channels.nodes_per_surface();
  if (beams.num_surfaces() != S || beams.num_beams() != K || beams.nodes_per_surface() != n) {
    throw ValidationError("beamformers and channels use different quadrature");
  }
  CouplingGains out(S, K);
  for (int s = 0; s < S; ++s) {
    const auto& w = channels.rule(s).weights;
    Eigen::MatrixXcd hw(n, K), theta(n, K);
    for (int k = 0; k < K; ++k) {
      const auto h = channels.channel(s, k);
      const auto t = beams.beam(s, k);
      for (int i = 0; i < n; ++i) {
        hw(i, k) = w[i] * h[i];
        theta(i, k) = t[i];
      }
    }
    const Eigen::MatrixXcd g = hw.transpose() * theta;
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) out.set(s, k, j, g(k, j));
    }
  }
  return out;
}

void write_density_csv(const std::filesystem::path& path, const ChannelSet& channels,
                       const BeamformerSet& beams, const Eigen::MatrixXd& amplitudes) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  out << "surface,ix,iy,x_m,y_m,density_A2_per_m2\n";
  for (int s = 0; s < beams.num_surfaces(); ++s) {
    const auto& rule = channels.rule(s);
    for (int i = 0; i < beams.nodes_per_surface(); ++i) {
      double d = 0.0;
      for (int j = 0; j < beams.num_beams(); ++j) {
        d += amplitudes(s, j) * amplitudes(s, j) * std::norm(beams.beam(s, j)[i]);
      }
      out << s << ',' << i / rule.order << ',' << i % rule.order << ',' << rule.nodes[i].x() << ','
          << rule.nodes[i].y() << ',' << d << '\n';
    }
  }
}

}  // namespace capa
