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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "capa/beamform.hpp"
#include "capa/error.hpp"
#include "capa/metrics.hpp"
#include "fixtures.hpp"

using namespace capa;

namespace {

double beam_energy(const ChannelSet& ch, const BeamformerSet& beams, int s, int j) {
  const auto& w = ch.rule(s).weights;
  const auto th = beams.beam(s, j);
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) e += w[i] * std::norm(th[i]);
  return e;
}

LinkModel link_with_alpha(const Scenario& scn, int nodes, double alpha) {
  return build_link(scn, LinkOptions{nodes, alpha});
}

}  // namespace

TEST_CASE("precoder layout") {
  const LinkModel& link = test::reference_link(1, 2);
  const auto& b = link.precoders.b;
  const int L = 14, K = 20;
  for (int m = L; m < K; ++m) {
    for (int k = 0; k < K; ++k) CHECK(b(k, m) == cdouble(k == m ? 1.0 : 0.0));
  }
  for (int l = 0; l < L; ++l) {
    for (int m = L; m < K; ++m) CHECK(b(m, l) == cdouble(0.0));
    CHECK(std::abs(b(l, l)) > 0.0);
  }
  CHECK(link.precoders.alpha_zf > 0.0);
}

TEST_CASE("default regularization is a fraction of the mean IU gain") {
  const LinkModel& link = test::reference_link(1, 1);
  const double alpha = default_alpha_zf(link.correlation_total, 14);
  CHECK(alpha == doctest::Approx(1e-2 * link.correlation_total.topLeftCorner(14, 14).trace().real() / 14));
}

TEST_CASE("beams have unit energy and couplings obey Cauchy-Schwarz") {
  for (int S : {1, 3, 6}) {
    const LinkModel& link = test::reference_link(3, S);
    for (int s = 0; s < S; ++s) {
      const Eigen::MatrixXcd& a = link.correlations[s].a;
      for (int j = 0; j < 20; ++j) {
        CHECK(beam_energy(link.channels, link.beams, s, j) == doctest::Approx(1.0).epsilon(1e-10));
        for (int k = 0; k < 20; ++k) {
          const cdouble g = link.gains.g(s, k, j);
          CHECK(std::isfinite(g.real()));
          CHECK(link.gains.magsq(s, k, j) == std::norm(g));
          CHECK(std::norm(g) <= a(k, k).real() * (1.0 + 1e-10));
        }
      }
    }
  }
}

TEST_CASE("MRT self coupling equals the root channel energy") {
  for (int S : {1, 4}) {
    const LinkModel& link = test::reference_link(4, S);
    for (int s = 0; s < S; ++s) {
      for (int m = 14; m < 20; ++m) {
        const cdouble g = link.gains.g(s, m, m);
        const double expected = std::sqrt(link.correlations[s].a(m, m).real());
        CHECK(g.real() == doctest::Approx(expected).epsilon(1e-10));
        CHECK(std::abs(g.imag()) <= 1e-10 * expected);
        // theta = conj(h) / sqrt(A_mm) on every node.
        const auto h = link.channels.channel(s, m);
        const auto th = link.beams.beam(s, m);
        for (std::size_t i = 0; i < h.size(); i += 97) {
          CHECK(std::abs(th[i] - std::conj(h[i]) / expected) <= 1e-12 * std::abs(th[i]) + 1e-300);
        }
      }
    }
  }
}

TEST_CASE("single IU: RZF reduces to MRT") {
  const Scenario scn = generate_scenario(2, 1, 1, 2, 1.0, 1e-5);
  const LinkModel link = build_link(scn, LinkOptions{16, {}});
  const double a00 = link.correlations[0].a(0, 0).real();
  const auto h = link.channels.channel(0, 0);
  const auto th = link.beams.beam(0, 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(std::abs(th[i] - std::conj(h[i]) / std::sqrt(a00)) <= 1e-10 * std::abs(th[i]));
  }
}

TEST_CASE("huge regularization approaches MRT") {
  const Scenario& scn = test::reference_scenario(5, 1);
  const LinkModel base = link_with_alpha(scn, 16, 1.0);
  const double big = 1e6 * base.correlation_total.topLeftCorner(14, 14).trace().real();
  const LinkModel link = link_with_alpha(scn, 16, big);
  for (int l = 0; l < 14; ++l) {
    const double mrt = std::sqrt(link.correlations[0].a(l, l).real());
    CHECK(std::abs(link.gains.g(0, l, l)) == doctest::Approx(mrt).epsilon(1e-4));
  }
}

TEST_CASE("weak regularization nulls inter-IU coupling on one surface") {
  const Scenario scn = generate_scenario(3, 1, 3, 0, 1.0, 1e-5);
  const LinkModel probe = build_link(scn, LinkOptions{32, {}});
  const double alpha = 1e-6 * probe.correlation_total.trace().real() / 3;
  const LinkModel link = link_with_alpha(scn, 32, alpha);
  for (int l = 0; l < 3; ++l) {
    for (int j = 0; j < 3; ++j) {
      if (l == j) continue;
      CHECK(std::abs(link.gains.g(0, l, j)) / std::abs(link.gains.g(0, j, j)) < 1e-3);
    }
  }
}

TEST_CASE("precoder scale does not change beam magnitudes or couplings") {
  const LinkModel& link = test::reference_link(6, 2, 16);
  PrecoderSet scaled = link.precoders;
  scaled.b.col(3) *= cdouble(-2.5, 4.0);
  const BeamformerSet beams = synthesize_beamformers(scaled, link.channels, link.correlations);
  const CouplingGains gains = coupling_gains(link.channels, beams);
  for (int s = 0; s < 2; ++s) {
    const auto a = link.beams.beam(s, 3);
    const auto b = beams.beam(s, 3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(b[i]) == doctest::Approx(std::abs(a[i])).epsilon(1e-12));
    for (int k = 0; k < 20; ++k) {
      CHECK(gains.magsq(s, k, 3) == doctest::Approx(link.gains.magsq(s, k, 3)).epsilon(1e-10));
    }
  }
}

TEST_CASE("relabeling IUs permutes the couplings") {
  const Scenario& scn = test::reference_scenario(7, 2);
  Scenario swapped = scn;
  std::swap(swapped.users[0].position, swapped.users[1].position);
  const LinkModel a = build_link(scn, LinkOptions{16, 1e-3});
  const LinkModel b = build_link(swapped, LinkOptions{16, 1e-3});
  const auto perm = [](int k) { return k == 0 ? 1 : (k == 1 ? 0 : k); };
  for (int s = 0; s < 2; ++s) {
    for (int k = 0; k < 20; ++k) {
      for (int j = 0; j < 20; ++j) {
        const double x = a.gains.magsq(s, k, j);
        const double y = b.gains.magsq(s, perm(k), perm(j));
        CHECK(y == doctest::Approx(x).epsilon(1e-8).scale(1e-30));
      }
    }
  }
}

TEST_CASE("singular IU correlation is reported") {
  Scenario scn = generate_scenario(1, 1, 2, 0, 1.0, 1e-5);
  scn.users[1].position = scn.users[0].position;
  const ChannelSet ch = sample_channels(scn, 8);
  const auto corr = correlations(ch);
  CHECK_THROWS_AS(rzf_precoders(corr[0].a, 2, 1e-300), LinalgError);
}

TEST_CASE("zero channel gives a degenerate beam") {
  const Scenario scn = generate_scenario(1, 2, 1, 1, 1.0, 1e-5);
  ChannelSet ch = sample_channels(scn, 4);
  for (auto& v : ch.channel(1, 1)) v = 0.0;
  const auto corr = correlations(ch);
  Eigen::MatrixXcd total = corr[0].a + corr[1].a;
  const PrecoderSet p = combined_precoders(total, 1, default_alpha_zf(total, 1));
  try {
    synthesize_beamformers(p, ch, corr);
    FAIL("expected a degenerate beam");
  } catch (const DegenerateBeamError& e) {
    CHECK(e.surface() == 1);
    CHECK(e.beam() == 1);
  }
}

TEST_CASE("density CSV integrates to the surface power") {
  const LinkModel& link = test::reference_link(1, 2, 8);
  const Eigen::MatrixXd amp = Eigen::MatrixXd::Constant(2, 20, std::sqrt(test::kPt / 40.0));
  const auto path = std::filesystem::temp_directory_path() / "capa_density.csv";
  write_density_csv(path, link.channels, link.beams, amp);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "surface,ix,iy,x_m,y_m,density_A2_per_m2");
  std::vector<double> total(2, 0.0);
  int rows = 0;
  while (std::getline(in, line)) {
    int s, ix, iy;
    double x, y, d;
    char c;
    std::istringstream ls(line);
    ls >> s >> c >> ix >> c >> iy >> c >> x >> c >> y >> c >> d;
    total[s] += link.channels.rule(s).weights[ix * 8 + iy] * d;
    ++rows;
  }
  std::filesystem::remove(path);
  CHECK(rows == 128);
  CHECK(total[0] == doctest::Approx(test::kPt / 2).epsilon(1e-10));
  CHECK(total[1] == doctest::Approx(test::kPt / 2).epsilon(1e-10));
}
