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

#ifndef CAPA_PIPELINE_HPP
#define CAPA_PIPELINE_HPP

#include <optional>
#include <vector>

#include "capa/beamform.hpp"
#include "capa/emfield.hpp"
#include "capa/scenario.hpp"

namespace capa {

struct LinkOptions {
  int nodes_per_side = 32;
  // Absolute RZF regularization; default_alpha_zf() when unset.
  std::optional<double> alpha_zf;
};

/// Everything between a scenario and the power-allocation problem.
struct LinkModel {
  ChannelSet channels;
  std::vector<CorrelationMatrix> correlations;
  Eigen::MatrixXcd correlation_total;  // sum_s A^(s)
  PrecoderSet precoders;
  BeamformerSet beams;
  CouplingGains gains;
};

LinkModel build_link(const Scenario& scn, const LinkOptions& options = {});

}  // namespace capa

#endif  // CAPA_PIPELINE_HPP
