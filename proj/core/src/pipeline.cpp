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

#include "capa/pipeline.hpp"

namespace capa {

LinkModel build_link(const Scenario& scn, const LinkOptions& options) {
  LinkModel link;
  link.channels = sample_channels(scn, options.nodes_per_side);
  link.correlations = correlations(link.channels);
  link.correlation_total = Eigen::MatrixXcd::Zero(scn.num_users(), scn.num_users());
  for (const auto& c : link.correlations) link.correlation_total += c.a;
  const double alpha = options.alpha_zf.value_or(default_alpha_zf(link.correlation_total, scn.num_iu));
  link.precoders = combined_precoders(link.correlation_total, scn.num_iu, alpha);
  link.beams = synthesize_beamformers(link.precoders, link.channels, link.correlations);
  link.gains = coupling_gains(link.channels, link.beams);
  return link;
}

}  // namespace capa
