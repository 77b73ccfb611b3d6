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

#ifndef CAPA_SCENARIO_HPP
#define CAPA_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace capa {

using Vec3 = Eigen::Vector3d;

/// Physical constants of one network. Powers are carried in A^2 (squared
/// surface-current units); harvested powers in W.
struct PhysicalConstants {
  double wavelength = 0.1;                      // m
  double wavenumber = 0.0;                      // rad/m, 2*pi/wavelength
  double free_space_impedance = 376.99111843077515;  // ohm, 120*pi
  double receiver_impedance = 25.0;             // ohm
  double noise_power = 1e-9;                    // A^2
  double receiver_aperture = 0.0;               // m^2, wavelength^2 / (4*pi)
  double eh_a = 1500.0;                         // rectifier slope
  double eh_b = 0.0022;                         // W
  double eh_q_max = 0.024;                      // W

  /// Defaults of the reference deployment at the given carrier wavelength.
  static PhysicalConstants at_wavelength(double wavelength);

  void validate() const;
  bool operator==(const PhysicalConstants&) const = default;
};

/// Orthonormal triad <i, j, k>.
struct Basis {
  Vec3 i = Vec3::UnitX();
  Vec3 j = Vec3::UnitY();
  Vec3 k = Vec3::UnitZ();

  bool orthonormal(double tol = 1e-12) const;
  bool operator==(const Basis&) const = default;
};

/// Square, axis-aligned aperture in the z = 0 plane.
struct Surface {
  int id = 0;
  Vec3 center = Vec3::Zero();
  double side = 0.0;          // m
  Basis basis;
  double area = 0.0;          // m^2
  double power_budget = 0.0;  // A^2

  bool operator==(const Surface&) const = default;
};

enum class UserKind { Information, Energy };

struct User {
  int id = 0;
  UserKind kind = UserKind::Information;
  Vec3 position = Vec3::Zero();
  Basis rx_basis;
  double noise_power = 0.0;  // A^2
  // Energy users only; zero / unused for information users.
  Vec3 antenna_normal = Vec3::Zero();
  double incidence_cos = 0.0;

  bool operator==(const User&) const = default;
};

/// Random layout knobs. Defaults reproduce the reference deployment.
struct LayoutParams {
  double xy_half_width = 10.0;  // surface centers and IUs in [-w, w]^2
  double iu_z_min = 0.5;
  double iu_z_max = 20.0;
  double eu_z_min = 0.5;
  double eu_z_max = 2.0;
  double eu_box_half_width = 1.0;  // EU cluster box around its surface center
  int max_attempts = 100000;       // rejection-sampling budget for all surfaces

  void validate() const;
  bool operator==(const LayoutParams&) const = default;
};

/// Minimum height of any user above the aperture plane (m).
inline constexpr double kMinUserHeight = 0.5;

/// One network realization. Users 0..L-1 are information users (IUs),
/// users L..L+M-1 are energy users (EUs).
struct Scenario {
  PhysicalConstants constants;
  LayoutParams layout;
  std::vector<Surface> surfaces;
  std::vector<User> users;
  int num_iu = 0;
  int num_eu = 0;
  double total_aperture = 0.0;  // m^2
  double total_power = 0.0;     // A^2
  std::uint64_t seed = 0;

  int num_surfaces() const { return static_cast<int>(surfaces.size()); }
  int num_users() const { return static_cast<int>(users.size()); }

  /// Throws ValidationError on any broken invariant.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

/// Draws a scenario. The draw order is: IU positions (x, y, z), then
/// surface centers by rejection sampling (x, y), then for each EU its
/// host surface index, x, y, z. IU positions therefore do not depend on S.
Scenario generate_scenario(std::uint64_t seed, int num_surfaces, int num_iu, int num_eu,
                           double total_aperture, double total_power,
                           const LayoutParams& layout = {},
                           const PhysicalConstants& constants = PhysicalConstants::at_wavelength(0.1));

/// cos of the angle between the EU antenna's facing direction and the
/// direction toward the nearest surface center, clamped to [0, 1].
double incidence_cosine(const Vec3& antenna_normal, const Vec3& user_position,
                        const std::vector<Surface>& surfaces);

/// Scenario file (JSON, `format_version: 1`).
std::string scenario_to_string(const Scenario& scn);
Scenario scenario_from_string(const std::string& text);
void save_scenario(const Scenario& scn, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace capa

#endif  // CAPA_SCENARIO_HPP
