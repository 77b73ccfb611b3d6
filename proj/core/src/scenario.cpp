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

#include "capa/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "capa/error.hpp"
#include "capa/rng.hpp"

namespace capa {
namespace {

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PhysicalConstants PhysicalConstants::at_wavelength(double wavelength) {
  PhysicalConstants c;
  c.wavelength = wavelength;
  c.wavenumber = 2.0 * std::numbers::pi / wavelength;
  c.free_space_impedance = 120.0 * std::numbers::pi;
  c.receiver_aperture = wavelength * wavelength / (4.0 * std::numbers::pi);
  return c;
}

void PhysicalConstants::validate() const {
  const double values[] = {wavelength, wavenumber, free_space_impedance, receiver_impedance,
                           noise_power, receiver_aperture, eh_a, eh_b, eh_q_max};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("physical constants must be finite and strictly positive");
    }
  }
  if (!rel_close(wavenumber, 2.0 * std::numbers::pi / wavelength, 1e-14)) {
    throw ValidationError("wavenumber " + fmt(wavenumber) + " != 2*pi/wavelength");
  }
  if (!rel_close(receiver_aperture, wavelength * wavelength / (4.0 * std::numbers::pi), 1e-14)) {
    throw ValidationError("receiver aperture " + fmt(receiver_aperture) +
                          " != wavelength^2/(4*pi)");
  }
}

bool Basis::orthonormal(double tol) const {
  const Vec3* v[] = {&i, &j, &k};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double expect = a == b ? 1.0 : 0.0;
      if (std::abs(v[a]->dot(*v[b]) - expect) > tol) return false;
    }
  }
  return true;
}

void LayoutParams::validate() const {
  if (!(xy_half_width > 0.0) || !(eu_box_half_width >= 0.0)) {
    throw ConfigError("layout half-widths must be positive");
  }
  if (!(iu_z_min >= kMinUserHeight) || !(iu_z_max >= iu_z_min) ||
      !(eu_z_min >= kMinUserHeight) || !(eu_z_max >= eu_z_min)) {
    throw ConfigError("user height ranges must satisfy " + fmt(kMinUserHeight) +
                      " <= z_min <= z_max");
  }
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

double incidence_cosine(const Vec3& antenna_normal, const Vec3& user_position,
                        const std::vector<Surface>& surfaces) {
  const Surface* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : surfaces) {
    const double d = (user_position - s.center).norm();
    if (d < best) {
      best = d;
      nearest = &s;
    }
  }
  if (nearest == nullptr || best == 0.0) return 0.0;
  // The wave arrives travelling along (user - center); the antenna receives
  // through its facing normal, so the capture cosine is -normal . direction.
  const Vec3 travel = (user_position - nearest->center) / best;
  return std::clamp(-antenna_normal.dot(travel), 0.0, 1.0);
}

Scenario generate_scenario(std::uint64_t seed, int num_surfaces, int num_iu, int num_eu,
                           double total_aperture, double total_power,
                           const LayoutParams& layout, const PhysicalConstants& constants) {
  if (num_surfaces < 1) throw ConfigError("number of surfaces must be >= 1");
  if (num_iu < 1) throw ConfigError("number of information users must be >= 1");
  if (num_eu < 0) throw ConfigError("number of energy users must be >= 0");
  if (!(total_aperture > 0.0)) throw ConfigError("total aperture must be > 0");
  if (!(total_power > 0.0)) throw ConfigError("total power must be > 0");
  layout.validate();
  constants.validate();

  Scenario scn;
  scn.constants = constants;
  scn.layout = layout;
  scn.num_iu = num_iu;
  scn.num_eu = num_eu;
  scn.total_aperture = total_aperture;
  scn.total_power = total_power;
  scn.seed = seed;

  Rng rng(seed);
  const double w = layout.xy_half_width;

  for (int l = 0; l < num_iu; ++l) {
    User u;
    u.id = l;
    u.kind = UserKind::Information;
    const double x = rng.uniform(-w, w);
    const double y = rng.uniform(-w, w);
    const double z = rng.uniform(layout.iu_z_min, layout.iu_z_max);
    u.position = Vec3(x, y, z);
    u.noise_power = constants.noise_power;
    scn.users.push_back(u);
  }

  const double area = total_aperture / num_surfaces;
  const double side = std::sqrt(area);
  const double budget = total_power / num_surfaces;
  int attempts = 0;
  while (static_cast<int>(scn.surfaces.size()) < num_surfaces) {
    if (attempts++ >= layout.max_attempts) {
      throw ConfigError("cannot place " + std::to_string(num_surfaces) + " surfaces of side " +
                        fmt(side) + " m with minimum center spacing " + fmt(side) +
                        " m inside [-" + fmt(w) + ", " + fmt(w) + "]^2 after " +
                        std::to_string(layout.max_attempts) + " attempts");
    }
    const double x = rng.uniform(-w, w);
    const double y = rng.uniform(-w, w);
    // Axis-aligned squares are disjoint iff their Chebyshev center distance >= side.
    const bool clear = std::all_of(scn.surfaces.begin(), scn.surfaces.end(), [&](const Surface& s) {
      return std::max(std::abs(s.center.x() - x), std::abs(s.center.y() - y)) >= side;
    });
    if (!clear) continue;
    Surface s;
    s.id = static_cast<int>(scn.surfaces.size());
    s.center = Vec3(x, y, 0.0);
    s.side = side;
    s.area = area;
    s.power_budget = budget;
    scn.surfaces.push_back(s);
  }

  const double h = layout.eu_box_half_width;
  for (int m = 0; m < num_eu; ++m) {
    const Surface& host = scn.surfaces[rng.index(num_surfaces)];
    User u;
    u.id = num_iu + m;
    u.kind = UserKind::Energy;
    const double x = host.center.x() + rng.uniform(-h, h);
    const double y = host.center.y() + rng.uniform(-h, h);
    const double z = rng.uniform(layout.eu_z_min, layout.eu_z_max);
    u.position = Vec3(x, y, z);
    u.noise_power = constants.noise_power;
    u.antenna_normal = -Vec3::UnitZ();
    u.incidence_cos = incidence_cosine(u.antenna_normal, u.position, scn.surfaces);
    scn.users.push_back(u);
  }

  scn.validate();
  return scn;
}

void Scenario::validate() const {
  constants.validate();
  const int S = num_surfaces();
  if (S < 1) throw ValidationError("scenario has no surfaces");
  if (num_iu < 1 || num_eu < 0 || num_users() != num_iu + num_eu) {
    throw ValidationError("user count " + std::to_string(num_users()) + " != L + M = " +
                          std::to_string(num_iu) + " + " + std::to_string(num_eu));
  }
  if (!(total_aperture > 0.0) || !(total_power > 0.0)) {
    throw ValidationError("total aperture and total power must be > 0");
  }

  double area_sum = 0.0;
  double power_sum = 0.0;
  for (int s = 0; s < S; ++s) {
    const Surface& surf = surfaces[s];
    const std::string tag = "surface " + std::to_string(s) + ": ";
    if (surf.id != s) throw ValidationError(tag + "id " + std::to_string(surf.id) + " out of order");
    if (!(surf.side > 0.0)) throw ValidationError(tag + "side must be > 0");
    if (!rel_close(surf.area, surf.side * surf.side, 1e-12)) {
      throw ValidationError(tag + "area " + fmt(surf.area) + " != side^2");
    }
    if (!rel_close(surf.area * S, total_aperture, 1e-12)) {
      throw ValidationError(tag + "area " + fmt(surf.area) + " != total_aperture / S");
    }
    if (!rel_close(surf.power_budget * S, total_power, 1e-12)) {
      throw ValidationError(tag + "power budget " + fmt(surf.power_budget) + " != total_power / S");
    }
    if (!surf.basis.orthonormal()) throw ValidationError(tag + "basis is not orthonormal");
    if (surf.center.z() != 0.0) throw ValidationError(tag + "center must lie on z = 0");
    area_sum += surf.area;
    power_sum += surf.power_budget;
  }
  if (!rel_close(area_sum, total_aperture, 1e-12)) {
    throw ValidationError("sum of surface areas " + fmt(area_sum) + " != total_aperture " +
                          fmt(total_aperture));
  }
  if (!rel_close(power_sum, total_power, 1e-12)) {
    throw ValidationError("sum of power budgets " + fmt(power_sum) + " != total_power " +
                          fmt(total_power));
  }

  for (int k = 0; k < num_users(); ++k) {
    const User& u = users[k];
    const std::string tag = "user " + std::to_string(k) + ": ";
    if (u.id != k) throw ValidationError(tag + "id " + std::to_string(u.id) + " out of order");
    const UserKind expected = k < num_iu ? UserKind::Information : UserKind::Energy;
    if (u.kind != expected) throw ValidationError(tag + "IUs must precede EUs");
    if (!u.position.allFinite() || u.position.z() < kMinUserHeight) {
      throw ValidationError(tag + "must sit at least " + fmt(kMinUserHeight) +
                            " m above the aperture plane");
    }
    if (!u.rx_basis.orthonormal()) throw ValidationError(tag + "receiver basis is not orthonormal");
    if (!(u.noise_power > 0.0) || !std::isfinite(u.noise_power)) {
      throw ValidationError(tag + "noise power must be > 0");
    }
    if (u.kind == UserKind::Energy) {
      if (std::abs(u.antenna_normal.norm() - 1.0) > 1e-12) {
        throw ValidationError(tag + "antenna normal must be a unit vector");
      }
      if (!(u.incidence_cos >= 0.0 && u.incidence_cos <= 1.0)) {
        throw ValidationError(tag + "incidence cosine outside [0, 1]");
      }
    }
  }
}

}  // namespace capa
