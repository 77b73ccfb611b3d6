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
#include <json.hpp>

#include "capa/error.hpp"
#include "capa/rng.hpp"
#include "capa/scenario.hpp"
#include "fixtures.hpp"

using namespace capa;

TEST_CASE("constants follow the wavelength") {
  const auto c = PhysicalConstants::at_wavelength(0.1);
  CHECK(c.wavenumber == 2.0 * M_PI / 0.1);
  CHECK(c.receiver_aperture == 0.1 * 0.1 / (4.0 * M_PI));
  CHECK(c.free_space_impedance == doctest::Approx(120.0 * M_PI).epsilon(1e-15));
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.wavenumber *= 1.01;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.noise_power = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("rng is reproducible and uniform on [0, 1)") {
  Rng a(42), b(42);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.unit();
    CHECK(u == b.unit());
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  Rng c(7);
  for (int i = 0; i < 1000; ++i) {
    const int k = c.index(6);
    CHECK(k >= 0);
    CHECK(k < 6);
  }
}

TEST_CASE("single surface takes the whole aperture and power") {
  const Scenario scn = generate_scenario(7, 1, 14, 6, 1.0, 10e-6);
  REQUIRE(scn.num_surfaces() == 1);
  CHECK(scn.surfaces[0].side == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scn.surfaces[0].area == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scn.surfaces[0].power_budget == doctest::Approx(10e-6).epsilon(1e-15));
  CHECK(scn.num_users() == 20);
}

TEST_CASE("surface sides split the aperture") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Scenario s4 = generate_scenario(seed, 4, 14, 6, 1.0, 1e-5);
    for (const auto& s : s4.surfaces) {
      CHECK(s.side == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(s.area == doctest::Approx(0.25).epsilon(1e-14));
    }
  }
  const Scenario s6 = generate_scenario(1, 6, 14, 6, 1.0, 1e-5);
  for (const auto& s : s6.surfaces) CHECK(s.side == doctest::Approx(0.408248290463863).epsilon(1e-14));
}

TEST_CASE("generated scenarios satisfy every invariant") {
  for (int S = 1; S <= 6; ++S) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Scenario& scn = test::reference_scenario(seed, S);
      CHECK_NOTHROW(scn.validate());
      double area = 0.0, power = 0.0;
      for (const auto& s : scn.surfaces) {
        area += s.area;
        power += s.power_budget;
        CHECK(s.basis.orthonormal());
        CHECK(s.center.z() == 0.0);
      }
      CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(power == doctest::Approx(test::kPt).epsilon(1e-12));
      for (int a = 0; a < S; ++a) {
        for (int b = a + 1; b < S; ++b) {
          const auto d = (scn.surfaces[a].center - scn.surfaces[b].center).cwiseAbs();
          CHECK(std::max(d.x(), d.y()) >= scn.surfaces[a].side);
        }
      }
      for (const auto& u : scn.users) {
        CHECK(u.position.z() >= kMinUserHeight);
        if (u.kind == UserKind::Energy) {
          CHECK(u.incidence_cos >= 0.0);
          CHECK(u.incidence_cos <= 1.0);
        }
      }
      for (int k = 0; k < scn.num_iu; ++k) CHECK(scn.users[k].kind == UserKind::Information);
      for (int k = scn.num_iu; k < scn.num_users(); ++k) CHECK(scn.users[k].kind == UserKind::Energy);
    }
  }
}

TEST_CASE("same seed gives the same scenario, byte for byte") {
  const Scenario a = generate_scenario(7, 3, 14, 6, 1.0, 1e-5);
  const Scenario b = generate_scenario(7, 3, 14, 6, 1.0, 1e-5);
  CHECK(a == b);
  CHECK(scenario_to_string(a) == scenario_to_string(b));
  const Scenario c = generate_scenario(8, 3, 14, 6, 1.0, 1e-5);
  CHECK_FALSE(a == c);
}

TEST_CASE("IU positions do not depend on the surface count") {
  const Scenario a = generate_scenario(5, 1, 14, 6, 1.0, 1e-5);
  const Scenario b = generate_scenario(5, 6, 14, 6, 1.0, 1e-5);
  for (int l = 0; l < 14; ++l) CHECK(a.users[l].position == b.users[l].position);
}

TEST_CASE("EU incidence cosine") {
  const Vec3 down(0, 0, -1);
  std::vector<Surface> surfaces(2);
  surfaces[1].center = Vec3(10, 0, 0);
  CHECK(incidence_cosine(down, Vec3(0, 0, 2), surfaces) == doctest::Approx(1.0));
  CHECK(incidence_cosine(down, Vec3(1, 0, 1), surfaces) == doctest::Approx(std::sqrt(0.5)));
  CHECK(incidence_cosine(down, Vec3(9, 0, 1), surfaces) == doctest::Approx(std::sqrt(0.5)));
  CHECK(incidence_cosine(down, Vec3(1, 0, 0), surfaces) == doctest::Approx(0.0));
}

TEST_CASE("generation rejects impossible requests") {
  CHECK_THROWS_AS(generate_scenario(1, 0, 14, 6, 1.0, 1e-5), ConfigError);
  CHECK_THROWS_AS(generate_scenario(1, 2, 0, 6, 1.0, 1e-5), ConfigError);
  CHECK_THROWS_AS(generate_scenario(1, 2, 14, 6, -1.0, 1e-5), ConfigError);
  CHECK_THROWS_AS(generate_scenario(1, 2, 14, 6, 1.0, 0.0), ConfigError);
  LayoutParams tight;
  tight.xy_half_width = 0.6;
  tight.max_attempts = 200;
  // Four 1 m squares cannot fit in a 1.2 m wide region.
  CHECK_THROWS_AS(generate_scenario(1, 4, 2, 1, 4.0, 1e-5, tight), ConfigError);
}

TEST_CASE("scenario file round trip") {
  const Scenario scn = generate_scenario(11, 4, 14, 6, 0.5, 5e-6);
  CHECK(scenario_from_string(scenario_to_string(scn)) == scn);
  const auto path = std::filesystem::temp_directory_path() / "capa_scenario_roundtrip.json";
  save_scenario(scn, path);
  CHECK(load_scenario(path) == scn);
  std::filesystem::remove(path);
}

TEST_CASE("scenario file errors") {
  const std::string text = scenario_to_string(generate_scenario(3, 2, 14, 6, 1.0, 1e-5));

  SUBCASE("truncated file is a parse error") {
    CHECK_THROWS_AS(scenario_from_string(text.substr(0, text.size() / 2)), ParseError);
  }
  SUBCASE("syntax errors carry the line") {
    try {
      scenario_from_string("{\n  \"format_version\": 1,\n  oops\n}");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("missing field names the path") {
    auto j = nlohmann::json::parse(text);
    j["surfaces"][1].erase("side_m");
    try {
      scenario_from_string(j.dump());
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("surfaces[1].side_m") != std::string::npos);
    }
  }
  SUBCASE("area sum mismatch is a validation error") {
    auto j = nlohmann::json::parse(text);
    j["total_aperture_m2"] = 2.0;
    CHECK_THROWS_AS(scenario_from_string(j.dump()), ValidationError);
  }
  SUBCASE("wrong kind order is a validation error") {
    auto j = nlohmann::json::parse(text);
    j["users"][0]["kind"] = "EU";
    CHECK_THROWS_AS(scenario_from_string(j.dump()), Error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/capa.json"), Error);
  }
}
