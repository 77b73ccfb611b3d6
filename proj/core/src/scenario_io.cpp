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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "capa/error.hpp"
#include "capa/scenario.hpp"

namespace capa {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json basis_json(const Basis& b) {
  return json{{"i", vec_json(b.i)}, {"j", vec_json(b.j)}, {"k", vec_json(b.k)}};
}

// Typed field access that reports the dotted path of whatever is missing.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& raw(const std::string& key) const {
    if (!node_.is_object()) throw ParseError(path_ + ": expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) throw ParseError("missing field '" + join(key) + "'");
    return *it;
  }

  Reader child(const std::string& key) const { return Reader(raw(key), join(key)); }

  double real(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ParseError("field '" + join(key) + "' must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ParseError("field '" + join(key) + "' must be an integer");
    return v.get<std::int64_t>();
  }

  std::string text(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ParseError("field '" + join(key) + "' must be a string");
    return v.get<std::string>();
  }

  Vec3 vec(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number()) {
      throw ParseError("field '" + join(key) + "' must be an array of 3 numbers");
    }
    return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  Basis basis(const std::string& key) const {
    Reader b = child(key);
    return Basis{b.vec("i"), b.vec("j"), b.vec("k")};
  }

  std::vector<Reader> list(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ParseError("field '" + join(key) + "' must be an array");
    std::vector<Reader> out;
    for (std::size_t n = 0; n < v.size(); ++n) {
      out.emplace_back(v[n], join(key) + "[" + std::to_string(n) + "]");
    }
    return out;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& node_;
  std::string path_;
};

int line_of(const std::string& text, std::size_t byte) {
  if (byte > text.size()) byte = text.size();
  int line = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

std::string scenario_to_string(const Scenario& scn) {
  const auto& c = scn.constants;
  const auto& lay = scn.layout;
  json root;
  root["format_version"] = kFormatVersion;
  root["seed"] = scn.seed;
  root["num_information_users"] = scn.num_iu;
  root["num_energy_users"] = scn.num_eu;
  root["total_aperture_m2"] = scn.total_aperture;
  root["total_power_A2"] = scn.total_power;
  root["constants"] = {
      {"wavelength_m", c.wavelength},
      {"wavenumber_rad_per_m", c.wavenumber},
      {"free_space_impedance_ohm", c.free_space_impedance},
      {"receiver_impedance_ohm", c.receiver_impedance},
      {"noise_power_A2", c.noise_power},
      {"receiver_aperture_m2", c.receiver_aperture},
      {"eh_a_per_W", c.eh_a},
      {"eh_b_W", c.eh_b},
      {"eh_q_max_W", c.eh_q_max},
  };
  root["layout"] = {
      {"xy_half_width_m", lay.xy_half_width},
      {"iu_z_min_m", lay.iu_z_min},
      {"iu_z_max_m", lay.iu_z_max},
      {"eu_z_min_m", lay.eu_z_min},
      {"eu_z_max_m", lay.eu_z_max},
      {"eu_box_half_width_m", lay.eu_box_half_width},
      {"max_attempts", lay.max_attempts},
  };
  json surfaces = json::array();
  for (const auto& s : scn.surfaces) {
    surfaces.push_back({{"id", s.id},
                        {"center_m", vec_json(s.center)},
                        {"side_m", s.side},
                        {"area_m2", s.area},
                        {"power_budget_A2", s.power_budget},
                        {"basis", basis_json(s.basis)}});
  }
  root["surfaces"] = std::move(surfaces);
  json users = json::array();
  for (const auto& u : scn.users) {
    json ju = {{"id", u.id},
               {"kind", u.kind == UserKind::Information ? "IU" : "EU"},
               {"position_m", vec_json(u.position)},
               {"rx_basis", basis_json(u.rx_basis)},
               {"noise_power_A2", u.noise_power}};
    if (u.kind == UserKind::Energy) {
      ju["antenna_normal"] = vec_json(u.antenna_normal);
      ju["incidence_cos"] = u.incidence_cos;
    }
    users.push_back(std::move(ju));
  }
  root["users"] = std::move(users);
  return root.dump(2) + "\n";
}

Scenario scenario_from_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario file: ") + e.what(), line_of(text, e.byte));
  }

  Reader r(root, "");
  const auto version = r.integer("format_version");
  if (version != kFormatVersion) {
    throw ParseError("unsupported format_version " + std::to_string(version));
  }

  Scenario scn;
  scn.seed = static_cast<std::uint64_t>(r.integer("seed"));
  scn.num_iu = static_cast<int>(r.integer("num_information_users"));
  scn.num_eu = static_cast<int>(r.integer("num_energy_users"));
  scn.total_aperture = r.real("total_aperture_m2");
  scn.total_power = r.real("total_power_A2");

  const Reader c = r.child("constants");
  auto& k = scn.constants;
  k.wavelength = c.real("wavelength_m");
  k.wavenumber = c.real("wavenumber_rad_per_m");
  k.free_space_impedance = c.real("free_space_impedance_ohm");
  k.receiver_impedance = c.real("receiver_impedance_ohm");
  k.noise_power = c.real("noise_power_A2");
  k.receiver_aperture = c.real("receiver_aperture_m2");
  k.eh_a = c.real("eh_a_per_W");
  k.eh_b = c.real("eh_b_W");
  k.eh_q_max = c.real("eh_q_max_W");

  const Reader lay = r.child("layout");
  auto& l = scn.layout;
  l.xy_half_width = lay.real("xy_half_width_m");
  l.iu_z_min = lay.real("iu_z_min_m");
  l.iu_z_max = lay.real("iu_z_max_m");
  l.eu_z_min = lay.real("eu_z_min_m");
  l.eu_z_max = lay.real("eu_z_max_m");
  l.eu_box_half_width = lay.real("eu_box_half_width_m");
  l.max_attempts = static_cast<int>(lay.integer("max_attempts"));

  for (const Reader& js : r.list("surfaces")) {
    Surface s;
    s.id = static_cast<int>(js.integer("id"));
    s.center = js.vec("center_m");
    s.side = js.real("side_m");
    s.area = js.real("area_m2");
    s.power_budget = js.real("power_budget_A2");
    s.basis = js.basis("basis");
    scn.surfaces.push_back(s);
  }
  for (const Reader& ju : r.list("users")) {
    User u;
    u.id = static_cast<int>(ju.integer("id"));
    const std::string kind = ju.text("kind");
    if (kind == "IU") {
      u.kind = UserKind::Information;
    } else if (kind == "EU") {
      u.kind = UserKind::Energy;
    } else {
      throw ParseError("user " + std::to_string(u.id) + ": kind must be IU or EU, got '" + kind + "'");
    }
    u.position = ju.vec("position_m");
    u.rx_basis = ju.basis("rx_basis");
    u.noise_power = ju.real("noise_power_A2");
    if (u.kind == UserKind::Energy) {
      u.antenna_normal = ju.vec("antenna_normal");
      u.incidence_cos = ju.real("incidence_cos");
    }
    scn.users.push_back(u);
  }

  scn.validate();
  return scn;
}

void save_scenario(const Scenario& scn, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << scenario_to_string(scn);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_string(buf.str());
}

}  // namespace capa
