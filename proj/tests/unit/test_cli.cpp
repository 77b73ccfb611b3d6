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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "capa/commands.hpp"
#include "capa/scenario.hpp"

namespace fs = std::filesystem;
using namespace capa;

namespace {

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("CAPA_TEST_TMP");
  const fs::path dir = (root ? fs::path(root) : fs::temp_directory_path() / "capa_cli_test") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "capa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> v;
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> v(1);
  for (char c : s) {
    if (c == ',') {
      v.emplace_back();
    } else {
      v.back() += c;
    }
  }
  return v;
}

}  // namespace

TEST_CASE("generate writes a loadable scenario") {
  const fs::path dir = scratch("generate");
  const Outcome o = invoke({"generate", "--seed", "4", "--surfaces", "6", "--out-dir", dir.string()});
  REQUIRE(o.code == 0);
  const Scenario scn = load_scenario(dir / "scenario.json");
  CHECK(scn.num_surfaces() == 6);
  CHECK(scn.num_users() == 20);
  CHECK(scn.seed == 4);
  for (const auto& s : scn.surfaces) CHECK(s.side == doctest::Approx(0.408248290463863).epsilon(1e-12));
  CHECK(scn == generate_scenario(4, 6, 14, 6, 1.0, 1e-5));
}

TEST_CASE("usage errors") {
  CHECK(invoke({"generate", "--users", "19", "--out-dir", scratch("usage").string()}).code == 2);
  CHECK(invoke({"epa", "--out-dir", scratch("usage").string()}).code == 2);
  CHECK(invoke({"epa", "--scenario", (scratch("usage") / "missing.json").string()}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"optimize", "--surfaces", "0"}).code == 2);
  CHECK(invoke({"optimize", "--eps", "-1"}).code == 2);
}

TEST_CASE("epa reproduces the total power") {
  const fs::path dir = scratch("epa");
  REQUIRE(invoke({"generate", "--seed", "2", "--surfaces", "2", "--out-dir", dir.string()}).code == 0);
  const Outcome o = invoke({"epa", "--scenario", (dir / "scenario.json").string(), "--out-dir", dir.string()});
  REQUIRE(o.code == 0);
  const auto epa = lines(dir / "epa.csv");
  REQUIRE(epa.size() == 2);
  const auto header = split(epa[0]);
  const auto row = split(epa[1]);
  REQUIRE(header.size() == row.size());
  const auto col = std::find(header.begin(), header.end(), "pc_A2") - header.begin();
  REQUIRE(col < static_cast<long>(header.size()));
  CHECK(std::stod(row[col]) == doctest::Approx(1e-5).epsilon(1e-12));
  const auto targets = lines(dir / "targets.csv");
  CHECK(targets.size() == 21);
  CHECK(targets[0] == "user,kind,target");
}

TEST_CASE("optimize is deterministic") {
  const fs::path a = scratch("opt_a");
  const fs::path b = scratch("opt_b");
  const std::vector<std::string> common{"optimize", "--seed", "3", "--surfaces", "2", "--quad-n", "16"};
  auto with_dir = [&](const fs::path& d) {
    auto v = common;
    v.insert(v.end(), {"--out-dir", d.string()});
    return v;
  };
  REQUIRE(invoke(with_dir(a)).code == 0);
  REQUIRE(invoke(with_dir(b)).code == 0);
  CHECK(slurp(a / "result.csv") == slurp(b / "result.csv"));
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  const auto res = lines(a / "result.csv");
  REQUIRE(res.size() == 2);
  CHECK(split(res[0]).size() == split(res[1]).size());
  CHECK(res[0] == cli::RunRow::csv_header());
}

TEST_CASE("small sweep") {
  const fs::path dir = scratch("sweep");
  const Outcome o = invoke({"sweep", "--sweep-surfaces", "1,2", "--seeds-per-point", "2", "--quad-n", "12",
                            "--threads", "2", "--out-dir", dir.string()});
  REQUIRE(o.code == 0);
  const auto rows = lines(dir / "sweep.csv");
  CHECK(rows.size() == 5);
  const auto med = lines(dir / "sweep_median.csv");
  REQUIRE(med.size() == 3);
  CHECK(med[0] == cli::MedianRow::csv_header());
  CHECK(split(med[1])[0] == "1");
  CHECK(split(med[2])[0] == "2");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(split(rows[i]).size() == split(rows[0]).size());
}

TEST_CASE("medians") {
  std::vector<cli::RunRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].surfaces = 2;
    rows[i].aperture = 1.0;
    rows[i].power = 1e-5;
    rows[i].status = "converged";
    rows[i].pc_ratio = 0.1 * (i + 1);
    rows[i].peak_ratio = 1.0 + i;
  }
  rows[2].status = "error";
  const auto med = cli::sweep_medians(rows);
  REQUIRE(med.size() == 1);
  CHECK(med[0].seeds == 3);
  CHECK(med[0].ok == 2);
  CHECK(med[0].pc_ratio == doctest::Approx(0.15));
  CHECK(med[0].peak_ratio == doctest::Approx(1.5));
}
