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

#ifndef CAPA_COMMANDS_HPP
#define CAPA_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capa/alopt.hpp"
#include "capa/metrics.hpp"
#include "capa/pipeline.hpp"
#include "capa/scenario.hpp"

namespace capa::cli {

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2 };

struct RunConfig {
  std::uint64_t seed = 1;
  int surfaces = 1;
  int ius = 14;
  int eus = 6;
  std::optional<int> users;      // K; must equal ius + eus when given
  double aperture = 1.0;         // m^2
  double power = 1e-5;           // A^2
  int quad_n = 32;
  SolveOptions solve;            // solve.alpha_zf doubles as the link option
  std::vector<int> sweep_surfaces{1, 2, 3, 4, 5, 6};
  std::vector<double> sweep_aperture{1.0};
  std::vector<double> sweep_power{1e-5};
  int seeds_per_point = 20;
  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> scenario;
  int threads = 0;  // 0: CAPA_THREADS or hardware concurrency

  /// Throws ConfigError on inconsistent knobs.
  void validate() const;
};

/// One optimized (or failed) scenario; a row of result.csv / sweep.csv.
struct RunRow {
  std::uint64_t seed = 0;
  int surfaces = 0;
  int users = 0;
  int ius = 0;
  int eus = 0;
  double aperture = 0.0;
  double power = 0.0;
  std::string status;  // converged | iteration_cap | degenerate | error
  double pc = 0.0;
  double pc_ratio = 0.0;
  double max_v_se = 0.0;
  double max_v_he = 0.0;
  double peak_density = 0.0;
  double epa_peak_density = 0.0;
  double average_density = 0.0;  // P_t / A_T
  double peak_ratio = 0.0;
  double epa_peak_ratio = 0.0;
  double max_surface_excess = 0.0;
  int outer_iters = 0;
  double min_sinr = 0.0;
  double mean_se = 0.0;
  double sum_q_nl = 0.0;
  std::string message;

  static std::string csv_header();
  std::string csv_row() const;
};

struct MedianRow {
  int surfaces = 0;
  double aperture = 0.0;
  double power = 0.0;
  int seeds = 0;
  int ok = 0;  // rows with a usable allocation
  double pc_ratio = 0.0;
  double peak_ratio = 0.0;
  double epa_peak_ratio = 0.0;
  double peak_density = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

/// Full pipeline on one scenario: link model, EPA targets, solver, metrics.
/// Never throws for numerical trouble; the row carries status "error".
RunRow run_scenario(const Scenario& scn, const RunConfig& config, SolveResult* result = nullptr);

std::vector<MedianRow> sweep_medians(const std::vector<RunRow>& rows);

/// Worker count from config.threads, then CAPA_THREADS, then the hardware.
int worker_count(const RunConfig& config);

int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_epa(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capa::cli

#endif  // CAPA_COMMANDS_HPP
