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

#include "capa/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <CLI11.hpp>

#include "capa/error.hpp"

namespace capa::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory not creatable: " + dir.string());
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Scenario scenario_from_config(const RunConfig& c) {
  return generate_scenario(c.seed, c.surfaces, c.ius, c.eus, c.aperture, c.power);
}

Scenario load_or_generate(const RunConfig& c) {
  if (!c.scenario) return scenario_from_config(c);
  if (!std::filesystem::exists(*c.scenario)) {
    throw ConfigError("scenario file not found: " + c.scenario->string());
  }
  return load_scenario(*c.scenario);
}

}  // namespace

void RunConfig::validate() const {
  if (surfaces < 1) throw ConfigError("--surfaces must be >= 1");
  if (ius < 1 || eus < 0) throw ConfigError("need at least one IU and a nonnegative EU count");
  if (users && *users != ius + eus) {
    throw ConfigError("--users must equal --ius + --eus");
  }
  if (!(aperture > 0.0) || !(power > 0.0)) throw ConfigError("--aperture and --power must be > 0");
  if (quad_n < 1) throw ConfigError("--quad-n must be >= 1");
  if (seeds_per_point < 1) throw ConfigError("--seeds-per-point must be >= 1");
  if (sweep_surfaces.empty() || sweep_aperture.empty() || sweep_power.empty()) {
    throw ConfigError("sweep lists must be non-empty");
  }
  for (int s : sweep_surfaces) {
    if (s < 1) throw ConfigError("--sweep-surfaces entries must be >= 1");
  }
  for (double a : sweep_aperture) {
    if (!(a > 0.0)) throw ConfigError("--sweep-aperture entries must be > 0");
  }
  for (double p : sweep_power) {
    if (!(p > 0.0)) throw ConfigError("--sweep-power entries must be > 0");
  }
  solve.validate();
}

std::string RunRow::csv_header() {
  return "seed,S,K,L,M,total_aperture_m2,total_power_A2,status,pc_A2,pc_ratio,max_v_se,max_v_he,"
         "peak_density_A2_per_m2,epa_peak_density_A2_per_m2,avg_density_A2_per_m2,peak_ratio,"
         "epa_peak_ratio,max_surface_excess_A2,outer_iters,min_sinr,mean_se_bps_hz,sum_q_nl_W,message";
}

std::string RunRow::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  std::string msg = message;
  std::replace(msg.begin(), msg.end(), ',', ';');
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  os << seed << ',' << surfaces << ',' << users << ',' << ius << ',' << eus << ',' << aperture << ','
     << power << ',' << status << ',' << pc << ',' << pc_ratio << ',' << max_v_se << ',' << max_v_he
     << ',' << peak_density << ',' << epa_peak_density << ',' << average_density << ','
     << peak_ratio << ',' << epa_peak_ratio << ',' << max_surface_excess << ',' << outer_iters
     << ',' << min_sinr << ',' << mean_se << ',' << sum_q_nl << ',' << msg;
  return os.str();
}

std::string MedianRow::csv_header() {
  return "S,total_aperture_m2,total_power_A2,seeds,ok_seeds,median_pc_ratio,median_peak_ratio,"
         "median_epa_peak_ratio,median_peak_density_A2_per_m2";
}

std::string MedianRow::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << surfaces << ',' << aperture << ',' << power << ',' << seeds << ',' << ok << ',' << pc_ratio
     << ',' << peak_ratio << ',' << epa_peak_ratio << ',' << peak_density;
  return os.str();
}

RunRow run_scenario(const Scenario& scn, const RunConfig& config, SolveResult* result) {
  RunRow row;
  row.seed = scn.seed;
  row.surfaces = scn.num_surfaces();
  row.users = scn.num_users();
  row.ius = scn.num_iu;
  row.eus = scn.num_eu;
  row.aperture = scn.total_aperture;
  row.power = scn.total_power;
  row.average_density = scn.total_power / scn.total_aperture;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    const LinkModel link = build_link(scn, LinkOptions{config.quad_n, config.solve.alpha_zf});
    const QosTargets targets = qos_targets(link.gains, scn);
    SolveResult res = solve(scn, link.gains, targets, config.solve);
    const MetricsReport opt = evaluate_metrics(scn, link.gains, link.beams, res.omega_star);
    const MetricsReport epa = evaluate_metrics(
        scn, link.gains, link.beams, epa_allocation(scn.total_power, scn.num_surfaces(), scn.num_users()));
    row.status = to_string(res.status);
    row.pc = res.pc;
    row.pc_ratio = res.pc / scn.total_power;
    row.max_v_se = res.violations_se.size() ? res.violations_se.maxCoeff() : 0.0;
    row.max_v_he = res.violations_he.size() ? res.violations_he.maxCoeff() : 0.0;
    row.peak_density = opt.peak_density;
    row.epa_peak_density = epa.peak_density;
    row.peak_ratio = opt.peak_density / row.average_density;
    row.epa_peak_ratio = epa.peak_density / row.average_density;
    row.max_surface_excess = res.surface_excess.size() ? res.surface_excess.maxCoeff() : 0.0;
    row.outer_iters = static_cast<int>(res.trace.size());
    row.min_sinr = opt.sinr.size() ? opt.sinr.minCoeff() : 0.0;
    row.mean_se = opt.se.size() ? opt.se.mean() : 0.0;
    row.sum_q_nl = opt.q_nl.sum();
    if (result) *result = std::move(res);
  } catch (const Error& e) {
    row.status = "error";
    row.message = e.what();
    for (double* v : {&row.pc, &row.pc_ratio, &row.max_v_se, &row.max_v_he, &row.peak_density,
                      &row.epa_peak_density, &row.peak_ratio, &row.epa_peak_ratio,
                      &row.max_surface_excess, &row.min_sinr, &row.mean_se, &row.sum_q_nl}) {
      *v = nan;
    }
  }
  return row;
}

std::vector<MedianRow> sweep_medians(const std::vector<RunRow>& rows) {
  using Key = std::tuple<int, double, double>;
  std::map<Key, std::vector<const RunRow*>> groups;
  std::vector<Key> order;
  for (const auto& r : rows) {
    const Key key{r.surfaces, r.aperture, r.power};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<MedianRow> out;
  for (const Key& key : order) {
    MedianRow m;
    std::tie(m.surfaces, m.aperture, m.power) = key;
    std::vector<double> pc, peak, epa_peak, density;
    for (const RunRow* r : groups[key]) {
      ++m.seeds;
      if (r->status == "error" || r->status == "degenerate") continue;
      ++m.ok;
      pc.push_back(r->pc_ratio);
      peak.push_back(r->peak_ratio);
      epa_peak.push_back(r->epa_peak_ratio);
      density.push_back(r->peak_density);
    }
    m.pc_ratio = median(pc);
    m.peak_ratio = median(peak);
    m.epa_peak_ratio = median(epa_peak);
    m.peak_density = median(density);
    out.push_back(m);
  }
  return out;
}

int worker_count(const RunConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("CAPA_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream&) {
  config.validate();
  ensure_dir(config.out_dir);
  const Scenario scn = scenario_from_config(config);
  const auto path = config.out_dir / "scenario.json";
  save_scenario(scn, path);
  out << "scenario " << path.string() << '\n'
      << "S=" << scn.num_surfaces() << " K=" << scn.num_users() << " L=" << scn.num_iu
      << " M=" << scn.num_eu << " seed=" << scn.seed << '\n';
  for (const auto& s : scn.surfaces) {
    out << "surface " << s.id << " side_m=" << s.side << " area_m2=" << s.area
        << " budget_A2=" << s.power_budget << '\n';
  }
  return kOk;
}

int cmd_epa(const RunConfig& config, std::ostream& out, std::ostream&) {
  config.validate();
  if (!config.scenario) throw ConfigError("epa needs --scenario");
  ensure_dir(config.out_dir);
  const Scenario scn = load_or_generate(config);
  const LinkModel link = build_link(scn, LinkOptions{config.quad_n, config.solve.alpha_zf});
  const QosTargets targets = qos_targets(link.gains, scn);
  const PowerAllocation epa = epa_allocation(scn.total_power, scn.num_surfaces(), scn.num_users());
  const MetricsReport rep = evaluate_metrics(scn, link.gains, link.beams, epa);

  write_file(config.out_dir / "epa.csv", MetricsReport::csv_header() + '\n' + rep.csv_row(scn) + '\n');
  std::ostringstream t;
  t.precision(17);
  t << "user,kind,target\n";
  for (int l = 0; l < scn.num_iu; ++l) t << l << ",IU," << targets.gamma_epa(l) << '\n';
  for (int m = 0; m < scn.num_eu; ++m) t << scn.num_iu + m << ",EU," << targets.q_epa(m) << '\n';
  write_file(config.out_dir / "targets.csv", t.str());
  out << "pc_A2=" << rep.pc << " peak_density_A2_per_m2=" << rep.peak_density << '\n';
  return kOk;
}

int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate();
  ensure_dir(config.out_dir);
  const Scenario scn = load_or_generate(config);
  SolveResult res;
  const RunRow row = run_scenario(scn, config, &res);
  write_file(config.out_dir / "result.csv", RunRow::csv_header() + '\n' + row.csv_row() + '\n');
  if (row.status == "error") {
    err << "error: " << row.message << '\n';
    return kRuntime;
  }
  write_file(config.out_dir / "trace.csv", trace_csv(res));
  out << "status=" << row.status << " pc_ratio=" << row.pc_ratio << " peak_ratio=" << row.peak_ratio
      << '\n';
  return row.status == "degenerate" ? kRuntime : kOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream&) {
  config.validate();
  ensure_dir(config.out_dir);
  struct Job {
    int surfaces;
    double aperture;
    double power;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int s : config.sweep_surfaces) {
    for (double a : config.sweep_aperture) {
      for (double p : config.sweep_power) {
        for (int n = 0; n < config.seeds_per_point; ++n) {
          jobs.push_back({s, a, p, config.seed + static_cast<std::uint64_t>(n)});
        }
      }
    }
  }

  std::vector<RunRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      RunConfig c = config;
      c.surfaces = j.surfaces;
      c.aperture = j.aperture;
      c.power = j.power;
      c.seed = j.seed;
      try {
        rows[i] = run_scenario(scenario_from_config(c), c);
      } catch (const Error& e) {
        RunRow r;
        r.seed = j.seed;
        r.surfaces = j.surfaces;
        r.users = c.ius + c.eus;
        r.ius = c.ius;
        r.eus = c.eus;
        r.aperture = j.aperture;
        r.power = j.power;
        r.status = "error";
        r.message = e.what();
        rows[i] = r;
      }
    }
  };
  const int workers = std::min<int>(worker_count(config), static_cast<int>(jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ostringstream all;
  all << RunRow::csv_header() << '\n';
  for (const auto& r : rows) all << r.csv_row() << '\n';
  write_file(config.out_dir / "sweep.csv", all.str());

  std::ostringstream med;
  med << MedianRow::csv_header() << '\n';
  for (const auto& m : sweep_medians(rows)) {
    med << m.csv_row() << '\n';
    out << "S=" << m.surfaces << " A=" << m.aperture << " P=" << m.power
        << " median_pc_ratio=" << m.pc_ratio << " median_peak_ratio=" << m.peak_ratio << '\n';
  }
  write_file(config.out_dir / "sweep_median.csv", med.str());
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed CAPA SWIPT power-allocation simulator", "capa"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::optional<double> alpha_zf;
  std::string scenario_path;
  std::string out_dir = ".";
  std::uint64_t seed = cfg.seed;

  app.add_option("--seed", seed, "RNG seed (first seed of a sweep)");
  app.add_option("--surfaces", cfg.surfaces, "number of surfaces S");
  app.add_option("--ius", cfg.ius, "information users L");
  app.add_option("--eus", cfg.eus, "energy users M");
  app.add_option("--users", cfg.users, "total users K, checked against L + M");
  app.add_option("--aperture", cfg.aperture, "total aperture (m^2)");
  app.add_option("--power", cfg.power, "total power P_t (A^2)");
  app.add_option("--quad-n", cfg.quad_n, "Gauss-Legendre nodes per side");
  app.add_option("--alpha-zf", alpha_zf, "absolute RZF regularization");
  app.add_option("--rho0", cfg.solve.rho0, "initial penalty weight");
  app.add_option("--beta", cfg.solve.beta, "IU/EU balancing factor");
  app.add_option("--eps", cfg.solve.epsilon, "outer feasibility tolerance");
  app.add_option("--delta", cfg.solve.delta, "inner step tolerance");
  app.add_option("--memory-q", cfg.solve.memory_q, "L-BFGS memory depth");
  app.add_option("--max-outer", cfg.solve.max_outer, "outer iteration cap");
  app.add_option("--max-inner", cfg.solve.max_inner, "inner iteration cap");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--scenario", scenario_path, "scenario file (JSON)");
  app.add_option("--seeds-per-point", cfg.seeds_per_point, "seeds per sweep point");
  app.add_option("--sweep-surfaces", cfg.sweep_surfaces, "S values")->delimiter(',');
  app.add_option("--sweep-aperture", cfg.sweep_aperture, "aperture values (m^2)")->delimiter(',');
  app.add_option("--sweep-power", cfg.sweep_power, "power values (A^2)")->delimiter(',');
  app.add_option("--threads", cfg.threads, "worker threads (default: CAPA_THREADS)");

  auto* gen = app.add_subcommand("generate", "draw a scenario and write scenario.json");
  auto* epa = app.add_subcommand("epa", "EPA metrics and QoS targets for a scenario");
  auto* opt = app.add_subcommand("optimize", "run the power-allocation solver");
  auto* swp = app.add_subcommand("sweep", "sweep S, aperture and power over seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  cfg.seed = seed;
  cfg.out_dir = out_dir;
  cfg.solve.alpha_zf = alpha_zf;
  if (!scenario_path.empty()) cfg.scenario = scenario_path;

  try {
    if (gen->parsed()) return cmd_generate(cfg, out, err);
    if (epa->parsed()) return cmd_epa(cfg, out, err);
    if (opt->parsed()) return cmd_optimize(cfg, out, err);
    if (swp->parsed()) return cmd_sweep(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const capa::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace capa::cli
