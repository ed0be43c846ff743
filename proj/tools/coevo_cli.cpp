// Command-line front end: simulation, fluid integration, threshold
// optimization, parameter sweeps, seed sizing, and convergence studies.
// A JSON config is the single source of parameters; flags override scalars.
//
// Exit codes: 0 success, 2 usage/config error, 3 numeric failure,
// 4 target not reached.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coevo/control.hpp"
#include "coevo/convergence.hpp"
#include "coevo/csv.hpp"

using json = nlohmann::json;
using namespace coevo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNotReached = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  double step = -1.0;
  double horizon = -1.0;
};

json load_config(const CliOptions& opt) {
  if (opt.config_path.empty()) throw ConfigError("--config is required");
  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("cannot open config file: " + opt.config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  // flag overrides for scalars
  if (opt.step > 0.0) cfg["h"] = opt.step;
  if (opt.horizon > 0.0) cfg["horizon"] = opt.horizon;
  if (!opt.seeds.empty()) cfg["seeds"] = opt.seeds;
  return cfg;
}

template <typename T>
T require(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("config field missing: " + key);
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

ThresholdDistribution parse_dist(const json& cfg) {
  if (!cfg.contains("dist")) return ThresholdDistribution::uniform01();
  const json& d = cfg.at("dist");
  const auto kind = require<std::string>(d, "kind");
  if (kind == "uniform01") return ThresholdDistribution::uniform01();
  if (kind == "exponential") return ThresholdDistribution::exponential(require<double>(d, "rate"));
  if (kind == "custom") return ThresholdDistribution::from_csv(require<std::string>(d, "csv"));
  throw ConfigError("unknown dist kind: " + kind);
}

CopyPolicy parse_policy(const json& cfg) {
  if (!cfg.contains("policy")) return CopyPolicy::constant(1.0);
  const json& p = cfg.at("policy");
  const auto kind = require<std::string>(p, "kind");
  if (kind == "constant") return CopyPolicy::constant(require<double>(p, "sigma"));
  if (kind == "time-threshold") return CopyPolicy::time_threshold(require<double>(p, "tau"));
  if (kind == "piecewise")
    return CopyPolicy::piecewise(require<std::vector<double>>(p, "breakpoints"),
                                 require<std::vector<double>>(p, "values"));
  throw ConfigError("unknown policy kind: " + kind);
}

CoevolParams parse_coevol_params(const json& cfg) {
  CoevolParams p;
  p.lambda = require<double>(cfg, "lambda");
  p.beta = require<double>(cfg, "beta");
  p.gamma = require<double>(cfg, "Gamma");
  p.alpha = get_or(cfg, "alpha", 0.8);
  p.psi = get_or(cfg, "psi", 1.0);
  p.validate();
  return p;
}

ScenarioConfig parse_scenario(const json& cfg) {
  ScenarioConfig sc;
  sc.params = parse_coevol_params(cfg);
  sc.d0 = require<double>(cfg, "d0");
  sc.xd0_ratio = get_or(cfg, "xd0_ratio", 0.5);
  sc.horizon = get_or(cfg, "horizon", -1.0);
  sc.h = get_or(cfg, "h", 1e-3);
  return sc;
}

std::vector<std::uint64_t> parse_seeds(const json& cfg, bool required = true) {
  auto seeds = get_or(cfg, "seeds", std::vector<std::uint64_t>{});
  if (seeds.empty() && required)
    throw ConfigError("stochastic run needs a nonempty 'seeds' list");
  return seeds;
}

void write_preamble(CsvWriter& w, const json& cfg) {
  w.comment(std::string("coevo ") + kVersion);
  w.comment("config: " + cfg.dump());
}

/// Run fn(i) for i in [0, count) on up to `jobs` threads; exceptions are
/// rethrown on the caller thread.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr err;
  const int n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= count || err) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// ---- subcommands ----

int cmd_simulate(const CliOptions& opt) {
  const json cfg = load_config(opt);
  const auto model = require<std::string>(cfg, "model");
  const auto seeds = parse_seeds(cfg);

  if (model == "hilt-exact" || model == "hilt-scaled") {
    HiltParams params;
    params.n = require<std::int64_t>(cfg, "N");
    params.gamma_total = require<double>(cfg, "Gamma");
    params.dist = parse_dist(cfg);
    if (cfg.contains("d0_count"))
      params.d0_count = require<std::int64_t>(cfg, "d0_count");
    else
      params.d0_count = static_cast<std::int64_t>(
          std::llround(require<double>(cfg, "d0") * static_cast<double>(params.n)));
    params.validate();
    const bool scaled = model == "hilt-scaled";
    // exact: horizon in steps; scaled: horizon in fluid time (minislots = N*horizon)
    const double horizon_time = get_or(cfg, "horizon", 10.0);
    const std::int64_t steps = scaled
        ? static_cast<std::int64_t>(std::ceil(horizon_time * static_cast<double>(params.n)))
        : static_cast<std::int64_t>(std::llround(get_or(cfg, "horizon_steps",
                                                        static_cast<double>(4 * params.n))));
    std::vector<std::vector<HiltCounts>> paths(seeds.size());
    parallel_for(seeds.size(), opt.jobs, [&](std::size_t i) {
      Rng rng(seeds[i]);
      paths[i] = scaled ? run_scaled(params, steps, rng) : run_exact(params, steps, rng);
    });
    CsvWriter w(opt.out_path);
    write_preamble(w, cfg);
    w.row({"seed", scaled ? "minislot" : "k", "B", "D"});
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (const auto& st : paths[i])
        w.row({std::to_string(seeds[i]), std::to_string(st.step),
               std::to_string(st.b), std::to_string(st.d)});
    return kExitOk;
  }

  if (model == "coevolve-ctmc") {
    const auto sc = parse_scenario(cfg);
    const auto policy = parse_policy(cfg);
    const std::int64_t n = require<std::int64_t>(cfg, "N");
    const double horizon = sc.horizon > 0.0 ? sc.horizon : default_horizon(sc.params);
    const double a_inf = terminal_destination_fraction(sc.params, sc.d0, sc.h);
    const double x_target = sc.params.alpha * a_inf * static_cast<double>(n);
    CoevolCounts z0;
    z0.n = n;
    z0.d = static_cast<std::int64_t>(std::llround(sc.d0 * static_cast<double>(n)));
    z0.xd = std::min(z0.d, static_cast<std::int64_t>(
                               std::llround(sc.xd0_ratio * sc.d0 * static_cast<double>(n))));
    std::vector<CtmcRunResult> runs(seeds.size());
    parallel_for(seeds.size(), opt.jobs, [&](std::size_t i) {
      Rng rng(seeds[i]);
      runs[i] = run_ctmc(z0, sc.params, policy, horizon, rng, x_target);
    });
    CsvWriter w(opt.out_path);
    write_preamble(w, cfg);
    w.row({"seed", "t", "epoch_kind", "B", "D", "X_b", "X_d", "Y"});
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (std::size_t e = 1; e < runs[i].events.size(); ++e) {
        const auto& ev = runs[i].events[e];
        w.row({std::to_string(seeds[i]), format_number(ev.t), epoch_name(ev.epoch),
               std::to_string(ev.state.b), std::to_string(ev.state.d),
               std::to_string(ev.state.xb), std::to_string(ev.state.xd),
               std::to_string(ev.state.y)});
      }
    CsvWriter ws(opt.out_path + ".summary.csv");
    write_preamble(ws, cfg);
    ws.row({"seed", "T_hit", "Y_at_T"});
    for (std::size_t i = 0; i < seeds.size(); ++i)
      ws.row({std::to_string(seeds[i]),
              runs[i].target_time ? format_number(*runs[i].target_time) : "inf",
              std::to_string(runs[i].y_at_target)});
    return kExitOk;
  }

  throw ConfigError("simulate: unknown model '" + model + "'");
}

int cmd_fluid(const CliOptions& opt) {
  const json cfg = load_config(opt);
  const auto model = require<std::string>(cfg, "model");
  const double h = get_or(cfg, "h", 1e-3);

  Trajectory<5> traj;
  CopyPolicy policy = CopyPolicy::constant(0.0);
  bool has_policy = false;
  if (model == "hilt-fluid") {
    const double gamma = require<double>(cfg, "Gamma");
    const double d0 = require<double>(cfg, "d0");
    const auto dist = parse_dist(cfg);
    const double horizon = get_or(cfg, "horizon", 20.0);
    const auto two = hilt_fluid_trajectory(dist, gamma, d0, horizon, h);
    traj.t = two.t;
    for (const auto& s : two.y) traj.y.push_back({s[0], s[1], 0.0, 0.0, 0.0});
  } else if (model == "coevolve-fluid") {
    const auto sc = parse_scenario(cfg);
    policy = parse_policy(cfg);
    has_policy = true;
    const double horizon = sc.horizon > 0.0 ? sc.horizon : default_horizon(sc.params);
    traj = integrate_coevol(sc.params, policy, sc.initial().state(), horizon, sc.h);
  } else {
    throw ConfigError("fluid: unknown model '" + model + "'");
  }

  CsvWriter w(opt.out_path);
  write_preamble(w, cfg);
  w.row({"t", "b", "d", "x_b", "x_d", "y", "sigma"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.y[i];
    w.row({format_number(traj.t[i]), format_number(s[0]), format_number(s[1]),
           format_number(s[2]), format_number(s[3]), format_number(s[4]),
           format_number(has_policy ? policy.value(traj.t[i]) : 0.0)});
  }
  return kExitOk;
}

int cmd_optimize(const CliOptions& opt) {
  const json cfg = load_config(opt);
  const auto sc = parse_scenario(cfg);
  const int grid = get_or(cfg, "grid_points", 64);
  OptimizeResult res;
  try {
    res = optimize_tau(sc.params, sc.initial(), grid, sc.horizon, sc.h);
  } catch (const UnreachableTargetError& e) {
    std::cerr << "optimize: " << e.what() << "\n";
    return kExitNotReached;
  }
  CsvWriter w(opt.out_path);
  write_preamble(w, cfg);
  w.row({"tau_star", "T", "y_T", "C", "tau_sat", "a_inf"});
  w.row({format_number(res.tau_star), format_number(res.best.target_t),
         format_number(res.best.y_at_target), format_number(res.best.cost),
         format_number(res.tau_sat), format_number(res.best.a_inf)});
  CsvWriter wg(opt.out_path + ".grid.csv");
  write_preamble(wg, cfg);
  wg.row({"tau", "T", "y_T", "C"});
  for (const auto& g : res.grid)
    wg.row({format_number(g.tau), format_number(g.target_t),
            format_number(g.y_at_target), format_number(g.cost)});
  return kExitOk;
}

int cmd_sweep(const CliOptions& opt) {
  const json cfg = load_config(opt);
  const auto sc = parse_scenario(cfg);
  if (!cfg.contains("sweep")) throw ConfigError("sweep: config needs a 'sweep' object");
  const auto param = require<std::string>(cfg.at("sweep"), "param");
  const auto values = require<std::vector<double>>(cfg.at("sweep"), "values");
  const int grid = get_or(cfg, "grid_points", 64);

  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), opt.jobs, [&](std::size_t i) {
    auto out = sweep(param, {values[i]}, sc, grid);
    rows[i] = out.front();
  });
  CsvWriter w(opt.out_path);
  write_preamble(w, cfg);
  w.row({"param", "value", "tau_star", "T", "y_T", "C", "status"});
  for (const auto& r : rows)
    w.row({r.param, format_number(r.value), format_number(r.tau_star),
           format_number(r.target_t), format_number(r.y_at_target),
           format_number(r.cost), r.status});
  return kExitOk;
}

int cmd_seed_size(const CliOptions& opt) {
  const json cfg = load_config(opt);
  const double beta_target = require<double>(cfg, "beta_target");
  const double gamma = require<double>(cfg, "Gamma");
  const double t_deadline = get_or(cfg, "T", -1.0);
  double d0_star;
  double a_check;
  try {
    if (t_deadline >= 0.0) {
      d0_star = seed_for_deadline(beta_target, gamma, t_deadline);
      a_check = destination_fraction_at(gamma, d0_star, t_deadline);
    } else {
      d0_star = seed_for_target(gamma, beta_target);
      a_check = terminal_fraction_uniform(gamma, d0_star);
    }
  } catch (const UnreachableTargetError& e) {
    std::cerr << "seed-size: " << e.what() << "\n";
    return kExitNotReached;
  }
  CsvWriter w(opt.out_path);
  write_preamble(w, cfg);
  w.row({"beta_target", "Gamma", "T", "d0_star", "a_check"});
  w.row({format_number(beta_target), format_number(gamma),
         t_deadline >= 0.0 ? format_number(t_deadline) : "inf",
         format_number(d0_star), format_number(a_check)});
  return kExitOk;
}

int cmd_converge(const CliOptions& opt) {
  const json cfg = load_config(opt);
  const auto model = require<std::string>(cfg, "model");
  const auto n_list = require<std::vector<std::int64_t>>(cfg, "N_list");
  if (n_list.size() < 2) throw ConfigError("converge: need at least 2 N values");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw ConfigError("converge: N list must be strictly increasing");
  const int seeds_per_n = get_or(cfg, "seeds_per_N", 20);
  const std::uint64_t seed0 = get_or(cfg, "seed_base", std::uint64_t{1});
  const double horizon = get_or(cfg, "horizon", 10.0);
  const double h = get_or(cfg, "h", 1e-3);

  std::vector<ConvergencePoint> points;
  for (std::int64_t n : n_list) {
    std::vector<double> dist(static_cast<std::size_t>(seeds_per_n));
    if (model == "hilt" || model == "hilt-scaled") {
      const double gamma = require<double>(cfg, "Gamma");
      const double d0 = require<double>(cfg, "d0");
      const auto tdist = parse_dist(cfg);
      parallel_for(dist.size(), opt.jobs, [&](std::size_t i) {
        dist[i] = hilt_supnorm_distance(tdist, gamma, d0, n, horizon,
                                        seed0 + i, h);
      });
    } else if (model == "coevolve" || model == "coevolve-ctmc") {
      const auto sc = parse_scenario(cfg);
      const auto policy = parse_policy(cfg);
      parallel_for(dist.size(), opt.jobs, [&](std::size_t i) {
        dist[i] = coevol_supnorm_distance(sc.params, policy, sc.d0,
                                          sc.xd0_ratio * sc.d0, n, horizon,
                                          seed0 + i, h);
      });
    } else {
      throw ConfigError("converge: unknown model '" + model + "'");
    }
    points.push_back(summarize_distances(n, std::move(dist)));
  }
  CsvWriter w(opt.out_path);
  write_preamble(w, cfg);
  w.row({"N", "median", "iqr_low", "iqr_high", "seeds"});
  for (const auto& pt : points)
    w.row({std::to_string(pt.n), format_number(pt.median),
           format_number(pt.iqr_low), format_number(pt.iqr_high),
           std::to_string(pt.distances.size())});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coevo: joint interest/content spread simulation and control"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON config file")->required();
  app.add_option("--out", opt.out_path, "output CSV path")->required();
  app.add_option("--seeds", opt.seeds, "seed list override")->delimiter(',');
  app.add_option("--jobs", opt.jobs, "worker threads");
  app.add_option("--step", opt.step, "integrator step override");
  app.add_option("--horizon", opt.horizon, "horizon override");

  auto* simulate = app.add_subcommand("simulate", "stochastic model runs");
  auto* fluid = app.add_subcommand("fluid", "fluid-limit integration");
  auto* optimize = app.add_subcommand("optimize", "optimal time threshold");
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep of the optimizer");
  auto* seed_size = app.add_subcommand("seed-size", "seed sizing for a target fraction");
  auto* converge = app.add_subcommand("converge", "convergence study vs the fluid limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (fluid->parsed()) return cmd_fluid(opt);
    if (optimize->parsed()) return cmd_optimize(opt);
    if (sweep_cmd->parsed()) return cmd_sweep(opt);
    if (seed_size->parsed()) return cmd_seed_size(opt);
    if (converge->parsed()) return cmd_converge(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
