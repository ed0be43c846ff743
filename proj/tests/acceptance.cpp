// Acceptance suite: one pass/fail line per criterion, with timings. Exits
// nonzero if any criterion fails. Tolerances are pinned here on purpose.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "coevo/control.hpp"
#include "coevo/convergence.hpp"
#include "coevo/csv.hpp"
#include "coevo/hilt_fluid.hpp"
#include "coevo/hilt_markov.hpp"

using namespace coevo;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("%s  criterion %d: %s  [%.2f s]%s%s\n", pass ? "PASS" : "FAIL",
              index, name.c_str(), seconds, detail.empty() ? "" : "  -- ",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int index, const std::string& name,
         const std::function<bool(std::string&)>& check) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = check(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(index, name, pass, secs, detail);
}

double median_distance(const std::vector<double>& d) {
  auto sorted = d;
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, 0.5);
}

// shared random-config generator for criteria 6-8
struct RandomConfig {
  CoevolParams params;
  CoevolInitial init;
};

RandomConfig draw_config(std::mt19937_64& gen) {
  auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  };
  RandomConfig c;
  c.params.lambda = u(2.0, 8.0);
  c.params.beta = u(0.5, 2.0);
  c.params.gamma = u(0.3, 0.9);
  c.params.alpha = u(0.4, 0.9);
  c.params.psi = u(0.0, 20.0);
  c.init.d0 = u(0.1, 0.5);
  c.init.xd0 = c.init.d0 * u(0.2, 0.8);
  return c;
}

// ---- criteria ----

bool closed_form_fidelity(std::string& detail) {
  auto dist = ThresholdDistribution::uniform01();
  auto traj = hilt_fluid_trajectory(dist, 0.9, 0.2, 20.0, 1e-3);
  double sup = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto ref = hilt_closed_form_uniform(0.9, 0.2, traj.t[i]);
    sup = std::max({sup, std::fabs(traj.y[i][0] - ref[0]),
                    std::fabs(traj.y[i][1] - ref[1])});
  }
  detail = "sup error " + format_number(sup);
  return sup < 1e-6;
}

bool terminal_fractions(std::string& detail) {
  const auto uni = hilt_integrate_to_absorption(
      ThresholdDistribution::uniform01(), 0.9, 0.2);
  const double err_uni = std::fabs(uni[0] - 0.2 / 0.28);

  // exponential thresholds, rate 4, Gamma 0.5: root of b = 1 - 0.8 e^{-2b}
  const double root = terminal_fraction_exponential(2.0, 0.2);
  const auto exp_end = hilt_integrate_to_absorption(
      ThresholdDistribution::exponential(4.0), 0.5, 0.2);
  const double err_exp = std::fabs(exp_end[0] - root);

  detail = "uniform err " + format_number(err_uni) + ", exponential err " +
           format_number(err_exp);
  return err_uni < 1e-4 && err_exp < 1e-4;
}

bool discrete_vs_fluid_gap(std::string& detail) {
  const double b_inf = 0.2 / 0.28;
  std::vector<double> gaps;
  for (std::int64_t n : {100, 1000, 3000}) {
    const std::int64_t k = static_cast<std::int64_t>(std::llround(0.2 * n));
    gaps.push_back(std::fabs(discrete_influence(n, 0.9, k) / n - b_inf));
  }
  detail = "gaps " + format_number(gaps[0]) + " > " + format_number(gaps[1]) +
           " > " + format_number(gaps[2]);
  return gaps[0] > gaps[1] && gaps[1] > gaps[2];
}

bool influence_chain_convergence(std::string& detail) {
  auto dist = ThresholdDistribution::uniform01();
  std::vector<double> medians;
  for (std::int64_t n : {50, 100, 500, 1000}) {
    std::vector<double> d;
    for (int seed = 0; seed < 20; ++seed)
      d.push_back(hilt_supnorm_distance(
          dist, 0.9, 0.2, n, 10.0, static_cast<std::uint64_t>(1000 * n + seed)));
    medians.push_back(median_distance(d));
  }
  detail = "medians";
  bool ok = true;
  for (std::size_t i = 0; i < medians.size(); ++i) {
    detail += " " + format_number(medians[i]);
    if (i > 0 && !(medians[i] < medians[i - 1])) ok = false;
  }
  return ok;
}

bool coevolution_chain_convergence(std::string& detail) {
  // documented parameter set: lambda=4, beta=1, Gamma=0.5, d0=0.2, xd0=0.1
  CoevolParams p{4.0, 1.0, 0.5, 0.8, 1.0};
  const std::vector<std::pair<std::string, CopyPolicy>> policies = {
      {"sigma=1", CopyPolicy::constant(1.0)},
      {"sigma=0.3", CopyPolicy::constant(0.3)},
      {"tau=4", CopyPolicy::time_threshold(4.0)},
  };
  bool ok = true;
  for (const auto& [label, policy] : policies) {
    std::vector<double> medians;
    for (std::int64_t n : {50, 100, 500, 1000}) {
      std::vector<double> d;
      for (int seed = 0; seed < 20; ++seed)
        d.push_back(coevol_supnorm_distance(
            p, policy, 0.2, 0.1, n, 10.0, static_cast<std::uint64_t>(seed + 1)));
      medians.push_back(median_distance(d));
    }
    detail += (detail.empty() ? "" : "; ") + label + ":";
    for (std::size_t i = 0; i < medians.size(); ++i) {
      detail += " " + format_number(medians[i]);
      if (i > 0 && !(medians[i] < medians[i - 1])) ok = false;
    }
  }
  return ok;
}

bool monotone_comparison(std::string& detail) {
  std::mt19937_64 gen(20240801);
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = draw_config(gen);
    // a pointwise-ordered pair: either two constants or two thresholds
    CopyPolicy hi = CopyPolicy::constant(1.0), lo = CopyPolicy::constant(0.0);
    if (trial % 2 == 0) {
      const double s2 = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
      const double s1 =
          s2 + (1.0 - s2) * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
      hi = CopyPolicy::constant(s1);
      lo = CopyPolicy::constant(s2);
    } else {
      const double t2 = std::uniform_real_distribution<double>(0.0, 5.0)(gen);
      const double t1 =
          t2 + std::uniform_real_distribution<double>(0.0, 5.0)(gen);
      hi = CopyPolicy::time_threshold(t1);
      lo = CopyPolicy::time_threshold(t2);
    }
    const auto z0 = cfg.init.state();
    const auto traj_hi = integrate_coevol(cfg.params, hi, z0, 10.0, 1e-3);
    const auto traj_lo = integrate_coevol(cfg.params, lo, z0, 10.0, 1e-3);
    bool bad = false;
    for (double t = 0.0; t <= 10.0; t += 0.05) {
      const auto a = traj_hi.sample(t);
      const auto b = traj_lo.sample(t);
      if (a[kXb] < b[kXb] - 1e-7 || a[kXd] < b[kXd] - 1e-7 ||
          a[kY] < b[kY] - 1e-7) {
        bad = true;
        break;
      }
    }
    if (bad) ++violations;
  }
  detail = std::to_string(violations) + " violations / 50";
  return violations == 0;
}

// shared state between criteria 7 and 8
std::vector<OptimizeResult> g_optimize_results;

bool threshold_dominance(std::string& detail) {
  std::mt19937_64 gen(20240802);
  int violations = 0;
  g_optimize_results.clear();
  for (int trial = 0; trial < 20; ++trial) {
    const auto cfg = draw_config(gen);
    OptimizeResult res;
    try {
      res = optimize_tau(cfg.params, cfg.init);
    } catch (const UnreachableTargetError&) {
      ++violations;
      continue;
    }
    g_optimize_results.push_back(res);
    double best_const = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10; ++i) {
      const auto r = evaluate_cost(cfg.params, cfg.init,
                                   CopyPolicy::constant(0.1 * i), -1.0, 1e-3,
                                   res.best.a_inf);
      if (r.reached) best_const = std::min(best_const, r.cost);
    }
    if (!(res.best.cost <= best_const + 1e-4)) ++violations;
  }
  detail = std::to_string(violations) + " violations / 20";
  return violations == 0;
}

bool optimizer_structure(std::string& detail) {
  // grid structure on every config optimized in the dominance check
  for (const auto& res : g_optimize_results) {
    for (std::size_t i = 1; i < res.grid.size(); ++i) {
      if (res.grid[i].target_t > res.grid[i - 1].target_t + 1e-6) {
        detail = "target time not nonincreasing across the tau grid";
        return false;
      }
      if (res.grid[i].y_at_target < res.grid[i - 1].y_at_target - 1e-6) {
        detail = "wasted copies not nondecreasing across the tau grid";
        return false;
      }
    }
  }

  // qualitative sweep signs on the documented base scenario
  ScenarioConfig base;
  base.params = {4.0, 1.0, 0.5, 0.8, 10.0};
  base.d0 = 0.2;
  base.xd0_ratio = 0.5;

  const auto full_seed = sweep("d0", {1.0}, base);
  if (full_seed[0].status != "ok" || full_seed[0].tau_star > 1e-6) {
    detail = "tau* != 0 when every node is seeded (d0 = 1)";
    return false;
  }
  const auto full_copies = sweep("xd0_ratio", {1.0}, base);
  if (full_copies[0].status != "ok" || full_copies[0].tau_star > 1e-6) {
    detail = "tau* != 0 when all seeds hold the content (x_d0 = d0)";
    return false;
  }
  const auto psi_rows = sweep("psi", {1.0, 5.0, 20.0}, base);
  for (std::size_t i = 1; i < psi_rows.size(); ++i) {
    if (psi_rows[i].status != "ok" ||
        psi_rows[i].tau_star > psi_rows[i - 1].tau_star + 1e-3) {
      detail = "tau* not nonincreasing in psi";
      return false;
    }
  }
  const auto lam_rows = sweep("lambda", {3.0, 4.0, 6.0, 8.0}, base);
  for (std::size_t i = 1; i < lam_rows.size(); ++i) {
    if (lam_rows[i].status != "ok" ||
        lam_rows[i].tau_star > lam_rows[i - 1].tau_star + 1e-3 ||
        lam_rows[i].cost > lam_rows[i - 1].cost + 1e-3) {
      detail = "tau* or C not nonincreasing in lambda";
      return false;
    }
  }
  detail = std::to_string(g_optimize_results.size()) + " grids + sweep signs ok";
  return true;
}

bool seed_sizing(std::string& detail) {
  // round trip: seed_for_target then terminal fraction
  for (double gamma : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (double target : {0.05, 0.2, 0.5, 0.8, 0.95}) {
      const double d0 = seed_for_target(gamma, target);
      if (std::fabs(terminal_fraction_uniform(gamma, d0) - target) > 1e-10) {
        detail = "terminal-fraction round trip broke at Gamma=" +
                 format_number(gamma);
        return false;
      }
    }
  }
  // deadline seed forward check
  for (double gamma : {0.2, 0.5, 0.8}) {
    for (double target : {0.3, 0.5, 0.7}) {
      for (double deadline : {0.5, 2.0, 8.0}) {
        const double d0 = seed_for_deadline(target, gamma, deadline);
        const double reached = destination_fraction_at(gamma, d0, deadline);
        // the asymptotic seed can overshoot a loose deadline; it must never
        // undershoot
        if (reached < target - 1e-8) {
          detail = "deadline seed undershoots at Gamma=" + format_number(gamma);
          return false;
        }
        if (d0 > seed_for_target(gamma, target) + 1e-12 &&
            std::fabs(reached - target) > 1e-8) {
          detail = "deadline forward check off by " +
                   format_number(reached - target);
          return false;
        }
      }
    }
  }
  // limits of the deadline seed
  const double at_zero = seed_for_deadline(0.4, 0.5, 0.0);
  const double at_inf = seed_for_deadline(0.4, 0.5, 1e6);
  const double asymptotic = 0.4 * (1.0 - 0.5) / (1.0 - 0.4 * 0.5);
  if (std::fabs(at_zero - 0.4) > 1e-6) {
    detail = "T=0 limit of the deadline seed is off";
    return false;
  }
  if (std::fabs(at_inf - asymptotic) > 1e-6) {
    detail = "T->inf limit of the deadline seed is off";
    return false;
  }
  detail = "all round trips within tolerance";
  return true;
}

}  // namespace

int main() {
  run(1, "closed-form fidelity of the interest ODE", closed_form_fidelity);
  run(2, "terminal destination fractions", terminal_fractions);
  run(3, "discrete-vs-fluid gap shrinks with N", discrete_vs_fluid_gap);
  run(4, "scaled influence chain converges to the ODE", influence_chain_convergence);
  run(5, "coevolution chain converges to the ODE", coevolution_chain_convergence);
  run(6, "monotone comparison in the copy policy", monotone_comparison);
  run(7, "best threshold beats every constant policy", threshold_dominance);
  run(8, "optimizer grid structure and sweep signs", optimizer_structure);
  run(9, "seed-sizing round trips", seed_sizing);
  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
