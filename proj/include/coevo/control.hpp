#ifndef COEVO_CONTROL_HPP
#define COEVO_CONTROL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coevo/coevolution_fluid.hpp"
#include "coevo/copy_policy.hpp"
#include "coevo/hilt_fluid.hpp"

namespace coevo {

class UnreachableTargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome of one policy evaluation: target time T, wasted-copies fraction
/// y(T), and total cost C = T + psi * y(T). When the target is not reached
/// within the horizon, `reached` is false and C is +inf.
struct CostReport {
  CopyPolicy policy = CopyPolicy::constant(0.0);
  bool reached = false;
  double target_t = std::numeric_limits<double>::infinity();
  double y_at_target = 0.0;
  double cost = std::numeric_limits<double>::infinity();
  double a_inf = 0.0;
};

/// Initial conditions of the coevolution ODE: z(0) = (0, d0, 0, x_d0, 0)
/// with 0 <= x_d0 <= d0.
struct CoevolInitial {
  double d0 = 0.2;
  double xd0 = 0.1;

  void validate() const {
    if (!(d0 >= 0.0 && d0 <= 1.0)) throw std::invalid_argument("d0 outside [0,1]");
    if (!(xd0 >= 0.0 && xd0 <= d0 + 1e-12))
      throw std::invalid_argument("x_d(0) outside [0, d0]");
  }

  CoevolFluidState state() const { return {0.0, d0, 0.0, xd0, 0.0}; }
};

/// Integrate the controlled ODE and assemble the cost report. Integration
/// stops at the target crossing (interpolated inside the straddling step);
/// an unreached target is reported, not thrown.
inline CostReport evaluate_cost(const CoevolParams& p, const CoevolInitial& init,
                                const CopyPolicy& policy, double horizon = -1.0,
                                double h = 1e-3, double a_inf_hint = -1.0) {
  p.validate();
  init.validate();
  if (horizon <= 0.0) horizon = default_horizon(p);
  CostReport report;
  report.policy = policy;
  report.a_inf = a_inf_hint >= 0.0 ? a_inf_hint : terminal_destination_fraction(p, init.d0, h);
  const double x_target = p.alpha * report.a_inf;

  CoevolFluidState z = init.state();
  double prev_t = 0.0;
  CoevolFluidState prev_z = z;
  if (z[kXb] + z[kXd] >= x_target) {
    report.reached = true;
    report.target_t = 0.0;
    report.y_at_target = z[kY];
    report.cost = report.target_t + p.psi * report.y_at_target;
    return report;
  }
  auto observe = [&](double t, const CoevolFluidState& s) {
    const double x = s[kXb] + s[kXd];
    if (x >= x_target) {
      const double x0 = prev_z[kXb] + prev_z[kXd];
      const double w = x > x0 ? (x_target - x0) / (x - x0) : 1.0;
      report.reached = true;
      report.target_t = prev_t + w * (t - prev_t);
      report.y_at_target = prev_z[kY] + w * (s[kY] - prev_z[kY]);
      return false;
    }
    prev_t = t;
    prev_z = s;
    return true;
  };
  std::vector<double> stops;
  for (double b : policy.breakpoints())
    if (b > 0.0 && b < horizon) stops.push_back(b);
  stops.push_back(horizon);
  double t = 0.0;
  for (double s : stops) {
    auto rhs = [&](double tt, const CoevolFluidState& zz) {
      return coevol_rhs(zz, p, policy, tt);
    };
    t = rk4_integrate<5>(rhs, z, t, s, h, observe);
    if (report.reached) break;
  }
  if (report.reached)
    report.cost = report.target_t + p.psi * report.y_at_target;
  return report;
}

inline CostReport evaluate_threshold_cost(const CoevolParams& p,
                                          const CoevolInitial& init, double tau,
                                          double horizon = -1.0, double h = 1e-3,
                                          double a_inf_hint = -1.0) {
  return evaluate_cost(p, init, CopyPolicy::time_threshold(tau), horizon, h,
                       a_inf_hint);
}

/// Saturation threshold: the smallest tau with tau >= T_tau. Thresholds
/// beyond it are indistinguishable from tau = T_tau, since copying stops at
/// the target time anyway. Throws UnreachableTargetError when even sigma == 1
/// cannot reach the target within the horizon.
inline double find_tau_saturation(const CoevolParams& p, const CoevolInitial& init,
                                  double horizon = -1.0, double h = 1e-3,
                                  double a_inf_hint = -1.0) {
  if (horizon <= 0.0) horizon = default_horizon(p);
  if (a_inf_hint < 0.0) a_inf_hint = terminal_destination_fraction(p, init.d0, h);
  const auto full = evaluate_cost(p, init, CopyPolicy::constant(1.0), horizon, h, a_inf_hint);
  if (!full.reached)
    throw UnreachableTargetError("target not reachable within horizon even with sigma = 1");
  // tau >= T_{sigma=1} implies tau >= T_tau; below the saturation point
  // g(tau) = tau - T_tau is negative, and g is increasing.
  const auto at_zero = evaluate_threshold_cost(p, init, 0.0, horizon, h, a_inf_hint);
  if (at_zero.reached && at_zero.target_t <= 0.0) return 0.0;
  double lo = 0.0, hi = full.target_t;
  auto g = [&](double tau) {
    const auto r = evaluate_threshold_cost(p, init, tau, horizon, h, a_inf_hint);
    if (!r.reached) return -std::numeric_limits<double>::infinity();
    return tau - r.target_t;
  };
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > horizon) { hi = horizon; break; }
  }
  for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

struct TauGridPoint {
  double tau = 0.0;
  double target_t = 0.0;
  double y_at_target = 0.0;
  double cost = 0.0;
};

struct OptimizeResult {
  double tau_star = 0.0;
  CostReport best;
  double tau_sat = 0.0;
  std::vector<TauGridPoint> grid;  // coarse scan, for structure checks
};

/// Optimal time threshold: 64-point grid scan on [0, tau_sat] followed by
/// golden-section refinement of the best bracket to 1e-4 absolute. The cost
/// is continuous in tau but not proven unimodal, hence grid first. Ties break
/// toward smaller tau.
inline OptimizeResult optimize_tau(const CoevolParams& p, const CoevolInitial& init,
                                   int grid_points = 64, double horizon = -1.0,
                                   double h = 1e-3) {
  if (grid_points < 2) throw std::invalid_argument("optimize_tau: grid resolution must be > 1");
  if (horizon <= 0.0) horizon = default_horizon(p);
  const double a_inf = terminal_destination_fraction(p, init.d0, h);
  OptimizeResult out;
  out.tau_sat = find_tau_saturation(p, init, horizon, h, a_inf);

  auto eval = [&](double tau) {
    return evaluate_threshold_cost(p, init, tau, horizon, h, a_inf);
  };

  std::vector<double> taus;
  for (int i = 0; i < grid_points; ++i)
    taus.push_back(out.tau_sat * static_cast<double>(i) / (grid_points - 1));
  std::size_t best_i = 0;
  std::vector<CostReport> reports;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    reports.push_back(eval(taus[i]));
    out.grid.push_back({taus[i], reports[i].target_t, reports[i].y_at_target,
                        reports[i].cost});
    if (reports[i].cost < reports[best_i].cost - 1e-6) best_i = i;
  }

  double lo = taus[best_i > 0 ? best_i - 1 : 0];
  double hi = taus[std::min(best_i + 1, taus.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  auto fc = eval(c), fd = eval(d);
  while (hi - lo > 1e-4) {
    if (fc.cost < fd.cost) {
      hi = d; d = c; fd = fc;
      c = hi - invphi * (hi - lo);
      fc = eval(c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + invphi * (hi - lo);
      fd = eval(d);
    }
  }
  double tau_refined = 0.5 * (lo + hi);
  CostReport refined = eval(tau_refined);
  // keep the grid minimizer on a tie, so flat landscapes resolve to the
  // smallest tau; the 1e-6 band absorbs step-grid jitter from the tau split
  if (reports[best_i].cost <= refined.cost + 1e-6) {
    out.tau_star = taus[best_i];
    out.best = reports[best_i];
  } else {
    out.tau_star = tau_refined;
    out.best = refined;
  }
  return out;
}

/// Seed size that makes the terminal destination fraction hit
/// `b_inf_target` (uniform thresholds): d0 = b(1-Gamma)/(1 - b Gamma).
inline double seed_for_target(double gamma, double b_inf_target) {
  if (!(b_inf_target >= 0.0 && b_inf_target <= 1.0))
    throw std::invalid_argument("seed_for_target: target outside [0,1]");
  if (gamma >= 1.0) {
    // any positive seed converts everyone; only the full target is meaningful
    if (b_inf_target >= 1.0) return 0.0;
    if (b_inf_target == 0.0) return 0.0;
    throw std::invalid_argument("seed_for_target: partial target unattainable at Gamma = 1");
  }
  return b_inf_target * (1.0 - gamma) / (1.0 - b_inf_target * gamma);
}

/// Destination fraction a(T) = b(T) + d(T) of the uniform-threshold fluid
/// limit, a(T) = d0 (1/r - (1/r - 1) e^{-rT}).
inline double destination_fraction_at(double gamma, double d0, double t) {
  const double r = 1.0 - gamma + gamma * d0;
  if (r == 0.0) return 0.0;
  return d0 * (1.0 / r - (1.0 / r - 1.0) * std::exp(-r * t));
}

/// Waiting time until the destination fraction reaches `beta_target`:
/// T = (1/r) ln((1-r) / (1 - (beta/d0) r)). The asymptote d0/r bounds what is
/// reachable.
inline double waiting_time(double beta_target, double d0, double gamma) {
  if (!(d0 > 0.0 && d0 <= 1.0)) throw std::invalid_argument("waiting_time: d0 outside (0,1]");
  const double r = 1.0 - gamma + gamma * d0;
  if (beta_target >= d0 / r - 1e-15 && beta_target > d0)
    throw UnreachableTargetError("waiting_time: target beyond the terminal fraction d0/r");
  if (beta_target <= d0) return 0.0;  // already met at t = 0
  return std::log((1.0 - r) / (1.0 - beta_target / d0 * r)) / r;
}

/// Smallest seed d0* that reaches `beta_target` destinations by deadline T,
/// by bisection of the monotone map d0 -> a(T; d0) on
/// [beta(1-Gamma)/(1-Gamma beta), 1] to 1e-10.
inline double seed_for_deadline(double beta_target, double gamma, double t_deadline) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("seed_for_deadline: requires Gamma in [0,1)");
  if (!(beta_target > 0.0 && beta_target <= 1.0))
    throw std::invalid_argument("seed_for_deadline: target outside (0,1]");
  if (!(t_deadline >= 0.0)) throw std::invalid_argument("seed_for_deadline: T must be >= 0");
  double lo = seed_for_target(gamma, beta_target);
  double hi = 1.0;
  auto fn = [&](double d0) {
    return destination_fraction_at(gamma, d0, t_deadline) - beta_target;
  };
  if (fn(hi) < 0.0)
    throw std::runtime_error("seed_for_deadline: no sign change on bracket");
  if (fn(lo) >= 0.0) return lo;  // deadline loose enough for the asymptotic seed
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (fn(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// One scenario for optimization and sweeps; xd0_ratio gives x_d(0) as a
/// fraction of d0.
struct ScenarioConfig {
  CoevolParams params;
  double d0 = 0.2;
  double xd0_ratio = 0.5;
  double horizon = -1.0;  // <= 0 means default_horizon(params)
  double h = 1e-3;

  CoevolInitial initial() const { return {d0, xd0_ratio * d0}; }
};

struct SweepRow {
  std::string param;
  double value = 0.0;
  double tau_star = 0.0;
  double target_t = 0.0;
  double y_at_target = 0.0;
  double cost = 0.0;
  std::string status;  // "ok", "not-reached", or an error message
};

inline ScenarioConfig with_param(ScenarioConfig cfg, const std::string& name,
                                 double value) {
  if (name == "d0") cfg.d0 = value;
  else if (name == "xd0_ratio") cfg.xd0_ratio = value;
  else if (name == "Gamma") cfg.params.gamma = value;
  else if (name == "beta") cfg.params.beta = value;
  else if (name == "lambda") cfg.params.lambda = value;
  else if (name == "alpha") cfg.params.alpha = value;
  else if (name == "psi") cfg.params.psi = value;
  else throw std::invalid_argument("unknown sweep parameter: " + name);
  return cfg;
}

/// Re-optimize tau at each grid value of one parameter. Per-point failures
/// are recorded in the row status and the sweep continues.
inline std::vector<SweepRow> sweep(const std::string& param,
                                   const std::vector<double>& values,
                                   const ScenarioConfig& base,
                                   int grid_points = 64) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    SweepRow row;
    row.param = param;
    row.value = v;
    try {
      const ScenarioConfig cfg = with_param(base, param, v);
      const auto res = optimize_tau(cfg.params, cfg.initial(), grid_points,
                                    cfg.horizon, cfg.h);
      row.tau_star = res.tau_star;
      row.target_t = res.best.target_t;
      row.y_at_target = res.best.y_at_target;
      row.cost = res.best.cost;
      row.status = "ok";
    } catch (const UnreachableTargetError& e) {
      row.status = "not-reached";
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace coevo

#endif
