#ifndef COEVO_COEVOLUTION_FLUID_HPP
#define COEVO_COEVOLUTION_FLUID_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

#include "coevo/copy_policy.hpp"
#include "coevo/hilt_fluid.hpp"
#include "coevo/ode.hpp"

namespace coevo {

/// Parameters of the joint interest/content spread model. `lambda` is the
/// population-scaled pairwise meeting rate, `beta` the recovery rate of
/// infectious destinations, `gamma` the per-meeting influence success
/// probability, `alpha` the delivery target fraction, and `psi` the weight of
/// wasted copies in the cost.
struct CoevolParams {
  double lambda = 1.0;
  double beta = 1.0;
  double gamma = 0.5;
  double alpha = 0.8;
  double psi = 1.0;

  void validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    if (!(psi >= 0.0)) throw std::invalid_argument("psi must be >= 0");
  }
};

/// State (b, d, x_b, x_d, y): destination fractions without/with infectious
/// status, content-holding splits of each, and content-holding relays.
using CoevolFluidState = StateVec<5>;

inline constexpr std::size_t kB = 0, kD = 1, kXb = 2, kXd = 3, kY = 4;

/// Controlled drift of the coevolution model, with s = 1 - b - d and
/// x = x_b + x_d:
///   db/dt   = beta d
///   dd/dt   = -beta d + lambda Gamma d s
///   dx_b/dt = beta x_d + lambda (b - x_b)(x + y)
///   dx_d/dt = Gamma lambda (d - x_d) y + Gamma lambda x_d s
///             + lambda (d - x_d)(x + y) - beta x_d
///   dy/dt   = -Gamma lambda d y + lambda sigma (s - y)(x_b + y + (1-Gamma) x_d)
inline CoevolFluidState coevol_rhs(const CoevolFluidState& z,
                                   const CoevolParams& p, double sigma) {
  const double b = z[kB], d = z[kD], xb = z[kXb], xd = z[kXd], y = z[kY];
  const double s = 1.0 - b - d;
  const double x = xb + xd;
  const double lam = p.lambda, gam = p.gamma, bet = p.beta;
  return {
      bet * d,
      -bet * d + lam * gam * d * s,
      bet * xd + lam * (b - xb) * (x + y),
      gam * lam * (d - xd) * y + gam * lam * xd * s + lam * (d - xd) * (x + y) - bet * xd,
      -gam * lam * d * y + lam * sigma * (s - y) * (xb + y + (1.0 - gam) * xd),
  };
}

inline CoevolFluidState coevol_rhs(const CoevolFluidState& z,
                                   const CoevolParams& p,
                                   const CopyPolicy& policy, double t) {
  return coevol_rhs(z, p, policy.value(t));
}

/// Integration horizon heuristic: long enough for both the interest epidemic
/// and the copy process to settle.
inline double default_horizon(const CoevolParams& p) {
  const double slowest = std::min({p.beta, p.lambda * std::max(p.gamma, 1e-3), 1.0});
  return 50.0 / slowest;
}

/// Integrate the controlled ODE from z0, recording the path. Steps are split
/// at the policy breakpoints; within each segment sigma is constant, so the
/// integrator keeps full order across the control discontinuities.
inline Trajectory<5> integrate_coevol(const CoevolParams& p,
                                      const CopyPolicy& policy,
                                      CoevolFluidState z0, double t_end,
                                      double h) {
  p.validate();
  auto rhs = [&](double t, const CoevolFluidState& z) {
    return coevol_rhs(z, p, policy, t);
  };
  return integrate<5>(rhs, z0, 0.0, t_end, h, policy.breakpoints());
}

/// Terminal destination fraction a(inf) of the closed (b, d) subsystem,
/// obtained by integrating until d < 1e-9.
inline double terminal_destination_fraction(const CoevolParams& p, double d0,
                                            double h = 1e-3) {
  StateVec<2> y{0.0, d0};
  auto rhs = [&](double, const StateVec<2>& s) -> StateVec<2> {
    const double conv = p.lambda * p.gamma * s[1] * (1.0 - s[0] - s[1]);
    return {p.beta * s[1], conv - p.beta * s[1]};
  };
  rk4_integrate<2>(rhs, y, 0.0, 1e4 / p.beta, h,
                   [&](double, const StateVec<2>& s) { return s[1] >= 1e-9; });
  return y[0] + y[1];
}

/// First time the delivered fraction x(t) = x_b(t) + x_d(t) reaches
/// `x_target`, linearly interpolated inside the straddling step; empty if the
/// trajectory never crosses.
inline std::optional<double> target_time(const Trajectory<5>& traj,
                                         double x_target) {
  auto x_at = [&](std::size_t i) { return traj.y[i][kXb] + traj.y[i][kXd]; };
  if (traj.size() == 0) throw std::logic_error("target_time: empty trajectory");
  if (x_at(0) >= x_target) return 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (x_at(i) >= x_target) {
      const double x0 = x_at(i - 1), x1 = x_at(i);
      const double w = x1 > x0 ? (x_target - x0) / (x1 - x0) : 1.0;
      return traj.t[i - 1] + w * (traj.t[i] - traj.t[i - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace coevo

#endif
