#ifndef COEVO_HILT_FLUID_HPP
#define COEVO_HILT_FLUID_HPP

#include <cmath>
#include <stdexcept>

#include "coevo/ode.hpp"
#include "coevo/threshold_distribution.hpp"

namespace coevo {

/// Fluid limit of the influence-spread process. State is (b, d): fractions of
/// non-infectious and infectious destinations.
using HiltFluidState = StateVec<2>;

/// Right-hand side of the interest-evolution ODE:
///   db/dt = d
///   dd/dt = h(Gamma*b) * Gamma * d * (1 - b - d) - d
/// where h is the hazard of the threshold distribution. The hazard's domain
/// error propagates when Gamma*b reaches the end of the support.
inline HiltFluidState hilt_rhs(const HiltFluidState& s, double gamma,
                               const ThresholdDistribution& dist) {
  const double b = s[0], d = s[1];
  if (d == 0.0) return {0.0, 0.0};
  const double conv = dist.hazard(gamma * b) * gamma * d * (1.0 - b - d);
  return {d, conv - d};
}

inline Trajectory<2> hilt_fluid_trajectory(const ThresholdDistribution& dist,
                                           double gamma, double d0,
                                           double t_end, double h) {
  auto rhs = [&](double, const HiltFluidState& s) { return hilt_rhs(s, gamma, dist); };
  return integrate<2>(rhs, HiltFluidState{0.0, d0}, 0.0, t_end, h);
}

/// Exact solution for the uniform threshold distribution:
///   b(t) = d0/r (1 - e^{-rt}),  d(t) = d0 e^{-rt},  r = 1 - Gamma + Gamma*d0.
/// The degenerate r = 0 case (Gamma = 1, d0 = 0) is the identically-zero
/// limit.
inline HiltFluidState hilt_closed_form_uniform(double gamma, double d0, double t) {
  const double r = 1.0 - gamma + gamma * d0;
  if (r == 0.0) return {0.0, 0.0};
  const double e = std::exp(-r * t);
  return {d0 / r * (1.0 - e), d0 * e};
}

/// Terminal destination fraction for uniform thresholds: d0 / (1 - Gamma +
/// Gamma*d0).
inline double terminal_fraction_uniform(double gamma, double d0) {
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(d0 >= 0.0 && d0 <= 1.0))
    throw std::invalid_argument("terminal_fraction_uniform: parameters outside [0,1]");
  const double r = 1.0 - gamma + gamma * d0;
  if (r == 0.0) return 0.0;  // Gamma = 1, d0 = 0
  return d0 / r;
}

/// Terminal destination fraction for exponential thresholds (the SIR case):
/// root of b = 1 - (1 - d0) e^{-c b} with c = lambda_theta * Gamma, found by
/// bisection on [d0, 1] to 1e-10.
inline double terminal_fraction_exponential(double lam_gamma, double d0) {
  if (!(lam_gamma >= 0.0)) throw std::invalid_argument("terminal_fraction_exponential: rate < 0");
  if (!(d0 >= 0.0 && d0 <= 1.0))
    throw std::invalid_argument("terminal_fraction_exponential: d0 outside [0,1]");
  if (d0 == 0.0) return 0.0;
  if (d0 == 1.0) return 1.0;
  auto g = [&](double b) { return b - 1.0 + (1.0 - d0) * std::exp(-lam_gamma * b); };
  double lo = d0, hi = 1.0;
  if (g(lo) > 0.0 || g(hi) < 0.0)
    throw std::runtime_error("terminal_fraction_exponential: bracket has no sign change");
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Integrate the interest ODE until the infectious fraction drops below
/// `d_tol` (or t_max), returning the final (b, d). This is the generic route
/// to b_infinity, cross-checkable against the closed forms above.
inline HiltFluidState hilt_integrate_to_absorption(const ThresholdDistribution& dist,
                                                   double gamma, double d0,
                                                   double h = 1e-3,
                                                   double d_tol = 1e-9,
                                                   double t_max = 1e4) {
  HiltFluidState y{0.0, d0};
  auto rhs = [&](double, const HiltFluidState& s) { return hilt_rhs(s, gamma, dist); };
  rk4_integrate<2>(rhs, y, 0.0, t_max, h,
                   [&](double, const HiltFluidState& s) { return s[1] >= d_tol; });
  return y;
}

}  // namespace coevo

#endif
