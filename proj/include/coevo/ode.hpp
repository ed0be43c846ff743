#ifndef COEVO_ODE_HPP
#define COEVO_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace coevo {

template <std::size_t K>
using StateVec = std::array<double, K>;

/// Thrown when an integrated state leaves the population simplex by more than
/// roundoff (1e-6); small negatives in [-1e-9, 0) are silently clamped to 0.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <std::size_t K>
void clamp_fractions(StateVec<K>& y, double t) {
  for (double& v : y) {
    if (v < 0.0) {
      if (v < -1e-6)
        throw IntegrationError("integration blow-up: component " +
                               std::to_string(v) + " at t=" + std::to_string(t));
      v = 0.0;
    } else if (v > 1.0 + 1e-6) {
      throw IntegrationError("integration blow-up: component " +
                             std::to_string(v) + " at t=" + std::to_string(t));
    }
  }
}

}  // namespace detail

/// Classical fixed-step RK4 on fraction-valued states. Advances y in place
/// from t0 to t1 with step h (last partial step shortened so the final point
/// lands on t1 exactly). The observer is called after every accepted step;
/// returning false stops the integration early.
template <std::size_t K, class Rhs, class Observer>
double rk4_integrate(Rhs&& rhs, StateVec<K>& y, double t0, double t1, double h,
                     Observer&& observe) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4_integrate: step must be > 0");
  if (!(t1 >= t0)) throw std::invalid_argument("rk4_integrate: t1 < t0");
  double t = t0;
  StateVec<K> k1, k2, k3, k4, tmp;
  while (t < t1 - 1e-15 * std::max(1.0, std::fabs(t1))) {
    const double step = std::min(h, t1 - t);
    k1 = rhs(t, y);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + 0.5 * step * k1[i];
    k2 = rhs(t + 0.5 * step, tmp);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + 0.5 * step * k2[i];
    k3 = rhs(t + 0.5 * step, tmp);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + step * k3[i];
    k4 = rhs(t + step, tmp);
    for (std::size_t i = 0; i < K; ++i)
      y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += step;
    detail::clamp_fractions(y, t);
    if (!observe(t, y)) return t;
  }
  return t;
}

/// Sampled solution path. Stores one row per accepted RK4 step (plus the
/// initial point).
template <std::size_t K>
struct Trajectory {
  std::vector<double> t;
  std::vector<StateVec<K>> y;

  std::size_t size() const { return t.size(); }

  /// Linear interpolation between stored samples; clamps outside [t0, tN].
  StateVec<K> sample(double time) const {
    if (t.empty()) throw std::logic_error("sample() on empty trajectory");
    if (time <= t.front()) return y.front();
    if (time >= t.back()) return y.back();
    auto it = std::lower_bound(t.begin(), t.end(), time);
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double w = (time - t[i - 1]) / (t[i] - t[i - 1]);
    StateVec<K> out;
    for (std::size_t j = 0; j < K; ++j)
      out[j] = y[i - 1][j] + w * (y[i][j] - y[i - 1][j]);
    return out;
  }
};

/// Integrate and record the full path. `splits` lists interior times (policy
/// breakpoints, typically) where the step grid must land exactly so that a
/// discontinuous right-hand side never straddles a step.
template <std::size_t K, class Rhs>
Trajectory<K> integrate(Rhs&& rhs, StateVec<K> y0, double t0, double t1,
                        double h, const std::vector<double>& splits = {}) {
  Trajectory<K> traj;
  traj.t.push_back(t0);
  traj.y.push_back(y0);
  auto record = [&traj](double t, const StateVec<K>& y) {
    traj.t.push_back(t);
    traj.y.push_back(y);
    return true;
  };
  std::vector<double> stops;
  for (double s : splits)
    if (s > t0 && s < t1) stops.push_back(s);
  std::sort(stops.begin(), stops.end());
  stops.push_back(t1);
  double t = t0;
  for (double s : stops) {
    rk4_integrate<K>(rhs, y0, t, s, h, record);
    t = s;
  }
  return traj;
}

}  // namespace coevo

#endif
