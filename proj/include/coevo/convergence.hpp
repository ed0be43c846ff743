#ifndef COEVO_CONVERGENCE_HPP
#define COEVO_CONVERGENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coevo/coevolution_ctmc.hpp"
#include "coevo/coevolution_fluid.hpp"
#include "coevo/hilt_fluid.hpp"
#include "coevo/hilt_markov.hpp"
#include "coevo/rng.hpp"

namespace coevo {

/// Sup-norm distance between one scaled influence-chain sample path and the
/// fluid solution over [0, t_end]: minislot floor(N u) of the chain is
/// compared against (b(u), d(u)).
inline double hilt_supnorm_distance(const ThresholdDistribution& dist,
                                    double gamma, double d0_fraction,
                                    std::int64_t n, double t_end,
                                    std::uint64_t seed, double h = 1e-3) {
  HiltParams params;
  params.n = n;
  params.gamma_total = gamma;
  params.dist = dist;
  params.d0_count = static_cast<std::int64_t>(std::llround(d0_fraction * static_cast<double>(n)));
  Rng rng(seed);
  const std::int64_t slots = static_cast<std::int64_t>(std::ceil(t_end * static_cast<double>(n)));
  const auto path = run_scaled(params, slots, rng);
  const auto ode = hilt_fluid_trajectory(dist, gamma, d0_fraction, t_end, h);
  double sup = 0.0;
  for (const auto& state : path) {
    const double u = static_cast<double>(state.step) / static_cast<double>(n);
    const auto ref = ode.sample(u);
    const double eb = std::fabs(static_cast<double>(state.b) / static_cast<double>(n) - ref[0]);
    const double ed = std::fabs(static_cast<double>(state.d) / static_cast<double>(n) - ref[1]);
    sup = std::max({sup, eb, ed});
  }
  return sup;
}

/// Sup-norm distance between one coevolution CTMC sample path (scaled by N)
/// and the controlled ODE, evaluated on the ODE's step grid.
inline double coevol_supnorm_distance(const CoevolParams& p,
                                      const CopyPolicy& policy, double d0,
                                      double xd0, std::int64_t n, double t_end,
                                      std::uint64_t seed, double h = 1e-3) {
  const double nd = static_cast<double>(n);
  CoevolCounts z0;
  z0.n = n;
  z0.d = static_cast<std::int64_t>(std::llround(d0 * nd));
  z0.xd = std::min(z0.d, static_cast<std::int64_t>(std::llround(xd0 * nd)));
  Rng rng(seed);
  const auto run = run_ctmc(z0, p, policy, t_end, rng);
  CoevolFluidState init{0.0, static_cast<double>(z0.d) / nd, 0.0,
                        static_cast<double>(z0.xd) / nd, 0.0};
  const auto ode = integrate_coevol(p, policy, init, t_end, h);
  double sup = 0.0;
  const double sample_dt = std::max(h, t_end / 2000.0);
  for (double t = 0.0; t <= t_end; t += sample_dt) {
    const auto ref = ode.sample(t);
    const auto& state = run.at(t);
    const double comps[5] = {static_cast<double>(state.b) / nd,
                             static_cast<double>(state.d) / nd,
                             static_cast<double>(state.xb) / nd,
                             static_cast<double>(state.xd) / nd,
                             static_cast<double>(state.y) / nd};
    for (int i = 0; i < 5; ++i)
      sup = std::max(sup, std::fabs(comps[i] - ref[static_cast<std::size_t>(i)]));
  }
  return sup;
}

struct ConvergencePoint {
  std::int64_t n = 0;
  double median = 0.0;
  double iqr_low = 0.0;
  double iqr_high = 0.0;
  std::vector<double> distances;
};

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(i);
  return sorted[i] + w * (sorted[i + 1] - sorted[i]);
}

inline ConvergencePoint summarize_distances(std::int64_t n,
                                            std::vector<double> distances) {
  ConvergencePoint pt;
  pt.n = n;
  pt.distances = distances;
  std::sort(distances.begin(), distances.end());
  pt.median = quantile_sorted(distances, 0.5);
  pt.iqr_low = quantile_sorted(distances, 0.25);
  pt.iqr_high = quantile_sorted(distances, 0.75);
  return pt;
}

}  // namespace coevo

#endif
