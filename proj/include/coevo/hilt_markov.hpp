#ifndef COEVO_HILT_MARKOV_HPP
#define COEVO_HILT_MARKOV_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coevo/rng.hpp"
#include "coevo/threshold_distribution.hpp"

namespace coevo {

/// Finite-population influence-spread chain on the complete graph with equal
/// edge weights gamma_N = Gamma / (N - 1).
struct HiltParams {
  std::int64_t n = 0;              // population size
  double gamma_total = 0.0;        // total influence weight Gamma in [0,1]
  std::int64_t d0_count = 0;       // initial destinations |A(0)|
  ThresholdDistribution dist = ThresholdDistribution::uniform01();

  double edge_weight() const { return n > 1 ? gamma_total / static_cast<double>(n - 1) : 0.0; }

  void validate() const {
    if (n <= 0) throw std::invalid_argument("hilt: population size must be positive");
    if (!(gamma_total >= 0.0 && gamma_total <= 1.0))
      throw std::invalid_argument("hilt: Gamma must be in [0,1]");
    if (d0_count < 0 || d0_count > n)
      throw std::invalid_argument("hilt: d0_count outside [0,N]");
  }
};

/// Counts (B, D) at step k: B non-infectious destinations, D infectious.
/// B + D <= N always; B is nondecreasing in k.
struct HiltCounts {
  std::int64_t b = 0;
  std::int64_t d = 0;
  std::int64_t step = 0;

  std::int64_t destinations() const { return b + d; }
};

namespace detail {

// Conversion probability for a relay whose threshold is known to exceed
// gamma*b: p = (F(gamma(b+d)) - F(gamma b)) / (1 - F(gamma b)).
inline double conversion_probability(const ThresholdDistribution& dist,
                                     double gamma, double mass_b, double mass_bd) {
  const double fb = dist.cdf(gamma * mass_b);
  if (fb >= 1.0 - 1e-12)
    throw std::domain_error("hilt: threshold mass exhausted (F(gamma*b) >= 1)");
  const double p = (dist.cdf(gamma * mass_bd) - fb) / (1.0 - fb);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

/// One step of the exact chain: all infectious destinations exert their
/// influence together, then become non-infectious.
///   B' = B + D,  D' ~ Binomial(N - B - D, p_gamma(B, D))
inline HiltCounts step_exact(const HiltParams& params, const HiltCounts& state,
                             Rng& rng) {
  const double gamma = params.edge_weight();
  const std::int64_t relays = params.n - state.b - state.d;
  const double p = detail::conversion_probability(
      params.dist, gamma, static_cast<double>(state.b),
      static_cast<double>(state.b + state.d));
  HiltCounts next;
  next.b = state.b + state.d;
  next.d = state.d == 0 ? 0 : rng.binomial(relays, p);
  next.step = state.step + 1;
  return next;
}

/// One minislot of the scaled chain: each infectious destination uses its
/// influence with probability 1/N.
///   C ~ Binomial(D, 1/N); B' = B + C;
///   D' = D - C + Binomial(N - B - D, q), q from the C converts only.
inline HiltCounts step_scaled(const HiltParams& params, const HiltCounts& state,
                              Rng& rng) {
  const double gamma = params.edge_weight();
  const std::int64_t relays = params.n - state.b - state.d;
  const std::int64_t c = rng.binomial(state.d, 1.0 / static_cast<double>(params.n));
  const double q = detail::conversion_probability(
      params.dist, gamma, static_cast<double>(state.b),
      static_cast<double>(state.b + c));
  HiltCounts next;
  next.b = state.b + c;
  next.d = state.d - c + (relays > 0 ? rng.binomial(relays, q) : 0);
  next.step = state.step + 1;
  return next;
}

/// Exact-chain path from (B, D) = (0, d0_count); stops at absorption (D = 0)
/// or after `horizon` steps, whichever first.
inline std::vector<HiltCounts> run_exact(const HiltParams& params,
                                         std::int64_t horizon, Rng& rng) {
  params.validate();
  if (horizon <= 0) throw std::invalid_argument("run_exact: horizon must be > 0");
  std::vector<HiltCounts> path;
  HiltCounts state{0, params.d0_count, 0};
  path.push_back(state);
  while (state.d > 0 && state.step < horizon) {
    state = step_exact(params, state, rng);
    path.push_back(state);
  }
  return path;
}

/// Scaled-chain path over exactly `horizon` minislots (the horizon is
/// mandatory: infectious lifetimes have geometric tails, so D can linger).
inline std::vector<HiltCounts> run_scaled(const HiltParams& params,
                                          std::int64_t horizon, Rng& rng) {
  params.validate();
  if (horizon <= 0) throw std::invalid_argument("run_scaled: horizon must be > 0");
  std::vector<HiltCounts> path;
  path.reserve(static_cast<std::size_t>(horizon) + 1);
  HiltCounts state{0, params.d0_count, 0};
  path.push_back(state);
  while (state.step < horizon && state.d > 0) {
    state = step_scaled(params, state, rng);
    path.push_back(state);
  }
  // pad after absorption so callers can index by minislot
  while (state.step < horizon) {
    ++state.step;
    path.push_back(state);
  }
  return path;
}

/// Expected terminal destination count for uniform thresholds, via the nested
/// recursion
///   I(k) = k [1 + (N-k) g [1 + (N-k-1) g [ ... [1 + 1*g [1] ] ... ]
/// with g = Gamma/(N-1), evaluated innermost-out. The innermost bracket is
/// closed with 1 at depth N-k: the only closure consistent with I(k) = k at
/// Gamma = 0 and with the N -> infinity limit d0/r (cross-validated against
/// Monte-Carlo runs of the exact chain).
inline double discrete_influence(std::int64_t n, double gamma_total,
                                 std::int64_t k) {
  if (n <= 0) throw std::invalid_argument("discrete_influence: N must be positive");
  if (k < 0 || k > n) throw std::invalid_argument("discrete_influence: k outside [0,N]");
  if (k == 0) return 0.0;
  if (n == 1) return static_cast<double>(k);
  const double g = gamma_total / static_cast<double>(n - 1);
  double acc = 1.0;
  for (std::int64_t j = 1; j <= n - k; ++j)
    acc = 1.0 + static_cast<double>(j) * g * acc;
  return static_cast<double>(k) * acc;
}

}  // namespace coevo

#endif
