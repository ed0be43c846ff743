#ifndef COEVO_RNG_HPP
#define COEVO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace coevo {

namespace detail {

// Tail of the Stirling series for log(k!), used by the BTRS sampler.
inline double stirling_tail(double k) {
  static const double table[] = {
      0.0810614667953272,  0.0413406959554092,  0.0276779256849983,
      0.0207906721037650,  0.0166446911898211,  0.0138761288230707,
      0.0118967099458917,  0.0104112652619720,  0.00925546218271273,
      0.00833056343336287};
  if (k <= 9.0) return table[static_cast<int>(k)];
  const double kp1sq = (k + 1.0) * (k + 1.0);
  return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / (k + 1.0);
}

}  // namespace detail

/// Seeded 64-bit generator (Mersenne Twister mt19937_64, a fixed published
/// algorithm, so streams are reproducible across platforms). All variate
/// transformations below are hand-rolled for the same reason; in particular
/// binomial sampling is integer-exact: inversion for small n*p, BTRS
/// (transformed rejection, Hormann 1993) otherwise. No normal approximation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Exponential holding time with the given rate.
  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    double u;
    do { u = uniform(); } while (u == 0.0);
    return -std::log(u) / rate;
  }

  /// Exact Binomial(n, p) sample.
  std::int64_t binomial(std::int64_t n, double p) {
    if (n < 0 || p < -1e-15 || p > 1.0 + 1e-15)
      throw std::invalid_argument("binomial: bad parameters");
    if (p <= 0.0 || n == 0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    if (static_cast<double>(n) * p < 10.0) return binomial_inversion(n, p);
    return binomial_btrs(n, p);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  // Sequential cdf search; requires p <= 0.5 and n*p modest so the initial
  // (1-p)^n does not underflow.
  std::int64_t binomial_inversion(std::int64_t n, double p) {
    const double u = uniform();
    double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
    double cdf = pmf;
    const double odds = p / (1.0 - p);
    std::int64_t k = 0;
    while (u > cdf && k < n) {
      ++k;
      pmf *= static_cast<double>(n - k + 1) / static_cast<double>(k) * odds;
      cdf += pmf;
    }
    return k;
  }

  // Transformed rejection with squeeze; valid for p <= 0.5, n*p >= 10.
  std::int64_t binomial_btrs(std::int64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double stddev = std::sqrt(nd * p * (1.0 - p));
    const double b = 1.15 + 2.53 * stddev;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double odds = p / (1.0 - p);
    const double alpha = (2.83 + 5.1 / b) * stddev;
    const double m = std::floor((nd + 1.0) * p);
    for (;;) {
      const double u = uniform() - 0.5;
      double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kd = std::floor((2.0 * a / us + b) * u + c);
      if (kd < 0.0 || kd > nd) continue;
      if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kd);
      v = std::log(v * alpha / (a / (us * us) + b));
      const double bound =
          (m + 0.5) * std::log((m + 1.0) / (odds * (nd - m + 1.0))) +
          (nd + 1.0) * std::log((nd - m + 1.0) / (nd - kd + 1.0)) +
          (kd + 0.5) * std::log(odds * (nd - kd + 1.0) / (kd + 1.0)) +
          detail::stirling_tail(m) + detail::stirling_tail(nd - m) -
          detail::stirling_tail(kd) - detail::stirling_tail(nd - kd);
      if (v <= bound) return static_cast<std::int64_t>(kd);
    }
  }

  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace coevo

#endif
