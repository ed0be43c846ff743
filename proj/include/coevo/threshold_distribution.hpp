#ifndef COEVO_THRESHOLD_DISTRIBUTION_HPP
#define COEVO_THRESHOLD_DISTRIBUTION_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coevo {

/// Distribution of the per-node influence threshold. Supplies cdf F, density
/// f, and the hazard h(x) = f(x)/(1-F(x)) that drives the conversion rate in
/// the fluid limit. Immutable after construction; safe to share across
/// threads.
///
/// Near the upper end of the support (cdf within 1e-12 of 1) the hazard is a
/// hard domain error rather than +inf, so callers must guard the singularity
/// themselves.
class ThresholdDistribution {
 public:
  enum class Kind { Uniform01, Exponential, Tabulated };

  static ThresholdDistribution uniform01() {
    ThresholdDistribution d;
    d.kind_ = Kind::Uniform01;
    d.support_ = {0.0, 1.0};
    return d;
  }

  static ThresholdDistribution exponential(double rate) {
    if (!(rate > 0.0))
      throw std::invalid_argument("exponential threshold: rate must be > 0");
    ThresholdDistribution d;
    d.kind_ = Kind::Exponential;
    d.rate_ = rate;
    d.support_ = {0.0, std::numeric_limits<double>::infinity()};
    return d;
  }

  /// Tabulated cdf with linear interpolation; density is the piecewise slope.
  /// Grid must have strictly increasing x, nondecreasing F, F(x0) ~ 0 and
  /// F(xn) ~ 1.
  static ThresholdDistribution tabulated(std::vector<double> x,
                                         std::vector<double> f) {
    if (x.size() != f.size() || x.size() < 2)
      throw std::invalid_argument("tabulated threshold: need >= 2 grid points");
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1]))
        throw std::invalid_argument("tabulated threshold: x grid not strictly increasing");
      if (f[i] < f[i - 1])
        throw std::invalid_argument("tabulated threshold: cdf not nondecreasing");
    }
    if (std::fabs(f.front()) > 1e-12)
      throw std::invalid_argument("tabulated threshold: cdf must start at 0");
    if (std::fabs(f.back() - 1.0) > 1e-9)
      throw std::invalid_argument("tabulated threshold: cdf must end at 1");
    ThresholdDistribution d;
    d.kind_ = Kind::Tabulated;
    d.support_ = {x.front(), x.back()};
    d.grid_x_ = std::move(x);
    d.grid_f_ = std::move(f);
    return d;
  }

  /// Two-column CSV (x, F(x)), strictly increasing x. An optional header row
  /// is skipped.
  static ThresholdDistribution from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open threshold csv: " + path);
    std::vector<double> xs, fs;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string a, b;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b)) continue;
      try {
        xs.push_back(std::stod(a));
        fs.push_back(std::stod(b));
      } catch (const std::exception&) {
        if (xs.empty()) continue;  // header row
        throw std::runtime_error("bad row in threshold csv: " + line);
      }
    }
    return tabulated(std::move(xs), std::move(fs));
  }

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }
  std::pair<double, double> support() const { return support_; }

  double cdf(double x) const {
    switch (kind_) {
      case Kind::Uniform01:
        return std::clamp(x, 0.0, 1.0);
      case Kind::Exponential:
        return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x);
      case Kind::Tabulated:
        return cdf_tabulated(x);
    }
    return 0.0;
  }

  double density(double x) const {
    switch (kind_) {
      case Kind::Uniform01:
        return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
      case Kind::Exponential:
        return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x);
      case Kind::Tabulated:
        return density_tabulated(x);
    }
    return 0.0;
  }

  /// h(x) = f(x)/(1-F(x)). Exponential is constant-hazard by construction;
  /// the other kinds throw once the remaining threshold mass vanishes.
  double hazard(double x) const {
    if (kind_ == Kind::Exponential) return x < 0.0 ? 0.0 : rate_;
    const double fx = cdf(x);
    if (fx >= 1.0 - 1e-12)
      throw std::domain_error("hazard undefined: cdf(x) >= 1 - 1e-12");
    return density(x) / (1.0 - fx);
  }

  /// Inverse cdf on the tabulated grid (linear); exact for the closed-form
  /// kinds. Used to draw node thresholds.
  double quantile(double u) const {
    if (u < 0.0 || u > 1.0) throw std::invalid_argument("quantile: u outside [0,1]");
    switch (kind_) {
      case Kind::Uniform01:
        return u;
      case Kind::Exponential:
        return u >= 1.0 ? std::numeric_limits<double>::infinity()
                        : -std::log1p(-u) / rate_;
      case Kind::Tabulated: {
        auto it = std::lower_bound(grid_f_.begin(), grid_f_.end(), u);
        if (it == grid_f_.begin()) return grid_x_.front();
        if (it == grid_f_.end()) return grid_x_.back();
        const std::size_t i = static_cast<std::size_t>(it - grid_f_.begin());
        const double df = grid_f_[i] - grid_f_[i - 1];
        if (df <= 0.0) return grid_x_[i];
        const double w = (u - grid_f_[i - 1]) / df;
        return grid_x_[i - 1] + w * (grid_x_[i] - grid_x_[i - 1]);
      }
    }
    return 0.0;
  }

 private:
  ThresholdDistribution() = default;

  double cdf_tabulated(double x) const {
    if (x <= grid_x_.front()) return 0.0;
    if (x >= grid_x_.back()) return 1.0;
    auto it = std::upper_bound(grid_x_.begin(), grid_x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_x_.begin());
    const double w = (x - grid_x_[i - 1]) / (grid_x_[i] - grid_x_[i - 1]);
    const double v = grid_f_[i - 1] + w * (grid_f_[i] - grid_f_[i - 1]);
    return std::clamp(v, 0.0, 1.0);
  }

  double density_tabulated(double x) const {
    if (x < grid_x_.front() || x > grid_x_.back()) return 0.0;
    auto it = std::upper_bound(grid_x_.begin(), grid_x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid_x_.begin());
    if (i == 0) i = 1;
    if (i == grid_x_.size()) i = grid_x_.size() - 1;
    return (grid_f_[i] - grid_f_[i - 1]) / (grid_x_[i] - grid_x_[i - 1]);
  }

  Kind kind_ = Kind::Uniform01;
  double rate_ = 0.0;
  std::pair<double, double> support_{0.0, 1.0};
  std::vector<double> grid_x_, grid_f_;
};

}  // namespace coevo

#endif
