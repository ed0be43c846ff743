#ifndef COEVO_COPY_POLICY_HPP
#define COEVO_COPY_POLICY_HPP

#include <limits>
#include <stdexcept>
#include <vector>

namespace coevo {

/// Copy-control schedule sigma(t) in [0,1]: the probability of copying the
/// content to a relay at a meeting at time t. Three kinds, all piecewise
/// constant:
///   - Constant(sigma)
///   - TimeThreshold(tau): sigma(t) = 1 for t < tau, 0 for t >= tau
///   - PiecewiseConstant(breakpoints, values): values[i] on
///     [break[i-1], break[i]), values.size() == breakpoints.size() + 1
class CopyPolicy {
 public:
  enum class Kind { Constant, TimeThreshold, PiecewiseConstant };

  static CopyPolicy constant(double sigma) {
    check_value(sigma);
    CopyPolicy p;
    p.kind_ = Kind::Constant;
    p.values_ = {sigma};
    return p;
  }

  static CopyPolicy time_threshold(double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("time_threshold: tau must be >= 0");
    CopyPolicy p;
    p.kind_ = Kind::TimeThreshold;
    p.breaks_ = {tau};
    p.values_ = {1.0, 0.0};
    return p;
  }

  static CopyPolicy piecewise(std::vector<double> breakpoints,
                              std::vector<double> values) {
    if (values.size() != breakpoints.size() + 1)
      throw std::invalid_argument("piecewise: need values.size() == breakpoints.size() + 1");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw std::invalid_argument("piecewise: breakpoints must be strictly increasing");
    if (!breakpoints.empty() && !(breakpoints.front() >= 0.0))
      throw std::invalid_argument("piecewise: breakpoints must be >= 0");
    for (double v : values) check_value(v);
    CopyPolicy p;
    p.kind_ = Kind::PiecewiseConstant;
    p.breaks_ = std::move(breakpoints);
    p.values_ = std::move(values);
    return p;
  }

  Kind kind() const { return kind_; }

  /// Threshold tau for TimeThreshold policies.
  double tau() const {
    if (kind_ != Kind::TimeThreshold)
      throw std::logic_error("tau() on non-threshold policy");
    return breaks_[0];
  }

  double value(double t) const {
    std::size_t i = 0;
    while (i < breaks_.size() && t >= breaks_[i]) ++i;
    return values_[i];
  }

  const std::vector<double>& breakpoints() const { return breaks_; }

  /// Smallest breakpoint strictly greater than t, or +inf.
  double next_breakpoint_after(double t) const {
    for (double b : breaks_)
      if (b > t) return b;
    return std::numeric_limits<double>::infinity();
  }

 private:
  static void check_value(double v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("copy policy value outside [0,1]");
  }

  Kind kind_ = Kind::Constant;
  std::vector<double> breaks_;
  std::vector<double> values_{1.0};
};

}  // namespace coevo

#endif
