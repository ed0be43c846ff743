#ifndef COEVO_COEVOLUTION_CTMC_HPP
#define COEVO_COEVOLUTION_CTMC_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coevo/coevolution_fluid.hpp"
#include "coevo/copy_policy.hpp"
#include "coevo/rng.hpp"

namespace coevo {

/// Finite-N state of the coevolution chain. Invariants: X_b <= B, X_d <= D,
/// Y <= S = N - B - D, all counts nonnegative.
struct CoevolCounts {
  std::int64_t n = 0;
  std::int64_t b = 0;   // non-infectious destinations
  std::int64_t d = 0;   // infectious destinations
  std::int64_t xb = 0;  // of B, holding the content
  std::int64_t xd = 0;  // of D, holding the content
  std::int64_t y = 0;   // relays holding the content
  double t = 0.0;

  std::int64_t relays() const { return n - b - d; }
  std::int64_t content_destinations() const { return xb + xd; }

  void validate() const {
    if (n <= 0) throw std::invalid_argument("coevol counts: N must be positive");
    if (b < 0 || d < 0 || xb < 0 || xd < 0 || y < 0)
      throw std::invalid_argument("coevol counts: negative count");
    if (b + d > n) throw std::invalid_argument("coevol counts: B + D > N");
    if (xb > b) throw std::invalid_argument("coevol counts: X_b > B");
    if (xd > d) throw std::invalid_argument("coevol counts: X_d > D");
    if (y > relays()) throw std::invalid_argument("coevol counts: Y > S");
  }
};

/// The nine epoch types of the transition table. Names describe who meets
/// whom (or who recovers); "plain" means without the content.
enum class CoevolEpoch : int {
  PlainInfectiousRecovers = 0,   // rate beta (D - X_d):            (+1,-1, 0, 0, 0)
  ContentInfectiousRecovers,     // rate beta X_d:                  (+1,-1,+1,-1, 0)
  PlainRecoveredMeetsHolder,     // rate l (B - X_b)(X + Y):        ( 0, 0,+1, 0, 0)
  PlainInfectiousMeetsRelayHolder,  // rate l (D - X_d) Y:          ( 0, 0, 0,+1, 0)
                                    //   + (0,+1, 0,+1,-1) w.p. Gamma
  PlainInfectiousMeetsContentDest,  // rate l (D - X_d) X:          ( 0, 0, 0,+1, 0)
  ContentInfectiousMeetsRelayHolder,  // rate l X_d Y: (0,+1,0,+1,-1) w.p. Gamma
  PlainRelayMeetsSpreader,       // rate l (X_b + Y)(S - Y):        ( 0, 0, 0, 0,+1) w.p. sigma
  PlainRelayMeetsPlainInfectious,  // rate l (D - X_d)(S - Y):      ( 0,+1, 0, 0, 0) w.p. Gamma
  PlainRelayMeetsContentInfectious,  // rate l X_d (S - Y):
                                     //   (0,+1,0,+1,0) w.p. Gamma, else (0,0,0,0,+1) w.p. (1-Gamma) sigma
};

inline const char* epoch_name(CoevolEpoch e) {
  switch (e) {
    case CoevolEpoch::PlainInfectiousRecovers: return "plain_infectious_recovers";
    case CoevolEpoch::ContentInfectiousRecovers: return "content_infectious_recovers";
    case CoevolEpoch::PlainRecoveredMeetsHolder: return "plain_recovered_meets_holder";
    case CoevolEpoch::PlainInfectiousMeetsRelayHolder: return "plain_infectious_meets_relay_holder";
    case CoevolEpoch::PlainInfectiousMeetsContentDest: return "plain_infectious_meets_content_dest";
    case CoevolEpoch::ContentInfectiousMeetsRelayHolder: return "content_infectious_meets_relay_holder";
    case CoevolEpoch::PlainRelayMeetsSpreader: return "plain_relay_meets_spreader";
    case CoevolEpoch::PlainRelayMeetsPlainInfectious: return "plain_relay_meets_plain_infectious";
    case CoevolEpoch::PlainRelayMeetsContentInfectious: return "plain_relay_meets_content_infectious";
  }
  return "?";
}

/// Row rates as functions of the counts, with per-pair meeting rate
/// lambda_N = lambda / N and recovery rate beta.
inline std::array<double, 9> epoch_rates(const CoevolCounts& z,
                                         const CoevolParams& p) {
  const double ln = p.lambda / static_cast<double>(z.n);
  const double s_minus_y = static_cast<double>(z.relays() - z.y);
  const double d_plain = static_cast<double>(z.d - z.xd);
  const double x = static_cast<double>(z.xb + z.xd);
  return {
      p.beta * d_plain,
      p.beta * static_cast<double>(z.xd),
      ln * static_cast<double>(z.b - z.xb) * (x + static_cast<double>(z.y)),
      ln * d_plain * static_cast<double>(z.y),
      ln * d_plain * x,
      ln * static_cast<double>(z.xd) * static_cast<double>(z.y),
      ln * (static_cast<double>(z.xb) + static_cast<double>(z.y)) * s_minus_y,
      ln * d_plain * s_minus_y,
      ln * static_cast<double>(z.xd) * s_minus_y,
  };
}

/// Apply the state update for one epoch, resolving the internal coin flips
/// with sigma evaluated at the jump time. Influence attempts precede content
/// copies where both are possible.
inline void apply_epoch(CoevolCounts& z, CoevolEpoch epoch, double gamma,
                        double sigma, Rng& rng) {
  switch (epoch) {
    case CoevolEpoch::PlainInfectiousRecovers:
      ++z.b; --z.d;
      break;
    case CoevolEpoch::ContentInfectiousRecovers:
      ++z.b; --z.d; ++z.xb; --z.xd;
      break;
    case CoevolEpoch::PlainRecoveredMeetsHolder:
      ++z.xb;
      break;
    case CoevolEpoch::PlainInfectiousMeetsRelayHolder:
      ++z.xd;  // the destination always receives the content
      if (rng.uniform() < gamma) { ++z.d; ++z.xd; --z.y; }
      break;
    case CoevolEpoch::PlainInfectiousMeetsContentDest:
      ++z.xd;
      break;
    case CoevolEpoch::ContentInfectiousMeetsRelayHolder:
      if (rng.uniform() < gamma) { ++z.d; ++z.xd; --z.y; }
      break;
    case CoevolEpoch::PlainRelayMeetsSpreader:
      if (rng.uniform() < sigma) ++z.y;
      break;
    case CoevolEpoch::PlainRelayMeetsPlainInfectious:
      if (rng.uniform() < gamma) ++z.d;
      break;
    case CoevolEpoch::PlainRelayMeetsContentInfectious: {
      const double u = rng.uniform();
      if (u < gamma) { ++z.d; ++z.xd; }
      else if (u < gamma + (1.0 - gamma) * sigma) ++z.y;
      break;
    }
  }
}

/// One direct-method jump. Returns the epoch taken, or nullopt when the total
/// rate is zero (absorbing state). Row rates do not depend on sigma, only the
/// outcome coin flips do, so when a policy breakpoint falls inside the drawn
/// holding time the jump is re-sampled from the breakpoint (memorylessness
/// makes this exact).
inline std::optional<CoevolEpoch> gillespie_step(CoevolCounts& z,
                                                 const CoevolParams& p,
                                                 const CopyPolicy& policy,
                                                 Rng& rng) {
  for (;;) {
    const auto rates = epoch_rates(z, p);
    double total = 0.0;
    for (double r : rates) total += r;
    if (total <= 0.0) return std::nullopt;
    const double dt = rng.exponential(total);
    const double t_break = policy.next_breakpoint_after(z.t);
    if (z.t + dt > t_break) {
      z.t = t_break;
      continue;
    }
    z.t += dt;
    double u = rng.uniform() * total;
    int row = 0;
    for (; row < 8; ++row) {
      if (u < rates[static_cast<std::size_t>(row)]) break;
      u -= rates[static_cast<std::size_t>(row)];
    }
    const auto epoch = static_cast<CoevolEpoch>(row);
    apply_epoch(z, epoch, p.gamma, policy.value(z.t), rng);
    z.validate();
    return epoch;
  }
}

struct CoevolEvent {
  double t = 0.0;
  CoevolEpoch epoch{};
  CoevolCounts state;
};

struct CtmcRunResult {
  std::vector<CoevolEvent> events;  // state after each jump; events[0] is the initial state
  std::optional<double> target_time;  // first t with X >= x_target_count
  std::int64_t y_at_target = 0;
  bool absorbed = false;

  /// Counts at time t (piecewise-constant path).
  const CoevolCounts& at(double time) const {
    std::size_t lo = 0, hi = events.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (events[mid].t <= time) lo = mid; else hi = mid;
    }
    return events[lo].state;
  }
};

/// Run to absorption or `horizon`. `x_target_count` (optional) tracks the
/// empirical target time: the first jump time with X_b + X_d >= the target.
inline CtmcRunResult run_ctmc(CoevolCounts initial, const CoevolParams& p,
                              const CopyPolicy& policy, double horizon,
                              Rng& rng, double x_target_count = -1.0) {
  p.validate();
  initial.validate();
  CtmcRunResult out;
  out.events.push_back({initial.t, CoevolEpoch::PlainInfectiousRecovers, initial});
  CoevolCounts z = initial;
  if (x_target_count >= 0.0 &&
      static_cast<double>(z.content_destinations()) >= x_target_count) {
    out.target_time = z.t;
    out.y_at_target = z.y;
  }
  while (z.t < horizon) {
    const auto epoch = gillespie_step(z, p, policy, rng);
    if (!epoch) {
      out.absorbed = true;
      break;
    }
    if (z.t > horizon) break;
    out.events.push_back({z.t, *epoch, z});
    if (!out.target_time && x_target_count >= 0.0 &&
        static_cast<double>(z.content_destinations()) >= x_target_count) {
      out.target_time = z.t;
      out.y_at_target = z.y;
    }
  }
  return out;
}

}  // namespace coevo

#endif
