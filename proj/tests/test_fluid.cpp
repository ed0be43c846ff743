#include "coevo/hilt_fluid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "coevo/coevolution_fluid.hpp"
#include "coevo/ode.hpp"

using namespace coevo;

TEST_CASE("integrator reproduces a linear ODE exactly solvable by hand") {
  // Gamma = 0: db = d, dd = -d, so d(t) = d0 e^{-t}, b(t) = d0 (1 - e^{-t})
  auto dist = ThresholdDistribution::uniform01();
  auto traj = hilt_fluid_trajectory(dist, 0.0, 0.3, 5.0, 1e-3);
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    const auto s = traj.sample(t);
    CHECK(std::fabs(s[0] - 0.3 * (1.0 - std::exp(-t))) < 1e-8);
    CHECK(std::fabs(s[1] - 0.3 * std::exp(-t)) < 1e-8);
  }
}

TEST_CASE("zero initial state stays zero") {
  auto dist = ThresholdDistribution::uniform01();
  auto traj = hilt_fluid_trajectory(dist, 0.7, 0.0, 10.0, 1e-2);
  const auto s = traj.sample(10.0);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.0);
}

TEST_CASE("numeric solution matches the uniform closed form") {
  auto dist = ThresholdDistribution::uniform01();
  auto traj = hilt_fluid_trajectory(dist, 0.9, 0.2, 20.0, 1e-3);
  double sup = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto ref = hilt_closed_form_uniform(0.9, 0.2, traj.t[i]);
    sup = std::max({sup, std::fabs(traj.y[i][0] - ref[0]),
                    std::fabs(traj.y[i][1] - ref[1])});
  }
  CHECK(sup < 1e-6);
}

TEST_CASE("closed form values at fixed times") {
  // r = 1 - 0.9 + 0.9*0.2 = 0.28, b_inf = 0.2/0.28
  const auto at0 = hilt_closed_form_uniform(0.9, 0.2, 0.0);
  CHECK(at0[0] == doctest::Approx(0.0));
  CHECK(at0[1] == doctest::Approx(0.2));
  const auto at1 = hilt_closed_form_uniform(0.9, 0.2, 1.0);
  CHECK(at1[0] == doctest::Approx(0.2 / 0.28 * (1.0 - std::exp(-0.28))));
  CHECK(at1[0] == doctest::Approx(0.174440).epsilon(1e-4));
  CHECK(at1[1] == doctest::Approx(0.151157).epsilon(1e-4));
}

TEST_CASE("interest drift hand value") {
  // b = d = 0.2, Gamma = 0.9: hazard = 1/(1 - 0.18), s = 0.6
  auto dist = ThresholdDistribution::uniform01();
  const auto v = hilt_rhs({0.2, 0.2}, 0.9, dist);
  CHECK(v[0] == doctest::Approx(0.2));
  CHECK(v[1] == doctest::Approx(0.9 * 0.2 * 0.6 / 0.82 - 0.2));
}

TEST_CASE("exponential thresholds give the SIR drift") {
  auto dist = ThresholdDistribution::exponential(4.0);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 0.45);
  for (int i = 0; i < 50; ++i) {
    const double b = u(gen), d = u(gen);
    const auto v = hilt_rhs({b, d}, 0.5, dist);
    CHECK(v[0] == doctest::Approx(d));
    CHECK(v[1] == doctest::Approx(4.0 * 0.5 * d * (1.0 - b - d) - d));
  }
}

TEST_CASE("terminal fractions") {
  CHECK(terminal_fraction_uniform(0.9, 0.2) == doctest::Approx(0.2 / 0.28));
  CHECK(terminal_fraction_uniform(0.0, 0.3) == doctest::Approx(0.3));
  CHECK(terminal_fraction_uniform(1.0, 0.0) == 0.0);
  CHECK(terminal_fraction_exponential(2.0, 0.0) == 0.0);
  CHECK(terminal_fraction_exponential(2.0, 1.0) == 1.0);

  // fixed point of b = 1 - (1 - d0) e^{-2b}
  const double b = terminal_fraction_exponential(2.0, 0.2);
  CHECK(std::fabs(b - 1.0 + 0.8 * std::exp(-2.0 * b)) < 1e-9);
  CHECK(b == doctest::Approx(0.8556).epsilon(1e-3));

  // cross-check against direct integration to absorption
  auto dist = ThresholdDistribution::exponential(4.0);
  const auto end = hilt_integrate_to_absorption(dist, 0.5, 0.2);
  CHECK(std::fabs(end[0] + end[1] - b) < 1e-5);
}

TEST_CASE("coevolution drift vanishes at the origin") {
  CoevolParams p;
  const auto v = coevol_rhs({0.0, 0.0, 0.0, 0.0, 0.0}, p, 1.0);
  for (double c : v) CHECK(c == 0.0);
}

TEST_CASE("relays stop acquiring copies when sigma = 0") {
  CoevolParams p{4.0, 1.0, 0.5, 0.8, 1.0};
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    double b = 0.4 * u(gen), d = 0.4 * u(gen);
    CoevolFluidState z{b, d, b * u(gen), d * u(gen), (1.0 - b - d) * u(gen)};
    const auto v = coevol_rhs(z, p, 0.0);
    CHECK(v[kY] <= 1e-15);  // only the influence sink -Gamma*lambda*d*y remains
  }
}

TEST_CASE("controlled trajectory stays in the population simplex") {
  CoevolParams p{4.0, 1.0, 0.5, 0.8, 1.0};
  auto policy = CopyPolicy::time_threshold(2.0);
  auto traj = integrate_coevol(p, policy, {0.0, 0.2, 0.0, 0.1, 0.0}, 15.0, 1e-3);
  const double tol = 1e-6;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& z = traj.y[i];
    CHECK(z[kB] + z[kD] <= 1.0 + tol);
    CHECK(z[kXb] <= z[kB] + tol);
    CHECK(z[kXd] <= z[kD] + tol);
    CHECK(z[kY] <= 1.0 - z[kB] - z[kD] + tol);
    for (double c : z) CHECK(c >= -tol);
  }
}

TEST_CASE("delivered fraction is nondecreasing") {
  CoevolParams p{5.0, 1.0, 0.6, 0.8, 1.0};
  auto traj = integrate_coevol(p, CopyPolicy::constant(0.4),
                               {0.0, 0.25, 0.0, 0.05, 0.0}, 20.0, 1e-3);
  double prev = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double x = traj.y[i][kXb] + traj.y[i][kXd];
    CHECK(x >= prev - 1e-12);
    prev = x;
  }
}

TEST_CASE("interest subsystem matches the exponential-threshold fluid limit") {
  // with recovery rate 1 the (b, d) block is exactly the interest ODE with
  // constant hazard lambda
  CoevolParams p{4.0, 1.0, 0.5, 0.8, 1.0};
  auto traj = integrate_coevol(p, CopyPolicy::constant(1.0),
                               {0.0, 0.2, 0.0, 0.1, 0.0}, 10.0, 1e-3);
  auto dist = ThresholdDistribution::exponential(4.0);
  auto ref = hilt_fluid_trajectory(dist, 0.5, 0.2, 10.0, 1e-3);
  for (double t : {1.0, 3.0, 7.0, 10.0}) {
    const auto a = traj.sample(t);
    const auto r = ref.sample(t);
    CHECK(std::fabs(a[kB] - r[0]) < 1e-9);
    CHECK(std::fabs(a[kD] - r[1]) < 1e-9);
  }
}

TEST_CASE("target_time basics and monotonicity in the target") {
  CoevolParams p{4.0, 1.0, 0.5, 0.8, 1.0};
  auto traj = integrate_coevol(p, CopyPolicy::constant(1.0),
                               {0.0, 0.2, 0.0, 0.1, 0.0}, 30.0, 1e-3);
  CHECK(target_time(traj, 0.05).value() == 0.0);  // x(0) = 0.1 already there
  CHECK(!target_time(traj, 2.0).has_value());
  double prev = 0.0;
  for (double target : {0.2, 0.3, 0.4, 0.5}) {
    const auto t = target_time(traj, target);
    REQUIRE(t.has_value());
    CHECK(*t >= prev);
    prev = *t;
  }
}

TEST_CASE("integration step halving shows fourth-order error decay") {
  auto dist = ThresholdDistribution::uniform01();
  auto err = [&](double h) {
    auto traj = hilt_fluid_trajectory(dist, 0.9, 0.2, 5.0, h);
    const auto got = traj.sample(5.0);
    const auto ref = hilt_closed_form_uniform(0.9, 0.2, 5.0);
    return std::max(std::fabs(got[0] - ref[0]), std::fabs(got[1] - ref[1]));
  };
  const double ratio = err(0.4) / err(0.2);
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("integrator input validation and blow-up guard") {
  auto rhs = [](double, const StateVec<1>& y) -> StateVec<1> { return {y[0]}; };
  StateVec<1> y{0.5};
  CHECK_THROWS_AS(rk4_integrate<1>(rhs, y, 0.0, 1.0, -0.1,
                                   [](double, const StateVec<1>&) { return true; }),
                  std::invalid_argument);
  // exponential growth leaves [0,1] quickly
  StateVec<1> z{0.9};
  CHECK_THROWS_AS(rk4_integrate<1>(rhs, z, 0.0, 5.0, 0.01,
                                   [](double, const StateVec<1>&) { return true; }),
                  IntegrationError);
}
