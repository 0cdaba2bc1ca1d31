#include <cmath>
#include <vector>

#include "doctest.h"
#include "levyclock/clock.hpp"
#include "levyclock/errors.hpp"
#include "test_support.hpp"

using namespace levyclock;
using levyclock::testing::draw;
using levyclock::testing::draw_paths;
using levyclock::testing::moments_of;

namespace {

const CIRParams kP1{2.0, 0.5, 0.3, 0.5};

double cir_conditional_mean(double y, double t, const CIRParams& p) {
  return p.eta + (y - p.eta) * std::exp(-p.kappa * t);
}

double cir_conditional_variance(double y, double t, const CIRParams& p) {
  const double e = std::exp(-p.kappa * t);
  const double l2 = p.lambda * p.lambda;
  return y * l2 * e * (1.0 - e) / p.kappa + p.eta * l2 * (1.0 - e) * (1.0 - e) / (2.0 * p.kappa);
}

}  // namespace

TEST_CASE("clock parameter validation") {
  CHECK_NOTHROW(validate(kP1));
  CHECK_NOTHROW(validate(CIRParams{2.0, 0.5, 0.0, 0.5}));
  CHECK_THROWS_AS(validate(CIRParams{0.0, 0.5, 0.3, 0.5}), ParameterError);
  CHECK_THROWS_AS(validate(CIRParams{2.0, -0.5, 0.3, 0.5}), ParameterError);
  CHECK_THROWS_AS(validate(CIRParams{2.0, 0.5, -0.3, 0.5}), ParameterError);
  CHECK_THROWS_AS(validate(CIRParams{2.0, 0.5, 0.3, 0.0}), ParameterError);
  CHECK_THROWS_AS(validate(CKLSParams{2.0, 0.5, 0.3, 0.5, 0.4}), ParameterError);
  CHECK_THROWS_AS(validate(CKLSParams{2.0, 0.5, 0.3, 0.5, 1.1}), ParameterError);

  CHECK_THROWS_AS(validate(ClockSpec::cir(kP1, 0.0)), ParameterError);
  ClockSpec exact_ckls = ClockSpec::ckls({2.0, 0.5, 0.3, 0.5, 0.75});
  exact_ckls.scheme = ClockScheme::Exact;
  CHECK_THROWS_AS(validate(exact_ckls), UnsupportedError);

  CHECK(ClockSpec::cir(kP1).params.alpha == 0.5);
  CHECK(ClockSpec::cir(kP1).resolved_scheme() == ClockScheme::Exact);
  CHECK(ClockSpec::ckls({2.0, 0.5, 0.3, 0.5, 0.5}).resolved_scheme() == ClockScheme::Exact);
  CHECK(ClockSpec::ckls({2.0, 0.5, 0.3, 0.5, 1.0}).resolved_scheme() == ClockScheme::Euler);
}

TEST_CASE("feller_check") {
  CHECK(feller_check(kP1));
  CHECK(feller_check({1.5, 0.7, 0.2, 0.7}));
  CHECK(feller_check({3.0, 0.6, 0.4, 0.6}));
  CHECK_FALSE(feller_check({0.5, 0.1, 0.5, 0.1}));
  // Boundary 2 kappa eta == lambda^2 is not strict.
  CHECK_FALSE(feller_check({0.5, 0.25, 0.5, 0.25}));
}

TEST_CASE("cir_step_exact matches the conditional moments") {
  SUBCASE("P1, dt = 0.5") {
    const auto x = draw(1000000, 101, [](RngStream& s) { return cir_step_exact(s, 0.8, 0.5, kP1); });
    const auto m = moments_of(x);
    CHECK(std::fabs(m.mean - cir_conditional_mean(0.8, 0.5, kP1)) < 3.0 * m.se_mean);
    CHECK(std::fabs(m.variance - cir_conditional_variance(0.8, 0.5, kP1)) < 3.0 * m.se_variance);
    for (double v : x) {
      if (!(v > 0.0)) FAIL("nonpositive CIR draw");
    }
  }
  SUBCASE("fast reversion kappa = 50") {
    const CIRParams p{50.0, 0.5, 0.3, 0.5};
    const auto x = draw(200000, 102, [&](RngStream& s) { return cir_step_exact(s, 2.0, 0.1, p); });
    const auto m = moments_of(x);
    CHECK(std::fabs(m.mean - cir_conditional_mean(2.0, 0.1, p)) < 3.0 * m.se_mean);
    CHECK(std::fabs(m.variance - cir_conditional_variance(2.0, 0.1, p)) < 3.0 * m.se_variance);
  }
  SUBCASE("tiny dt stays near y") {
    RngStream s(103, 0);
    for (int i = 0; i < 10000; ++i) {
      const double v = cir_step_exact(s, 0.5, 1e-8, kP1);
      CHECK(std::fabs(v - 0.5) < 1e-3);
    }
  }
  SUBCASE("lambda = 0 follows the ODE") {
    RngStream s(104, 0);
    const CIRParams p{2.0, 0.5, 0.0, 0.8};
    CHECK(cir_step_exact(s, 0.8, 1.0, p) == doctest::Approx(cir_conditional_mean(0.8, 1.0, p)));
  }
  RngStream s(0, 0);
  CHECK_THROWS_AS(cir_step_exact(s, 0.5, 0.0, kP1), ParameterError);
  CHECK_THROWS_AS(cir_step_exact(s, 0.0, 0.1, kP1), ParameterError);
}

TEST_CASE("ckls_step_euler") {
  RngStream s(0, 0);
  const CKLSParams p{2.0, 0.5, 5.0, 0.5, 1.0};
  for (int i = 0; i < 10000; ++i) CHECK(ckls_step_euler(s, 0.01, 0.1, p) >= kCklsFloor);
  // Negative input is truncated before the drift and diffusion see it.
  CHECK(ckls_step_euler(s, -0.01, 0.1, {2.0, 0.5, 0.0, 0.5, 1.0}) ==
        doctest::Approx(-0.01 + 2.0 * 0.5 * 0.1));
  CHECK(ckls_step_euler(s, -1.0, 0.1, {2.0, 0.5, 0.0, 0.5, 1.0}) == kCklsFloor);
  CHECK_THROWS_AS(ckls_step_euler(s, 0.5, -0.1, p), ParameterError);
}

TEST_CASE("alpha = 1/2 Euler agrees with the exact transition") {
  ClockSpec euler = ClockSpec::ckls({2.0, 0.5, 0.3, 0.8, 0.5}, 1e-3);
  euler.scheme = ClockScheme::Euler;
  const ClockSpec exact = ClockSpec::cir({2.0, 0.5, 0.3, 0.8}, 1e-3);
  auto terminal = [](const ClockSpec& spec) {
    return [&spec](RngStream& s) {
      ClockState st = initial_state(spec);
      advance_clock(s, spec, st, 1.0);
      return st.y;
    };
  };
  const auto a = moments_of(draw_paths(20000, 111, terminal(euler)));
  const auto b = moments_of(draw_paths(20000, 112, terminal(exact)));
  CHECK(std::fabs(a.mean - b.mean) < 3.0 * std::hypot(a.se_mean, b.se_mean));
  CHECK(std::fabs(a.variance - b.variance) < 3.0 * std::hypot(a.se_variance, b.se_variance));
}

TEST_CASE("advance_clock lands on arbitrary targets") {
  const ClockSpec spec = ClockSpec::cir(kP1, 0.01);
  RngStream s(121, 0);
  ClockState st = initial_state(spec);
  CHECK(st.y == 0.5);
  advance_clock(s, spec, st, 0.0);
  CHECK(st.integral == 0.0);
  advance_clock(s, spec, st, 0.037);
  CHECK(st.time == 0.037);
  advance_clock(s, spec, st, 1.0);
  CHECK(st.time == 1.0);
  CHECK(st.integral > 0.0);
  CHECK_THROWS_AS(advance_clock(s, spec, st, 0.5), ParameterError);

  SUBCASE("deterministic clock integrates the ODE") {
    const CIRParams p{2.0, 0.5, 0.0, 0.8};
    const ClockSpec ode = ClockSpec::cir(p, 1e-3);
    RngStream r(0, 0);
    ClockState z = initial_state(ode);
    advance_clock(r, ode, z, 1.0);
    CHECK(z.y == doctest::Approx(cir_conditional_mean(0.8, 1.0, p)).epsilon(1e-12));
    CHECK(z.integral == doctest::Approx(0.62969970751450812).epsilon(1e-6));
    CHECK(icir_mean(1.0, p) == doctest::Approx(0.62969970751450812).epsilon(1e-14));
  }
}

TEST_CASE("clock_path") {
  const ClockSpec spec = ClockSpec::cir(kP1, 0.01);
  RngStream s(131, 0);
  const auto path = clock_path(s, spec, 1.005);
  CHECK(path.grid.size() == 102);
  CHECK(path.grid.back() == 1.005);
  CHECK(path.t_values.front() == 0.0);
  for (std::size_t i = 1; i < path.grid.size(); ++i) {
    CHECK(path.t_values[i] >= path.t_values[i - 1]);
    CHECK(path.y_values[i] > 0.0);
  }
  const auto empty = clock_path(s, spec, 0.0);
  CHECK(empty.grid.size() == 1);
  CHECK(empty.t_values == std::vector<double>{0.0});
  CHECK_THROWS_AS(clock_path(s, spec, -1.0), ParameterError);

  SUBCASE("heavy-noise CKLS path stays floored") {
    const ClockSpec wild = ClockSpec::ckls({2.0, 0.5, 3.0, 0.5, 1.0}, 0.05);
    for (std::uint64_t i = 0; i < 50; ++i) {
      RngStream r(132, i);
      const auto p = clock_path(r, wild, 20.0);
      for (double y : p.y_values) {
        if (y < kCklsFloor) FAIL("below floor");
      }
    }
  }
}

TEST_CASE("integrate_clock trapezoid") {
  const std::vector<double> grid{0.0, 1.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 1.0};
  CHECK(integrate_clock(grid, y) == std::vector<double>{0.0, 2.0, 6.0});
  const std::vector<double> lone_grid{0.0};
  const std::vector<double> lone_y{7.0};
  CHECK(integrate_clock(lone_grid, lone_y) == std::vector<double>{0.0});
  // Linear y is integrated exactly.
  std::vector<double> g(11), lin(11);
  for (int i = 0; i <= 10; ++i) {
    g[i] = 0.1 * i;
    lin[i] = 2.0 + 3.0 * g[i];
  }
  CHECK(integrate_clock(g, lin).back() == doctest::Approx(2.0 + 1.5).epsilon(1e-14));

  const std::vector<double> bad{1.0, -0.1, 1.0};
  CHECK_THROWS_AS(integrate_clock(grid, bad), InvariantError);
  const std::vector<double> short_y{1.0, 2.0};
  CHECK_THROWS_AS(integrate_clock(grid, short_y), ParameterError);
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(integrate_clock(unsorted, y), ParameterError);
}

TEST_CASE("integrated CIR mean u(t)") {
  CHECK(icir_mean(0.0, kP1) == 0.0);
  // y0 = eta gives u(t) = eta t exactly.
  for (double t : {0.5, 3.0, 40.0}) CHECK(icir_mean(t, kP1) == doctest::Approx(0.5 * t).epsilon(1e-15));
  const CIRParams p{2.0, 0.5, 0.3, 0.8};
  CHECK(icir_mean(1.0, p) == doctest::Approx(0.62969970751450812).epsilon(1e-14));
  CHECK_THROWS_AS(icir_mean(-1.0, p), ParameterError);
}

TEST_CASE("integrated CIR variance w(t)") {
  struct Case {
    double t, kappa, eta, y0, w;
  };
  // Defining integral evaluated with mpmath at 30 digits.
  const Case cases[] = {{1, 2, 0.5, 0.5, 0.047594546689303643},
                        {5, 2, 0.5, 0.8, 0.56872162490219414},
                        {10, 1.5, 0.7, 0.2, 2.6518533383105392},
                        {0.01, 3, 0.6, 1.0, 3.2496089153775545e-7}};
  for (const auto& c : cases) {
    CAPTURE(c.t);
    const CIRParams p{c.kappa, c.eta, 0.3, c.y0};
    CHECK(icir_w(c.t, p) == doctest::Approx(c.w).epsilon(1e-10));
    CHECK(icir_w_integral(c.t, p) == doctest::Approx(c.w).epsilon(1e-10));
  }
  for (double t : {1.0, 5.0, 10.0, 50.0}) {
    CAPTURE(t);
    CHECK(icir_w(t, kP1) == doctest::Approx(icir_w_integral(t, kP1)).epsilon(1e-8));
  }
  CHECK(icir_w(0.0, kP1) == 0.0);
  // Var[T(t)]/t -> eta lambda^2 / kappa^2 = 0.01125.
  CHECK(std::fabs(icir_variance(500.0, kP1) / 500.0 / 0.01125 - 1.0) < 0.02);

  SUBCASE("Monte Carlo agrees with u and lambda^2 w") {
    const CIRParams p{2.0, 0.5, 0.3, 0.8};
    const ClockSpec spec = ClockSpec::cir(p, 0.01);
    const auto x = draw_paths(20000, 141, [&](RngStream& s) {
      ClockState st = initial_state(spec);
      advance_clock(s, spec, st, 5.0);
      return st.integral;
    });
    const auto m = moments_of(x);
    CHECK(std::fabs(m.mean - icir_mean(5.0, p)) < 3.0 * m.se_mean);
    CHECK(std::fabs(m.variance - icir_variance(5.0, p)) < 3.0 * m.se_variance);
  }
}

TEST_CASE("long-run time average of the rate") {
  const ClockSpec spec = ClockSpec::cir(kP1, 0.01);
  const auto x = draw_paths(200, 151, [&](RngStream& s) { return time_average_power(s, spec, 200.0, 1.0); });
  const auto m = moments_of(x);
  CHECK(std::fabs(m.mean - 0.5) < 3.0 * m.se_mean);
  CHECK(std::fabs(m.mean - 0.5) < 0.01);
  RngStream s(0, 0);
  CHECK_THROWS_AS(time_average_power(s, spec, 0.0, 1.0), ParameterError);
}

TEST_CASE("CKLS stationary density") {
  SUBCASE("alpha = 1/2 is Gamma(2 kappa eta / lambda^2, lambda^2 / (2 kappa))") {
    const CKLSParams p{2.0, 0.5, 0.3, 0.5, 0.5};
    // scipy.stats.gamma(a=100/9, scale=0.0225).pdf
    const std::pair<double, double> ref[] = {{0.1, 2.889344596335284e-07},
                                             {0.5, 3.7471865120479233},
                                             {1.0, 0.0020475866387339166},
                                             {2.0, 2.4991411010846734e-16}};
    for (auto [r, f] : ref) {
      CAPTURE(r);
      CHECK(ckls_stationary_density(r, p) == doctest::Approx(f).epsilon(1e-8));
    }
  }
  SUBCASE("normalized for every alpha") {
    for (double alpha : {0.5, 0.6, 0.75, 0.9, 1.0}) {
      CAPTURE(alpha);
      const CklsStationary law({2.0, 0.5, 0.3, 0.5, alpha});
      CHECK(law.moment(1e-300).quadrature == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("alpha = 1 density is unimodal") {
    const CklsStationary law({2.0, 0.5, 0.3, 0.5, 1.0});
    int turns = 0;
    double prev = law.density(0.01);
    bool rising = true;
    for (int i = 2; i < 400; ++i) {
      const double f = law.density(0.01 * i);
      if (rising && f < prev) {
        rising = false;
        ++turns;
      } else if (!rising && f > prev * (1.0 + 1e-12)) {
        ++turns;
      }
      prev = f;
    }
    CHECK(turns == 1);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(CklsStationary({2.0, 0.5, 0.0, 0.5, 1.0}), DomainError);
    CHECK_THROWS_AS(CklsStationary({0.5, 0.1, 0.5, 0.1, 0.5}), DomainError);
    CHECK_THROWS_AS(ckls_stationary_density(0.0, CKLSParams{}), ParameterError);
  }
}

TEST_CASE("CKLS stationary moments") {
  const CKLSParams p1{2.0, 0.5, 0.3, 0.5, 1.0};
  const auto m2 = ckls_stationary_moment(p1, 2.0);
  REQUIRE(m2.closed_form.has_value());
  // Inverse-gamma: 2 kappa eta^2 / (2 kappa - lambda^2).
  CHECK(m2.value() == doctest::Approx(0.2557544757033248).epsilon(1e-12));
  CHECK(m2.quadrature == doctest::Approx(0.2557544757033248).epsilon(1e-6));
  CHECK(0.09 / 4.0 * m2.value() == doctest::Approx(0.0057545).epsilon(1e-4));

  CHECK(ckls_stationary_moment({2.0, 0.5, 0.3, 0.5, 0.5}, 1.0).value() ==
        doctest::Approx(0.5).epsilon(1e-12));
  for (double alpha : {0.5, 0.6, 0.75, 1.0}) {
    CAPTURE(alpha);
    CHECK(ckls_stationary_moment({2.0, 0.5, 0.3, 0.5, alpha}, 1.0).value() ==
          doctest::Approx(0.5).epsilon(1e-6));
  }
  // alpha = 1 moments exist only below c + 1 = 2 kappa / lambda^2 + 1.
  CHECK_THROWS_AS(ckls_stationary_moment({1.0, 0.5, 1.0, 0.5, 1.0}, 3.0), DomainError);
  CHECK_THROWS_AS(ckls_stationary_moment(p1, -1.0), ParameterError);
}

TEST_CASE("ergodic average of r^2 matches the stationary moment") {
  const ClockSpec spec = ClockSpec::ckls({2.0, 0.5, 0.3, 0.5, 1.0}, 0.01);
  const auto x = draw_paths(20, 161, [&](RngStream& s) { return time_average_power(s, spec, 2000.0, 2.0); });
  const auto m = moments_of(x);
  CHECK(std::fabs(m.mean / 0.2557544757033248 - 1.0) < 0.05);
}

TEST_CASE("stationary law at extreme parameters") {
  // Just inside Feller: Gamma shape 1.02, slow decay toward r = 0.
  const auto edge = ckls_stationary_moment({1.0, 0.51, 1.0, 0.51, 0.5}, 1.0);
  CHECK(edge.quadrature == doctest::Approx(0.51).epsilon(1e-6));
  // Tiny lambda: a needle-sharp peak at eta.
  const auto sharp = ckls_stationary_moment({2.0, 0.5, 1e-3, 0.5, 0.75}, 1.0);
  CHECK(sharp.value() == doctest::Approx(0.5).epsilon(1e-5));
  const CklsStationary needle({2.0, 0.5, 1e-3, 0.5, 0.5});
  CHECK(needle.moment(1e-300).quadrature == doctest::Approx(1.0).epsilon(1e-6));
  // alpha = 1 with E[r^2] barely finite: closed form survives a tail the window cannot hold.
  const auto heavy = ckls_stationary_moment({1.0, 0.5, std::sqrt(2.0 / 1.05), 0.5, 1.0}, 2.0);
  REQUIRE(heavy.closed_form.has_value());
  CHECK(std::isfinite(heavy.value()));
  CHECK(heavy.value() == doctest::Approx(2.0 * 0.25 / (2.0 - 2.0 / 1.05)).epsilon(1e-12));
}
