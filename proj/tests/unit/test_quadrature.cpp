#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "tbound/errors.hpp"
#include "tbound/quadrature.hpp"
#include "tbound/rng.hpp"
#include "tbound/special_functions.hpp"

using namespace tbound;
using doctest::Approx;

TEST_CASE("constant integrand on the unit interval") {
  const auto r = quad::integrate([](double) { return 1.0; }, quad::Domain::finite(0.0, 1.0));
  CHECK(r.value == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Beta(3,3) integral") {
  const auto r = quad::integrate([](double x) { return x * x * (1 - x) * (1 - x); },
                                 quad::Domain::finite(0.0, 1.0));
  CHECK(r.value == Approx(1.0 / 30.0).epsilon(1e-13));
  CHECK(r.err_est <= 1e-10 * r.value);
}

TEST_CASE("chi-square density integrates to one on the half line") {
  for (int N : {1, 2, 8, 64}) {
    const double k = 0.5 * N;
    const auto r = quad::integrate(
        [k](double x) {
          return std::exp((k - 1) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
        },
        quad::Domain::semi_infinite(0.0), 1e-11);
    CHECK(r.value == Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("Gaussian over the whole line") {
  const auto r = quad::integrate([](double x) { return std::exp(-0.5 * x * x); },
                                 quad::Interval{-quad::kInf, quad::kInf}, {}, {});
  CHECK(r.value == Approx(std::sqrt(2 * std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("inverse square-root endpoint with smoothing map") {
  quad::Options opt;
  opt.smooth_endpoints = true;
  const auto r = quad::integrate([](double x) { return 1.0 / std::sqrt(1.0 - x); },
                                 quad::Interval{0.0, 1.0}, {}, opt);
  CHECK(r.value == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("essential singularity of exp(-lambda/theta) at zero") {
  // int_0^1 e^{-1/x} dx = e^{-1} - E1(1)
  const auto r = quad::integrate([](double x) { return quad::exp_or_zero(-1.0 / x); },
                                 quad::Domain::finite(0.0, 1.0), 1e-13);
  CHECK(r.value == Approx(0.14849550677592204792).epsilon(1e-12));
}

TEST_CASE("vector integrand with a cancelling component") {
  quad::Options opt;
  opt.rel_to_l1 = true;
  const auto r = quad::integrate_vector(
      [](double x, std::span<double> out) {
        out[0] = std::exp(-x * x);
        out[1] = x * std::exp(-x * x);
      },
      2, quad::Interval{-quad::kInf, quad::kInf}, {}, opt);
  CHECK(r.value[0] == Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
  CHECK(std::abs(r.value[1]) < 1e-12);
}

TEST_CASE("log-space integration of a huge peak") {
  // int_0^inf x^999 e^-x dx = Gamma(1000), far beyond double range
  const auto r = quad::integrate_log([](double x) { return 999.0 * std::log(x) - x; },
                                     quad::Interval{0.0, quad::kInf}, std::nullopt, {});
  CHECK(r.log_value == Approx(std::lgamma(1000.0)).epsilon(1e-13));
}

TEST_CASE("locate_peak finds the mode of a narrow bump") {
  const auto pk = quad::locate_peak([](double x) { return -1e6 * (x - 0.3) * (x - 0.3); },
                                    quad::Interval{0.0, 1.0});
  CHECK(pk.center == Approx(0.3).epsilon(1e-8));
  CHECK(pk.scale > 0.0);
  CHECK(pk.scale < 0.01);
}

TEST_CASE("weighted t-integral of the Whittaker factor is the t-marginal mass") {
  // p_t = w(t) W(t) / t, so int w(t) W(t) / t dt = 1
  const double a = 3.0;
  const int N = 8;
  const double xi = (N - 6 * a + 2) / 4.0;
  const double m = (2 * a - N) / 4.0;
  const auto r = quad::integrate_weighted_t(
      [&](double t) { return std::exp(sf::whittaker_w_log(xi, m, t)) / t; }, a, N, 1e-11);
  CHECK(r.value == Approx(1.0).epsilon(1e-9));
  // and without the 1/t it is E[t] = N E[theta] / 2 = N / 4
  const auto r2 = quad::integrate_weighted_t(
      [&](double t) { return std::exp(sf::whittaker_w_log(xi, m, t)); }, a, N, 1e-11);
  CHECK(r2.value == Approx(N / 4.0).epsilon(1e-9));
}

TEST_CASE("weighted t-integral of zero") {
  CHECK(quad::integrate_weighted_t([](double) { return 0.0; }, 3.0, 8).value == 0.0);
}

TEST_CASE("non-finite integrand is reported with its location") {
  try {
    quad::integrate([](double x) { return x > 0.5 ? std::nan("") : 1.0; },
                    quad::Domain::finite(0.0, 1.0));
    FAIL("expected NonFiniteIntegrand");
  } catch (const NonFiniteIntegrand& e) {
    CHECK(e.at() > 0.5);
  }
}

TEST_CASE("budget exhaustion throws NonConvergent") {
  quad::Options opt;
  opt.max_evals = 200;
  opt.rel_tol = 1e-14;
  CHECK_THROWS_AS(quad::integrate([](double x) { return std::sin(1.0 / x); },
                                  quad::Interval{0.0, 1.0}, {}, opt),
                  NonConvergent);
}

TEST_CASE("invalid ranges and tolerances") {
  CHECK_THROWS_AS(quad::integrate([](double) { return 1.0; }, quad::Interval{1.0, 0.0}, {}, {}),
                  DomainError);
  quad::Options bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(quad::integrate([](double) { return 1.0; }, quad::Interval{0.0, 1.0}, {}, bad),
                  DomainError);
}

TEST_CASE("breakpoints do not change the value") {
  auto f = [](double x) { return std::exp(-x) * std::cos(x); };
  const double plain = quad::integrate(f, quad::Domain::semi_infinite(0.0), 1e-12).value;
  const std::vector<double> bps{0.1, 1.0, 3.0, 10.0};
  quad::Options opt;
  opt.rel_tol = 1e-12;
  const double split = quad::integrate(f, quad::Interval{0.0, quad::kInf}, bps, opt).value;
  CHECK(plain == Approx(0.5).epsilon(1e-11));
  CHECK(split == Approx(0.5).epsilon(1e-11));
}

TEST_CASE("integration is linear for random polynomials") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> cf(6), cg(6);
    for (auto& c : cf) c = 2.0 * rng.uniform() - 1.0;
    for (auto& c : cg) c = 2.0 * rng.uniform() - 1.0;
    const double al = rng.normal(), be = rng.normal();
    auto poly = [](const std::vector<double>& c, double x) {
      double v = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
      return v;
    };
    const auto dom = quad::Domain::finite(-1.0, 2.0);
    const double tol = 1e-10;
    const auto f = quad::integrate([&](double x) { return poly(cf, x); }, dom, tol);
    const auto g = quad::integrate([&](double x) { return poly(cg, x); }, dom, tol);
    const auto h =
        quad::integrate([&](double x) { return al * poly(cf, x) + be * poly(cg, x); }, dom, tol);
    const double combined = al * f.value + be * g.value;
    CHECK(std::abs(h.value - combined) <= 10.0 * tol * std::max(1.0, std::abs(combined)));
  }
}

TEST_CASE("split additivity on a finite range") {
  auto f = [](double x) { return std::exp(-3.0 * x) * std::cos(5.0 * x) + x * x; };
  const auto whole = quad::integrate(f, quad::Domain::finite(0.0, 2.0));
  const auto left = quad::integrate(f, quad::Domain::finite(0.0, 0.7));
  const auto right = quad::integrate(f, quad::Domain::finite(0.7, 2.0));
  CHECK(std::abs(whole.value - left.value - right.value) <=
        whole.err_est + left.err_est + right.err_est + 1e-15);
}

TEST_CASE("second moment of the chi-square density") {
  for (int N : {1, 4, 8, 64}) {
    const double k = 0.5 * N;
    const auto r = quad::integrate(
        [&](double t) {
          if (t == 0.0) return 0.0;
          return std::exp((k + 1.0) * std::log(t) - 0.5 * t - k * std::log(2.0) - std::lgamma(k));
        },
        quad::Domain::semi_infinite(0.0), 1e-10);
    CHECK(r.value == doctest::Approx(N * (N + 2.0)).epsilon(1e-10));
  }
}
