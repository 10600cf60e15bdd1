#include <doctest.h>

#include <cmath>
#include <numbers>

#include "plasma_spike/kirchhoff_routh.hpp"
#include "plasma_spike/sampling.hpp"

using namespace plasma_spike;

namespace {

SpikeConfigurationd make(const DomainKerneld& k, PointListd pts, std::vector<double> w) {
  return SpikeConfigurationd{std::move(pts), std::move(w), k};
}

// Derivative of t ↦ ℋ(t e₁, -t e₁) / C_N for weights (1,-1) in the unit ball of R³.
double reduced_derivative(double t) {
  const double a = 1.0 - t * t, b = 1.0 + t * t;
  return -4.0 * t / (a * a) + 1.0 / (t * t) - 4.0 * t / (b * b);
}

double bisect_reduced() {
  double lo = 0.05, hi = 0.95;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (reduced_derivative(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("kirchhoff_routh") {
  TEST_CASE("hamiltonian values") {
    const auto cfg = make_config(3, 2.0);
    const auto ball = unit_ball_kernel(cfg);
    CHECK(hamiltonian(make(ball, {Pointd::Zero(3)}, {1.0})) == doctest::Approx(-1.0 / (4.0 * std::numbers::pi)));

    const Pointd a = make_point({0.2, -0.1, 0.3}), b = make_point({-0.4, 0.2, 0.1});
    CHECK(hamiltonian(make(ball, {a, b}, {1.0, 1.0})) == doctest::Approx(hamiltonian(make(ball, {b, a}, {1.0, 1.0}))).epsilon(1e-15));

    for (double t : {0.1, 0.45, 0.8}) {
      const Pointd x = make_point({t, 0, 0}), y = make_point({-t, 0, 0});
      const double direct = robin(ball, x, x) + robin(ball, y, y) + 2.0 * green(ball, x, y);
      CHECK(hamiltonian(make(ball, {x, y}, {1.0, 1.0})) == doctest::Approx(direct).epsilon(1e-12));
    }
  }

  TEST_CASE("permutation invariance") {
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
      PointListd pts{random_interior(ball, 0.8, rng), random_interior(ball, 0.8, rng), random_interior(ball, 0.8, rng)};
      const std::vector<double> w{1.0, -0.5, 2.0};
      const double h0 = hamiltonian(make(ball, pts, w));
      const double h1 = hamiltonian(make(ball, {pts[2], pts[0], pts[1]}, {w[2], w[0], w[1]}));
      CHECK(h1 == doctest::Approx(h0).epsilon(1e-13));
    }
  }

  TEST_CASE("gradient") {
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    CHECK(hamiltonian_grad(make(ball, {Pointd::Zero(3)}, {1.0}))[0].norm() == 0.0);
    const Pointd g = hamiltonian_grad(make(ball, {make_point({0.3, 0, 0})}, {1.0}))[0];
    CHECK(std::abs(g(1)) <= 1e-15);
    CHECK(std::abs(g(2)) <= 1e-15);
    CHECK(std::abs(g(0)) > 0.0);

    Rng rng(8);
    for (const auto& kernel : {ball, half_space_kernel(make_config(3, 2.0))}) {
      for (int trial = 0; trial < 30; ++trial) {
        PointListd pts{random_interior(kernel, 0.8, rng), random_interior(kernel, 0.8, rng),
                       random_interior(kernel, 0.8, rng)};
        const std::vector<double> w{1.0, 1.0, -1.0};
        const auto grad = hamiltonian_grad(make(kernel, pts, w));
        for (std::size_t m = 0; m < pts.size(); ++m) {
          Pointd fd(3);
          for (int a = 0; a < 3; ++a) {
            auto shifted = pts;
            shifted[m](a) += 1e-5;
            const double up = hamiltonian(make(kernel, shifted, w));
            shifted[m](a) -= 2e-5;
            const double down = hamiltonian(make(kernel, shifted, w));
            fd(a) = (up - down) / 2e-5;
          }
          CHECK((grad[m] - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
        }
      }
    }
  }

  TEST_CASE("configuration validation") {
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    CHECK_THROWS_AS(hamiltonian(make(ball, {make_point({0.1, 0, 0}), make_point({0.1, 0, 0})}, {1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(hamiltonian(make(ball, {make_point({1.1, 0, 0})}, {1})), std::invalid_argument);
    CHECK_THROWS_AS(hamiltonian(make(ball, {make_point({0.1, 0, 0})}, {0.0})), std::invalid_argument);
  }

  TEST_CASE("harmonic center of the ball") {
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    CriticalSearchOptions opts;
    opts.restarts = 16;
    const auto res = find_critical(ball, 1, {1.0}, opts);
    REQUIRE(res.critical.size() == 1);
    CHECK(res.critical[0].configuration.points[0].norm() <= 1e-8);
    CHECK(res.critical[0].hits == 16);
    for (const auto& c : res.raw) CHECK(c.points[0].norm() <= 1e-8);
    CHECK(max_abs_component(hamiltonian_grad(res.critical[0].configuration)) <= opts.tol);
  }

  TEST_CASE("opposite-sign pair matches the reduced equation") {
    const double t_star = bisect_reduced();
    CHECK(t_star == doctest::Approx(0.4749646535483733).epsilon(1e-12));
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    CriticalSearchOptions opts;
    opts.restarts = 16;
    const auto res = find_critical(ball, 2, {1.0, -1.0}, opts);
    REQUIRE(!res.critical.empty());
    bool matched = false;
    for (const auto& c : res.critical) {
      const auto& p = c.configuration.points;
      if ((p[0] + p[1]).norm() <= 1e-8 && std::abs(p[0].norm() - t_star) <= 1e-6) matched = true;
      CHECK(max_abs_component(hamiltonian_grad(c.configuration)) <= opts.tol);
    }
    CHECK(matched);
  }

  TEST_CASE("equal-weight pair has no critical point in the ball") {
    for (double t = 0.01; t < 0.99; t += 0.01) {
      const double a = 1.0 - t * t, b = 1.0 + t * t;
      CHECK(-4.0 * t / (a * a) - 1.0 / (t * t) + 4.0 * t / (b * b) < 0.0);
    }
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    CriticalSearchOptions opts;
    opts.restarts = 8;
    const auto res = find_critical(ball, 2, {1.0, 1.0}, opts);
    CHECK(res.critical.empty());
    CHECK(!res.diagnostics.empty());
  }

  TEST_CASE("half-space has no single-point critical configuration") {
    const auto half = half_space_kernel(make_config(3, 2.0));
    CriticalSearchOptions opts;
    opts.restarts = 8;
    const auto res = find_critical(half, 1, {1.0}, opts);
    CHECK(res.critical.empty());
  }

  TEST_CASE("canonical form is rotation invariant") {
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    const auto c = make(ball, {make_point({0.3, 0.1, 0}), make_point({-0.2, 0.1, 0.25})}, {1.0, -1.0});
    const double th = 0.7;
    Eigen::Matrix3d R;
    R << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
    const auto d = make(ball, {Pointd(R * c.points[1]), Pointd(R * c.points[0])}, {-1.0, 1.0});
    const auto ca = canonicalize(c), cb = canonicalize(d);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK((ca.points[i] - cb.points[i]).norm() <= 1e-12);
      CHECK(ca.weights[i] == cb.weights[i]);
    }
  }
}
