#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "plasma_spike/green_checks.hpp"
#include "plasma_spike/green_kernels.hpp"
#include "plasma_spike/sampling.hpp"

using namespace plasma_spike;

namespace {

const double kPi = std::numbers::pi;

// Five-point central difference of a scalar function of x.
template <typename F>
Pointd fd_gradient(F f, const Pointd& x, double step = 1e-5) {
  Pointd g(x.size());
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    auto at = [&](double t) {
      Pointd y = x;
      y(a) += t;
      return f(y);
    };
    g(a) = (-at(2 * step) + 8 * at(step) - 8 * at(-step) + at(-2 * step)) / (12 * step);
  }
  return g;
}

double rel(const Pointd& a, const Pointd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_SUITE("green_kernels") {
  TEST_CASE("closed-form values") {
    const auto cfg = make_config(3, 2.0);
    const auto half = half_space_kernel(cfg);
    const auto ball = unit_ball_kernel(cfg);
    CHECK(green(half, make_point({0, 0, -1}), make_point({0, 0, -2})) == doctest::Approx(1.0 / (6.0 * kPi)).epsilon(1e-14));
    CHECK(robin_diagonal(ball, make_point({0, 0, 0})) == doctest::Approx(-1.0 / (4.0 * kPi)).epsilon(1e-14));
    CHECK(robin_diagonal(half, make_point({0, 0, -1})) == doctest::Approx(-1.0 / (8.0 * kPi)).epsilon(1e-14));

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const Pointd y = random_interior(ball, 0.95, rng);
      if (y.norm() < 1e-3) continue;
      CHECK(green(ball, Pointd(Pointd::Zero(3)), y) ==
            doctest::Approx(cfg.C_N * (1.0 / y.norm() - 1.0)).epsilon(1e-12));
      const Pointd x = random_interior(ball, 0.95, rng);
      CHECK(robin(ball, x, x) == doctest::Approx(-cfg.C_N / (1.0 - x.squaredNorm())).epsilon(1e-12));
      const Pointd z = random_interior(half, 3.0, rng);
      CHECK(robin(half, z, z) == doctest::Approx(-cfg.C_N / (2.0 * std::abs(z(2)))).epsilon(1e-12));
    }
  }

  TEST_CASE("four-dimensional ball diagonal") {
    const auto cfg = make_config(4, 1.5);
    const auto ball = unit_ball_kernel(cfg);
    const Pointd x = make_point({0.1, -0.2, 0.3, 0.05});
    CHECK(robin_diagonal(ball, x) == doctest::Approx(-cfg.C_N * std::pow(1.0 - x.squaredNorm(), -2.0)).epsilon(1e-13));
  }

  TEST_CASE("argument validation") {
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    const Pointd x = make_point({0.2, 0.0, 0.0});
    CHECK_THROWS_AS(green(ball, x, x), std::invalid_argument);
    CHECK_THROWS_AS(green(ball, x, make_point({0.2 + 1e-11, 0, 0})), std::invalid_argument);
    CHECK_THROWS_AS(green(ball, x, make_point({1.5, 0, 0})), std::invalid_argument);
    CHECK_THROWS_AS(robin(ball, make_point({1, 0, 0}), make_point({1, 0, 0})), std::invalid_argument);
    CHECK_THROWS_AS(rescaled_kernel(ball, x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rescaled_kernel(ball, make_point({2, 0, 0}), 0.5), std::invalid_argument);
    CHECK(std::abs(green(ball, make_point({1, 0, 0}), x)) <= 1e-10);
  }

  TEST_CASE("conformance on both domains") {
    for (int N : {3, 4}) {
      const auto cfg = make_config(N, N == 3 ? 2.0 : 1.5);
      for (const auto& k : {unit_ball_kernel(cfg), half_space_kernel(cfg)}) {
        const auto rep = green_conformance(k, 1000, 11);
        CAPTURE(N);
        CAPTURE(static_cast<int>(k.base));
        CHECK(rep.dirichlet_max <= 1e-10);
        CHECK(rep.symmetry_max <= 1e-10);
        CHECK(rep.positivity_min > 0.0);
        CHECK(rep.green_grad_rel_max <= 1e-6);
        CHECK(rep.robin_grad_rel_max <= 1e-6);
        CHECK(rep.harmonic_max <= 1e-4);
        CHECK(rep.rescaling_rel_max <= 1e-12);
      }
    }
  }

  TEST_CASE("robin gradient against finite differences") {
    const auto ball = unit_ball_kernel(make_config(3, 2.0));
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      const Pointd x = random_interior(ball, 0.8, rng);
      const Pointd y = random_interior(ball, 0.8, rng);
      const Pointd fd = fd_gradient([&](const Pointd& t) { return robin(ball, t, y); }, x);
      CHECK(rel(robin_grad_x(ball, x, y), fd) <= 1e-6);
      const Pointd fdd = fd_gradient([&](const Pointd& t) { return robin_diagonal(ball, t); }, x);
      CHECK(rel(robin_diagonal_grad(ball, x), fdd) <= 1e-6);
    }
  }

  TEST_CASE("rescaling") {
    const auto cfg = make_config(3, 2.0);
    const auto ball = unit_ball_kernel(cfg);
    const auto same = rescaled_kernel(ball, Pointd(Pointd::Zero(3)), 1.0);
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
      const Pointd x = random_interior(ball, 0.9, rng);
      const Pointd y = random_interior(ball, 0.9, rng);
      CHECK(std::abs(green(same, x, y) - green(ball, x, y)) <= 1e-14 * std::abs(green(ball, x, y)));
    }
    const Pointd c = make_point({0.3, -0.1, 0.2});
    const double s = 0.25;
    const auto resc = rescaled_kernel(ball, c, s);
    for (int i = 0; i < 1000; ++i) {
      const Pointd x = random_in_ball(3, 1.5, rng);
      const Pointd y = random_in_ball(3, 1.5, rng);
      const double lhs = green(resc, x, y);
      const double rhs = s * green(ball, Pointd(c + s * x), Pointd(c + s * y));
      REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
      const double singular = lhs - s * robin(ball, Pointd(c + s * x), Pointd(c + s * y));
      REQUIRE(singular == doctest::Approx(cfg.C_N / (x - y).norm()).epsilon(1e-12));
    }
  }

  TEST_CASE("robin boundary bound") {
    const auto cfg = make_config(3, 2.0);
    const auto ball = unit_ball_kernel(cfg);
    const auto rep = robin_boundary_bound_check(ball, 10000, 1);
    CHECK(rep.finite);
    CHECK(rep.C0 <= cfg.C_N * (1.0 + 1e-12));
    CHECK(rep.C0 >= 0.9 * cfg.C_N);
    CHECK(rep.C1 > 0.0);

    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
      const Pointd x = 0.5 * random_unit_vector(3, rng);
      const Pointd y = random_interior(ball, 0.99, rng);
      CHECK(std::abs(robin(ball, x, y)) <= rep.C0 * 2.0 * (1.0 + 1e-12));
    }
    const Pointd y = make_point({0.1, 0.2, -0.3});
    double worst = 0.0;
    for (double t = 0.5; t < 1.0; t += 0.5 * (1.0 - t)) {
      if (1.0 - t < 1e-9) break;
      worst = std::max(worst, std::abs(robin(ball, make_point({t, 0.0, 0.0}), y)));
    }
    CHECK(worst < 1.0);
    CHECK(std::isfinite(worst));
  }

  TEST_CASE("half-space limit of the blown-up ball") {
    const auto cfg = make_config(3, 2.0);
    const std::vector<double> d{0.2, 0.1, 0.05, 0.025};
    const auto rep = halfspace_convergence_check(cfg, d);
    CHECK(rep.strictly_decreasing);
    CHECK(rep.final_over_initial <= 0.25);
    CHECK(rep.passed);
    CHECK(rep.grid_points > 100);

    const auto ball = unit_ball_kernel(cfg);
    const Pointd pole = make_point({0, 0, 1});
    const Pointd x = make_point({0, 0, -1});
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {0.1, 0.01, 0.001}) {
      const double gap = std::abs(robin(rescaled_kernel(ball, pole, s), x, x) + cfg.C_N / 2.0);
      CHECK(gap < prev);
      prev = gap;
    }
    CHECK(prev < 1e-3);

    const auto pts = halfspace_test_grid(3, 2.0, 21, 0.2);
    CHECK(halfspace_sup_error(half_space_kernel(cfg), pts) == 0.0);
    const std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS_AS(halfspace_convergence_check(cfg, bad), std::invalid_argument);
    const std::vector<double> zero{0.0};
    CHECK_THROWS_AS(halfspace_convergence_check(cfg, zero), std::invalid_argument);
  }
}
