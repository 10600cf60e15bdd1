#include "plasma_spike/green_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "plasma_spike/sampling.hpp"

namespace plasma_spike {

RobinBoundReport robin_boundary_bound_check(const DomainKerneld& kernel, int samples, std::uint64_t seed) {
  if (kernel.base != DomainKind::UnitBall || kernel.is_rescaled) {
    throw std::invalid_argument("robin_boundary_bound_check needs the unit ball kernel");
  }
  Rng rng(seed);
  RobinBoundReport rep;
  rep.samples = samples;
  rep.C_N = kernel.C_N;
  const int N = kernel.N;
  for (int s = 0; s < samples; ++s) {
    const Pointd x = random_in_ball(N, 1.0, rng);
    const Pointd y = random_in_ball(N, 1.0, rng);
    const double d = kernel.boundary_distance(x);
    if (!(d > 0.0) || !kernel.contains_open(y)) continue;
    rep.C0 = std::max(rep.C0, std::abs(robin(kernel, x, y)) * std::pow(d, N - 2));
    rep.C1 = std::max(rep.C1, robin_grad_x(kernel, x, y).norm() * std::pow(d, N - 1));
  }
  rep.finite = std::isfinite(rep.C0) && std::isfinite(rep.C1);
  return rep;
}

std::vector<Pointd> halfspace_test_grid(int N, double R, int lattice, double d_max) {
  if (lattice < 2) throw std::invalid_argument("test lattice needs at least 2 points per axis");
  const double extent = 2.0 * R;
  const double step = 2.0 * extent / (lattice - 1);
  std::vector<Pointd> pts;
  std::vector<int> idx(N, 0);
  while (true) {
    Pointd x(N);
    for (int i = 0; i < N; ++i) x(i) = -extent + step * idx[i];
    // Inside the blown-up ball (B - e_N)/d  ⇔  2 x_N + d|x|² < 0.
    if (x.norm() <= extent + 1e-12 && x(N - 1) < -0.5 && 2.0 * x(N - 1) + d_max * x.squaredNorm() < 0.0) {
      pts.push_back(x);
    }
    int axis = 0;
    while (axis < N && ++idx[axis] == lattice) idx[axis++] = 0;
    if (axis == N) break;
  }
  return pts;
}

double halfspace_sup_error(const DomainKerneld& candidate, const std::vector<Pointd>& pts) {
  const int N = candidate.N;
  const double C_N = candidate.C_N;
  double worst = 0.0;
  for (const Pointd& x : pts) {
    for (const Pointd& y : pts) {
      const double h_minus = -C_N * std::pow((x - reflect(y)).norm(), 2 - N);
      worst = std::max(worst, std::abs(robin(candidate, x, y) - h_minus));
    }
  }
  return worst;
}

HalfspaceConvergenceReport halfspace_convergence_check(const ProblemConfig& config, std::span<const double> d_sequence,
                                                       double R, int lattice) {
  if (d_sequence.empty()) throw std::invalid_argument("empty blow-up sequence");
  for (std::size_t i = 0; i < d_sequence.size(); ++i) {
    const double d = d_sequence[i];
    if (!(d > 0.0) || d > 0.5) throw std::invalid_argument("blow-up scales must lie in (0, 0.5]");
    if (i > 0 && !(d < d_sequence[i - 1])) throw std::invalid_argument("blow-up scales must be strictly decreasing");
  }
  const int N = config.N;
  const auto pts = halfspace_test_grid(N, R, lattice, d_sequence.front());
  if (pts.empty()) throw std::invalid_argument("no lattice point of U_R lies in the first blown-up domain");

  const DomainKerneld ball = unit_ball_kernel(config);
  Pointd pole = Pointd::Zero(N);
  pole(N - 1) = 1.0;

  HalfspaceConvergenceReport rep;
  rep.grid_points = static_cast<int>(pts.size());
  for (double d : d_sequence) {
    rep.d.push_back(d);
    rep.error.push_back(halfspace_sup_error(rescaled_kernel(ball, pole, d), pts));
  }
  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < rep.error.size(); ++i) {
    if (!(rep.error[i] < rep.error[i - 1])) rep.strictly_decreasing = false;
  }
  rep.final_over_initial = rep.error.back() / rep.error.front();
  rep.passed = rep.strictly_decreasing && rep.final_over_initial <= 0.25;
  return rep;
}

namespace {

double rel_err(const Pointd& a, const Pointd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

template <typename F>
Pointd central_gradient(F&& f, const Pointd& x, double step) {
  Pointd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Pointd xp = x, xm = x, xp2 = x, xm2 = x;
    xp(i) += step;
    xm(i) -= step;
    xp2(i) += 2 * step;
    xm2(i) -= 2 * step;
    g(i) = (-f(xp2) + 8.0 * f(xp) - 8.0 * f(xm) + f(xm2)) / (12.0 * step);
  }
  return g;
}

Pointd boundary_point(const DomainKerneld& k, Rng& rng) {
  if (k.base == DomainKind::UnitBall) return random_unit_vector(k.N, rng);
  Pointd x = random_interior(k, 1.0, rng);
  x(k.N - 1) = 0.0;
  return x;
}

}  // namespace

GreenConformance green_conformance(const DomainKerneld& kernel, int samples, std::uint64_t seed) {
  if (kernel.is_rescaled) throw std::invalid_argument("conformance checks run on base kernels");
  Rng rng(seed);
  GreenConformance c;
  c.domain = kernel.base;
  c.samples = samples;
  c.positivity_min = std::numeric_limits<double>::infinity();
  const double fd_step = 1e-5;
  const double lap_step = 1e-3;  // relative to the boundary distance
  for (int s = 0; s < samples; ++s) {
    const Pointd x = random_interior(kernel, 0.8, rng);
    const Pointd y = random_interior(kernel, 0.8, rng);
    if ((x - y).norm() < 0.05) continue;
    const Pointd b = boundary_point(kernel, rng);
    c.dirichlet_max = std::max(c.dirichlet_max, std::abs(green(kernel, b, y)));
    const double gxy = green(kernel, x, y);
    c.symmetry_max = std::max(c.symmetry_max, std::abs(gxy - green(kernel, y, x)));
    c.positivity_min = std::min(c.positivity_min, gxy);

    const Pointd g_fd = central_gradient([&](const Pointd& z) { return green(kernel, z, y); }, x, fd_step);
    c.green_grad_rel_max = std::max(c.green_grad_rel_max, rel_err(green_grad_x(kernel, x, y), g_fd));
    const Pointd h_fd = central_gradient([&](const Pointd& z) { return robin(kernel, z, y); }, x, fd_step);
    c.robin_grad_rel_max = std::max(c.robin_grad_rel_max, rel_err(robin_grad_x(kernel, x, y), h_fd));

    {
      // Dimensionless: |Δ_h H| d² / |H| with the stencil scaled to the boundary distance d.
      const double d = kernel.boundary_distance(x);
      const double step = lap_step * d;
      const double hxy = robin(kernel, x, y);
      double lap = -2.0 * kernel.N * hxy;
      for (int i = 0; i < kernel.N; ++i) {
        Pointd xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        lap += robin(kernel, xp, y) + robin(kernel, xm, y);
      }
      c.harmonic_max = std::max(c.harmonic_max, std::abs(lap) / (lap_step * lap_step * std::abs(hxy)));
    }

    // Blow-up at a random interior center with a scale that keeps the pair inside.
    const Pointd center = random_interior(kernel, 0.5, rng);
    std::uniform_real_distribution<double> sdist(0.05, 0.4);
    const double scale = sdist(rng);
    const DomainKerneld resc = rescaled_kernel(kernel, center, scale);
    const Pointd xs = random_interior(kernel, 0.8, rng);
    const Pointd ys = random_interior(kernel, 0.8, rng);
    const Pointd xn = (xs - center) / scale;
    const Pointd yn = (ys - center) / scale;
    if ((xn - yn).norm() < 1e-6) continue;
    const double lhs = green(resc, xn, yn);
    const Pointd xb = center + scale * xn, yb = center + scale * yn;
    const double factor = std::pow(scale, kernel.N - 2);
    const double rhs = factor * green(kernel, xb, yb);
    // Relative to the size of the two terms, since G itself cancels near the boundary.
    const double magnitude =
        factor * (std::abs(fundamental(kernel.N, kernel.C_N, xb, yb)) + std::abs(robin(kernel, xb, yb)));
    c.rescaling_rel_max = std::max(c.rescaling_rel_max, std::abs(lhs - rhs) / magnitude);
  }
  return c;
}

void to_json(nlohmann::json& j, const RobinBoundReport& r) {
  j = {{"samples", r.samples}, {"C0", r.C0}, {"C1", r.C1}, {"C_N", r.C_N}, {"finite", r.finite}};
}

void to_json(nlohmann::json& j, const HalfspaceConvergenceReport& r) {
  j = {{"d", r.d},
       {"error", r.error},
       {"grid_points", r.grid_points},
       {"strictly_decreasing", r.strictly_decreasing},
       {"final_over_initial", r.final_over_initial},
       {"passed", r.passed}};
}

void to_json(nlohmann::json& j, const GreenConformance& r) {
  j = {{"domain", r.domain == DomainKind::UnitBall ? "ball" : "halfspace"},
       {"samples", r.samples},
       {"dirichlet_max", r.dirichlet_max},
       {"symmetry_max", r.symmetry_max},
       {"positivity_min", r.positivity_min},
       {"green_grad_rel_max", r.green_grad_rel_max},
       {"robin_grad_rel_max", r.robin_grad_rel_max},
       {"harmonic_max", r.harmonic_max},
       {"rescaling_rel_max", r.rescaling_rel_max}};
}

}  // namespace plasma_spike
