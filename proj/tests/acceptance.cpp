// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "plasma_spike/asymptotics.hpp"
#include "plasma_spike/balance_system.hpp"
#include "plasma_spike/green_checks.hpp"
#include "plasma_spike/kirchhoff_routh.hpp"
#include "plasma_spike/sampling.hpp"

using namespace plasma_spike;

namespace {

struct Criterion {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    ok = ok && cond;
    detail << "    [" << (cond ? "ok" : "FAILED") << "] " << what << "\n";
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

int failures = 0;

void run(int id, const std::string& title, double time_limit, const std::function<void(Criterion&)>& body) {
  Criterion c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.check(secs <= time_limit, "runtime " + fmt(secs) + " s <= " + fmt(time_limit) + " s");
  if (!c.ok) ++failures;
  std::cout << (c.ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << " (" << fmt(secs) << " s)\n"
            << c.detail.str() << std::flush;
}

void radial_construction(Criterion& c) {
  for (const auto& [N, p] : {std::pair{3, 1.5}, {3, 2.0}, {3, 2.5}, {4, 1.5}}) {
    const auto pr = shoot(make_config(N, p));
    const auto w0 = glue_w0(pr);
    const std::string tag = "(N=" + std::to_string(N) + ", p=" + fmt(p) + ") ";
    const double value_gap = std::abs(w0.inner_value_at_R0() - 1.0);
    const double slope_gap = std::abs(w0.inner_slope_at_R0() - w0.tail_slope_at_R0());
    const double poho = radial_pohozaev_residual(pr);
    const double closed = mass_closed_form(pr.config, pr.R0);
    const double mass_rel = std::abs(compute_mass(pr) - closed) / closed;
    c.check(value_gap == 0.0, tag + "value gap at R0 = " + fmt(value_gap));
    c.check(slope_gap <= 1e-8, tag + "slope gap " + fmt(slope_gap) + " <= 1e-8");
    c.check(poho <= 1e-6, tag + "radial Pohozaev residual " + fmt(poho) + " <= 1e-6");
    c.check(mass_rel <= 1e-6, tag + "mass vs closed form " + fmt(mass_rel) + " <= 1e-6");
  }
}

void green_kernels(Criterion& c) {
  const auto cfg = make_config(3, 2.0);
  for (const auto& k : {unit_ball_kernel(cfg), half_space_kernel(cfg)}) {
    const std::string tag = k.base == DomainKind::UnitBall ? "ball: " : "half-space: ";
    const auto r = green_conformance(k, 1000, 1);
    c.check(r.dirichlet_max <= 1e-10, tag + "Dirichlet " + fmt(r.dirichlet_max) + " <= 1e-10");
    c.check(r.symmetry_max <= 1e-10, tag + "symmetry " + fmt(r.symmetry_max) + " <= 1e-10");
    const double grad = std::max(r.green_grad_rel_max, r.robin_grad_rel_max);
    c.check(grad <= 1e-6, tag + "gradient vs finite differences " + fmt(grad) + " <= 1e-6");
    c.check(r.rescaling_rel_max <= 1e-12, tag + "rescaling identity on 1000 pairs " + fmt(r.rescaling_rel_max) + " <= 1e-12");
  }
}

void halfspace_limit(Criterion& c) {
  const std::vector<double> d{0.2, 0.1, 0.05, 0.025};
  const auto r = halfspace_convergence_check(make_config(3, 2.0), d);
  std::string seq;
  for (double e : r.error) seq += fmt(e) + " ";
  c.check(r.strictly_decreasing, "sup errors strictly decreasing: " + seq);
  c.check(r.final_over_initial <= 0.25, "final/initial " + fmt(r.final_over_initial) + " <= 0.25");
}

void balance(Criterion& c) {
  int violations = 0, nonpositive = 0;
  for (const auto& [mode, k0, k1] : {std::tuple{BalanceMode::Interior, 2, 6}, {BalanceMode::Boundary, 1, 5}}) {
    for (int k = k0; k <= k1; ++k) {
      const auto r = fuzz_certificates(mode, k, 10000, 1000 + k);
      violations += r.violations;
      nonpositive += r.nonpositive;
    }
  }
  c.check(violations == 0, "soundness violations over 100000 certificates: " + std::to_string(violations));
  c.check(nonpositive == 0, "non-positive bounds: " + std::to_string(nonpositive));
  MinimizeOptions opts;
  opts.restarts = 64;
  for (int k = 2; k <= 6; ++k) {
    const auto m = minimize_residual(BalanceMode::Interior, k, opts);
    c.check(m.best_value >= 1e-3, "interior k=" + std::to_string(k) + " best max|F_j| " + fmt(m.best_value) + " >= 1e-3");
  }
}

void kirchhoff_routh(Criterion& c) {
  const auto cfg = make_config(3, 2.0);
  const auto ball = unit_ball_kernel(cfg);
  Rng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    PointListd pts{random_interior(ball, 0.8, rng), random_interior(ball, 0.8, rng), random_interior(ball, 0.8, rng)};
    const std::vector<double> w{1.0, -1.0, 0.5};
    const auto grad = hamiltonian_grad(SpikeConfigurationd{pts, w, ball});
    for (std::size_t m = 0; m < pts.size(); ++m) {
      Pointd fd(3);
      for (int a = 0; a < 3; ++a) {
        auto s = pts;
        s[m](a) += 1e-5;
        const double up = hamiltonian(SpikeConfigurationd{s, w, ball});
        s[m](a) -= 2e-5;
        fd(a) = (up - hamiltonian(SpikeConfigurationd{s, w, ball})) / 2e-5;
      }
      worst = std::max(worst, (grad[m] - fd).norm() / std::max(1.0, fd.norm()));
    }
  }
  c.check(worst <= 1e-6, "gradient vs finite differences " + fmt(worst) + " <= 1e-6");

  CriticalSearchOptions opts;
  opts.restarts = 16;
  const auto one = find_critical(ball, 1, {1.0}, opts);
  double far = one.raw.empty() ? INFINITY : 0.0;
  for (const auto& r : one.raw) far = std::max(far, r.points[0].norm());
  c.check(one.raw.size() == 16 && far <= 1e-8,
          "k=1: " + std::to_string(one.raw.size()) + "/16 restarts converged, max |x*| " + fmt(far) + " <= 1e-8");

  // Reduced equation for ±t e₁ with weights (1,-1), solved by bisection.
  const auto dH = [](double t) {
    const double a = 1.0 - t * t, b = 1.0 + t * t;
    return -4.0 * t / (a * a) + 1.0 / (t * t) - 4.0 * t / (b * b);
  };
  double lo = 0.05, hi = 0.95;
  for (int i = 0; i < 200; ++i) (dH(0.5 * (lo + hi)) > 0.0 ? lo : hi) = 0.5 * (lo + hi);
  const double t_star = 0.5 * (lo + hi);
  const auto two = find_critical(ball, 2, {1.0, -1.0}, opts);
  double best = INFINITY;
  for (const auto& cp : two.critical) {
    const auto& p = cp.configuration.points;
    if ((p[0] + p[1]).norm() <= 1e-8) best = std::min(best, std::abs(p[0].norm() - t_star));
  }
  c.check(best <= 1e-6, "k=2 symmetric pair vs reduced oracle t*=" + fmt(t_star) + ": |t - t*| = " + fmt(best));
}

struct PdeMeasurements {
  double residual = 0.0;
  int centers = 0;
  double radius = 0.0;
  double mass = 0.0;
  double remainder = 0.0;
  double profile_error = 0.0;
  double quantization = 0.0;
};

PdeMeasurements measure(const SolveResult& r, const RadialProfile& pr, const DomainKerneld& ball) {
  PdeMeasurements m;
  m.residual = r.residual;
  const SpikeReport rep = extract_spikes(r.field, pr.config.p, 0.1, pr.R0);
  m.centers = static_cast<int>(rep.centers.size());
  m.mass = rep.mass;
  if (!rep.components.empty()) m.radius = rep.components[0].bounding_radius;
  if (rep.centers.empty()) return m;
  m.remainder = farfield_remainder(r.field, rep, pr, ball, 0.3).ratio();
  m.profile_error = local_profile_error(r.field, rep.centers[0], pr, 2.0 * pr.R0);
  const double integral = rep.mass / std::pow(r.field.mu, 1.5);
  m.quantization = quantization_ratio(recover_plasma_state(r.field.mu, integral, pr.config), pr.config);
  return m;
}

void pde_pipeline(Criterion& c) {
  const auto pr = shoot(make_config(3, 2.0));
  const auto ball = unit_ball_kernel(pr.config);
  const auto grid = build_grid(129);
  const auto run = continue_in_mu(grid, {Pointd::Zero(3)}, pr, {1e3, 1e4});
  c.check(run.ok(), "seeded solve at mu=1e3 continued to mu=1e4 converged");
  if (run.steps.size() < 2) return;
  const auto lo = measure(run.steps[0], pr, ball);
  const auto hi = measure(run.steps[1], pr, ball);
  const double h = grid->h();
  const double epsR0 = run.steps[1].field.epsilon * pr.R0;
  const double M = pr.M_p0;
  const double peak = glue_w0(pr).peak();
  c.check(hi.residual <= 1e-10, "residual " + fmt(hi.residual) + " <= 1e-10");
  c.check(hi.centers == 1, "spikes detected: " + std::to_string(hi.centers));
  c.check(std::abs(hi.radius - epsR0) <= h,
          "plasma radius " + fmt(hi.radius) + " vs eps*R0 " + fmt(epsR0) + " within one cell " + fmt(h));
  c.check(std::abs(hi.mass - M) <= 0.1 * M, "mass " + fmt(hi.mass) + " within 10% of M_p0 " + fmt(M));
  c.check(hi.remainder <= 0.1, "far-field remainder ratio at r=0.3: " + fmt(hi.remainder) + " <= 0.1");
  c.check(hi.remainder < lo.remainder, "remainder ratio decreases from mu=1e3 (" + fmt(lo.remainder) + ")");
  c.check(hi.profile_error <= 0.05 * peak,
          "local profile error " + fmt(hi.profile_error) + " <= 5% of w0(0) = " + fmt(0.05 * peak));
  c.check(hi.profile_error < lo.profile_error, "profile error decreases from mu=1e3 (" + fmt(lo.profile_error) + ")");
  c.check(std::abs(hi.quantization - M) <= 0.1 * M, "quantization ratio " + fmt(hi.quantization) + " within 10% of M_p0");
}

void pohozaev_algebra(Criterion& c) {
  const auto cfg = make_config(3, 2.0);
  const double M = shoot(cfg).M_p0;
  const int N = cfg.N;
  const double scale = M * M * cfg.C_N * cfg.C_N * (N - 2) * cfg.sphere_area();
  const Pointd z1 = Pointd::Zero(3), z2 = make_point({0.6, -0.3, 0.2});
  const Pointd dF1 = (2.0 - N) * (z1 - z2) / std::pow((z1 - z2).norm(), N);

  const auto grad_u = fundamental_sum_gradient(cfg, {{z1, M}, {z2, M}});
  const Pointd rec = pohozaev_surface(grad_u, z1, 0.05, 32) / scale;
  const double err = (rec - dF1).norm() / dF1.norm();
  c.check(err <= 0.02, "two-point sum recovers grad F_1(z_1) at r=0.05: relative error " + fmt(err) + " <= 0.02");

  const auto single = fundamental_sum_gradient(cfg, {{z1, M}});
  const double zero = pohozaev_surface(single, z1, 0.05, 32).norm() / scale;
  c.check(zero <= 1e-10, "single point integral / scale " + fmt(zero) + " <= 1e-10");

  const auto grad_F = fundamental_sum_gradient(cfg, {{z2, M}});
  const std::vector<double> radii{0.2, 0.1, 0.05};
  std::vector<double> quad;
  for (double r : radii) quad.push_back(pohozaev_split(N, M * cfg.C_N, z1, grad_F, r, 32).quadratic_magnitude);
  for (std::size_t i = 1; i < radii.size(); ++i) {
    const double slope = std::log(quad[i] / quad[i - 1]) / std::log(radii[i] / radii[i - 1]);
    c.check(std::abs(slope - (N - 1)) <= 0.3, "remainder slope on [" + fmt(radii[i]) + ", " + fmt(radii[i - 1]) +
                                                  "]: " + fmt(slope) + " within 0.3 of " + std::to_string(N - 1));
  }

  const Pointd z = make_point({0.2, -0.1, -1.0});
  const Pointd zt = reflect(z);
  const Pointd expected = (N - 2.0) * (z - zt) / std::pow((z - zt).norm(), N);
  const auto grad_b = green_sum_gradient(half_space_kernel(cfg), {{z, M}});
  const double berr = (pohozaev_surface(grad_b, z, 0.05, 32) / scale - expected).norm() / expected.norm();
  c.check(berr <= 0.02, "boundary variant with reflection term: relative error " + fmt(berr) + " <= 0.02");
}

}  // namespace

int main() {
  run(1, "radial construction", 10.0, radial_construction);
  run(2, "Green kernels", 5.0, green_kernels);
  run(3, "half-space convergence", 10.0, halfspace_limit);
  run(4, "balance certificates", 120.0, balance);
  run(5, "Kirchhoff-Routh", 30.0, kirchhoff_routh);
  run(6, "PDE pipeline (N=3, p=2, resolution 129)", 600.0, pde_pipeline);
  run(7, "Pohozaev surface algebra", 10.0, pohozaev_algebra);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << "\n";
  return failures == 0 ? 0 : 1;
}
