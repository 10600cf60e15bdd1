#include "plasma_spike/radial_profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plasma_spike {
namespace {

struct State {
  double u;
  double du;
};

inline double positive_power(double u, double p) { return u > 0.0 ? std::pow(u, p) : 0.0; }

inline State rhs(const State& s, double r, int N, double p) {
  return {s.du, -(N - 1) * s.du / r - positive_power(s.u, p)};
}

inline State rk4_step(const State& s, double r, double h, int N, double p) {
  const State k1 = rhs(s, r, N, p);
  const State k2 = rhs({s.u + 0.5 * h * k1.u, s.du + 0.5 * h * k1.du}, r + 0.5 * h, N, p);
  const State k3 = rhs({s.u + 0.5 * h * k2.u, s.du + 0.5 * h * k2.du}, r + 0.5 * h, N, p);
  const State k4 = rhs({s.u + h * k3.u, s.du + h * k3.du}, r + h, N, p);
  return {s.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          s.du + h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du)};
}

// Series start at r_start, geometric sub-steps up to r = step (the (N-1)/r
// term is too stiff there for a full step), then fixed steps to r = 1.
// `sample(n, state)` is called after every fixed step n (r = n*step).
template <typename Sampler>
State integrate(const ProblemConfig& c, double a, double step, double r_start, Sampler&& sample) {
  const int N = c.N;
  const double p = c.p;
  const double ap = std::pow(a, p);
  State s{a - ap * r_start * r_start / (2.0 * N), -ap * r_start / N};

  constexpr int kRampSteps = 32;
  const double ratio = std::pow(step / r_start, 1.0 / kRampSteps);
  double r = r_start;
  for (int i = 0; i < kRampSteps; ++i) {
    const double r_next = (i + 1 == kRampSteps) ? step : r * ratio;
    s = rk4_step(s, r, r_next - r, N, p);
    r = r_next;
  }
  const long n_steps = std::lround(1.0 / step);
  sample(1L, s);
  for (long n = 1; n < n_steps; ++n) {
    s = rk4_step(s, n * step, step, N, p);
    sample(n + 1, s);
  }
  return s;
}

}  // namespace

ShotResult shoot_once(const ProblemConfig& config, double a, double step, double r_start) {
  if (!(step > 0.0) || !(r_start > 0.0) || r_start >= step) {
    throw std::invalid_argument("shoot_once needs 0 < r_start < step");
  }
  const State s = integrate(config, a, step, r_start, [](long, const State&) {});
  return {s.u, s.du};
}

RadialProfile shoot(const ProblemConfig& config, double tol, const ShootingOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("shooting tolerance must be positive");
  const long n_steps = std::lround(1.0 / opts.step);
  if (std::abs(n_steps * opts.step - 1.0) > 1e-12 || n_steps % opts.stored_intervals != 0) {
    throw std::invalid_argument("step must divide 1 and be a divisor of the stored grid spacing");
  }

  auto u1 = [&](double a) { return shoot_once(config, a, opts.step, opts.r_start).u1; };

  double lo = opts.bracket_lo;
  double hi = opts.bracket_hi;
  double f_lo = u1(lo);
  double f_hi = u1(hi);
  for (int i = 0; i < opts.max_bracket_expansions && f_lo <= 0.0; ++i) {
    lo /= 10.0;
    f_lo = u1(lo);
  }
  for (int i = 0; i < opts.max_bracket_expansions && f_hi >= 0.0; ++i) {
    hi *= 10.0;
    f_hi = u1(hi);
  }
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw std::runtime_error("could not bracket the shooting parameter: u(1) has no sign change in [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }

  double a_best = lo;
  double f_best = f_lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = u1(mid);
    if (std::abs(f_mid) < std::abs(f_best)) {
      a_best = mid;
      f_best = f_mid;
    }
    if (std::abs(f_mid) <= 1e-3 * tol) break;
    if (f_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(f_hi) < std::abs(f_best)) {
    a_best = hi;
    f_best = f_hi;
  }

  RadialProfile prof;
  prof.config = config;
  prof.a_star = a_best;
  const int M = opts.stored_intervals;
  const long stride = n_steps / M;
  prof.r.resize(M + 1);
  prof.u.resize(M + 1);
  prof.du.resize(M + 1);
  for (int i = 0; i <= M; ++i) prof.r[i] = static_cast<double>(i) / M;
  prof.u[0] = a_best;
  prof.du[0] = 0.0;
  const State end = integrate(config, a_best, opts.step, opts.r_start, [&](long n, const State& s) {
    if (n % stride == 0) {
      prof.u[n / stride] = s.u;
      prof.du[n / stride] = s.du;
    }
  });
  prof.boundary_residual = std::abs(end.u);
  if (prof.boundary_residual > tol) {
    throw std::runtime_error("shooting did not reach |u(1)| <= tol");
  }
  prof.u[M] = 0.0;
  prof.uprime1 = end.du;
  if (!(prof.uprime1 < 0.0)) throw std::runtime_error("shooting produced u'(1) >= 0");

  const ShotResult half = shoot_once(config, a_best, 0.5 * opts.step, 0.5 * opts.r_start);
  prof.richardson_error = std::abs(half.du1 - end.du) / 15.0;

  const int N = config.N;
  const double p = config.p;
  prof.R0 = std::pow(-prof.uprime1 / (N - 2), 0.5 * (p - 1.0));

  // Flux form per cell: [r^{N-1}u']_{r_i}^{r_{i+1}} + ∫ s^{N-1}uᵖ ds, with u cubic Hermite on the cell.
  const double dr = prof.grid_step();
  const double scale = std::pow(a_best, p);
  constexpr double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  constexpr double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                            0.2369268850561891};
  double worst = 0.0;
  for (int i = 0; i < M; ++i) {
    const double r0 = prof.r[i], r1 = prof.r[i + 1];
    double source = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double t = 0.5 * (gx[q] + 1.0);
      const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
      const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
      const double u = h00 * prof.u[i] + h10 * dr * prof.du[i] + h01 * prof.u[i + 1] + h11 * dr * prof.du[i + 1];
      const double s = r0 + t * dr;
      source += 0.5 * gw[q] * std::pow(s, N - 1) * positive_power(u, p);
    }
    source *= dr;
    const double flux = std::pow(r1, N - 1) * prof.du[i + 1] - std::pow(r0, N - 1) * prof.du[i];
    const double rm = std::pow(0.5 * (r0 + r1), N - 1);
    worst = std::max(worst, std::abs(flux + source) / (dr * rm));
  }
  prof.ode_residual = worst / scale;

  prof.M_p0 = compute_mass(prof);
  return prof;
}

double RadialProfile::u_at(double t) const {
  const int M = static_cast<int>(r.size()) - 1;
  const double dr = grid_step();
  t = std::clamp(t, 0.0, 1.0);
  const int i = std::min(static_cast<int>(t / dr), M - 1);
  const double s = (t - r[i]) / dr;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * u[i] + (s3 - 2 * s2 + s) * dr * du[i] + (-2 * s3 + 3 * s2) * u[i + 1] +
         (s3 - s2) * dr * du[i + 1];
}

double RadialProfile::du_at(double t) const {
  const int M = static_cast<int>(r.size()) - 1;
  const double dr = grid_step();
  t = std::clamp(t, 0.0, 1.0);
  const int i = std::min(static_cast<int>(t / dr), M - 1);
  const double s = (t - r[i]) / dr;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * u[i] + (-6 * s2 + 6 * s) * u[i + 1]) / dr + (3 * s2 - 4 * s + 1) * du[i] +
         (3 * s2 - 2 * s) * du[i + 1];
}

GluedProfile::GluedProfile(const RadialProfile& profile)
    : profile_(&profile),
      R0_(profile.R0),
      amplitude_(std::pow(profile.R0, 2.0 / (1.0 - profile.config.p))),
      N_(profile.config.N) {}

double GluedProfile::value(double s) const {
  s = std::abs(s);
  if (s <= R0_) return 1.0 + amplitude_ * profile_->u_at(s / R0_);
  return std::pow(R0_ / s, N_ - 2);
}

double GluedProfile::derivative(double s) const {
  s = std::abs(s);
  if (s <= R0_) return amplitude_ * profile_->du_at(s / R0_) / R0_;
  return -(N_ - 2) * std::pow(R0_, N_ - 2) / std::pow(s, N_ - 1);
}

double GluedProfile::inner_value_at_R0() const { return 1.0 + amplitude_ * profile_->u.back(); }
double GluedProfile::inner_slope_at_R0() const { return amplitude_ * profile_->uprime1 / R0_; }
double GluedProfile::tail_slope_at_R0() const { return -(N_ - 2) / R0_; }

GluedProfile glue_w0(const RadialProfile& profile) { return GluedProfile(profile); }

namespace {

// Composite Simpson on every `stride`-th stored node; the node count must
// leave an even number of intervals.
template <typename F>
double simpson(const RadialProfile& prof, int stride, F&& f) {
  const int M = static_cast<int>(prof.r.size()) - 1;
  if (stride < 1 || M % stride != 0 || (M / stride) % 2 != 0) {
    throw std::invalid_argument("Simpson stride must give an even number of intervals");
  }
  const int n = M / stride;
  const double h = prof.grid_step() * stride;
  double sum = f(0) + f(M);
  for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(k * stride);
  return sum * h / 3.0;
}

}  // namespace

double compute_mass(const RadialProfile& prof) {
  const ProblemConfig& c = prof.config;
  // Substituting s = R₀ t: [w₀-1]ᵖ = R₀^{2p/(1-p)} u(t)ᵖ and ds s^{N-1} = R₀^N t^{N-1} dt.
  const double integral = simpson(prof, 1, [&](int i) {
    return positive_power(prof.u[i], c.p) * std::pow(prof.r[i], c.N - 1);
  });
  const double factor = std::pow(prof.R0, 2.0 * c.p / (1.0 - c.p) + c.N);
  return c.sphere_area() * factor * integral;
}

double mass_closed_form(const ProblemConfig& config, double R0) {
  return config.N * (config.N - 2) * config.omega_N * std::pow(R0, config.N - 2);
}

double radial_pohozaev_residual(const RadialProfile& prof, int stride) {
  const ProblemConfig& c = prof.config;
  const double volume_integral = c.sphere_area() * simpson(prof, stride, [&](int i) {
    return positive_power(prof.u[i], c.p + 1.0) * std::pow(prof.r[i], c.N - 1);
  });
  const double lhs = (c.N / (c.p + 1.0) - 0.5 * (c.N - 2)) * volume_integral;
  const double rhs = 0.5 * c.sphere_area() * prof.uprime1 * prof.uprime1;
  return std::abs(lhs - rhs) / std::abs(lhs);
}

}  // namespace plasma_spike
