#pragma once

#include <vector>

#include "plasma_spike/model_core.hpp"

namespace plasma_spike {

struct ShootingOptions {
  double step = 1e-5;          ///< fixed RK4 step
  double r_start = 1e-6;       ///< series start radius
  double bracket_lo = 1.0;
  double bracket_hi = 1e3;
  int max_bracket_expansions = 30;
  int stored_intervals = 10000;  ///< equispaced grid of stored_intervals+1 radii
};

/// Radial Lane-Emden ground state on the unit ball (u'' + (N-1)u'/r + uᵖ = 0,
/// u'(0) = 0, u(1) = 0) and the quantities of the glued spike profile.
struct RadialProfile {
  ProblemConfig config;
  double a_star = 0.0;          ///< u(0)
  std::vector<double> r;        ///< equispaced radii on [0, 1]
  std::vector<double> u;        ///< u(r); u.back() pinned to the Dirichlet value 0
  std::vector<double> du;       ///< u'(r)
  double uprime1 = 0.0;
  double R0 = 0.0;
  double M_p0 = 0.0;
  double boundary_residual = 0.0;  ///< |u(1; a_star)| from the shot itself
  double richardson_error = 0.0;   ///< |u'(1)_h - u'(1)_{h/2}| / 15
  double ode_residual = 0.0;       ///< max cell-averaged |(r^{N-1}u')' + r^{N-1}uᵖ| / (r^{N-1}a_starᵖ)

  double grid_step() const { return r[1] - r[0]; }
  /// Cubic Hermite interpolation of u on the stored grid, t in [0, 1].
  double u_at(double t) const;
  double du_at(double t) const;
};

/// Solution of the shooting ODE from the origin series for a given central value.
struct ShotResult {
  double u1 = 0.0;
  double du1 = 0.0;
};
ShotResult shoot_once(const ProblemConfig& config, double a, double step, double r_start);

/// Bisection on u(0) so that |u(1)| ≤ tol. Throws std::runtime_error if no
/// sign change is found within the expanded bracket.
RadialProfile shoot(const ProblemConfig& config, double tol = 1e-11, const ShootingOptions& opts = {});

/// The universal spike profile w₀: 1 + R₀^{2/(1-p)} u(s/R₀) for s ≤ R₀ and
/// (R₀/s)^{N-2} beyond.
class GluedProfile {
 public:
  explicit GluedProfile(const RadialProfile& profile);

  double operator()(double s) const { return value(s); }
  double value(double s) const;
  double derivative(double s) const;
  /// Left (inner branch) and right (tail) limits at R₀.
  double inner_value_at_R0() const;
  double inner_slope_at_R0() const;
  double tail_slope_at_R0() const;
  double peak() const { return value(0.0); }
  double R0() const { return R0_; }

 private:
  const RadialProfile* profile_;
  double R0_;
  double amplitude_;  ///< R₀^{2/(1-p)}
  int N_;
};

GluedProfile glue_w0(const RadialProfile& profile);

/// |S^{N-1}| ∫₀^{R₀} [w₀-1]₊ᵖ s^{N-1} ds by composite Simpson on the stored grid.
double compute_mass(const RadialProfile& profile);

/// N(N-2)ω_N R₀^{N-2}, the flux of the harmonic tail through ∂B_{R₀}.
double mass_closed_form(const ProblemConfig& config, double R0);

/// Normalized defect in (N/(p+1) - (N-2)/2)∫u^{p+1} = ½|S^{N-1}|u'(1)².
/// `stride` > 1 integrates on a sub-sampled grid.
double radial_pohozaev_residual(const RadialProfile& profile, int stride = 1);

}  // namespace plasma_spike
