#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "plasma_spike/green_kernels.hpp"

namespace plasma_spike {

/// Empirical constants in |H(x,y)| ≤ C₀/d(x)^{N-2}, |∇ₓH(x,y)| ≤ C₁/d(x)^{N-1}
/// over random interior pairs of the unit ball.
struct RobinBoundReport {
  int samples = 0;
  double C0 = 0.0;
  double C1 = 0.0;
  double C_N = 0.0;  ///< maximum-principle value of C₀ for the ball
  bool finite = false;
};

RobinBoundReport robin_boundary_bound_check(const DomainKerneld& kernel, int samples, std::uint64_t seed = 1);

/// sup over a fixed lattice of U_R = {|x| ≤ 2R, x_N < -1/2} of |H_n - H_-|, where
/// H_n is the Robin function of the unit ball blown up by d at the pole e_N.
struct HalfspaceConvergenceReport {
  std::vector<double> d;
  std::vector<double> error;
  int grid_points = 0;
  bool strictly_decreasing = false;
  double final_over_initial = 0.0;
  bool passed = false;  ///< strictly decreasing and final/initial ≤ 1/4
};

HalfspaceConvergenceReport halfspace_convergence_check(const ProblemConfig& config, std::span<const double> d_sequence,
                                                       double R = 2.0, int lattice = 21);

/// Same sup-error measurement for an arbitrary comparison kernel; passing the
/// half-space kernel itself gives identically zero.
double halfspace_sup_error(const DomainKerneld& candidate, const std::vector<Pointd>& test_points);

/// Lattice points of U_R that lie inside the blown-up ball for scale d_max.
std::vector<Pointd> halfspace_test_grid(int N, double R, int lattice, double d_max);

/// Per-invariant maximum residuals for the `greens` conformance report.
struct GreenConformance {
  DomainKind domain = DomainKind::UnitBall;
  int samples = 0;
  double dirichlet_max = 0.0;
  double symmetry_max = 0.0;
  double positivity_min = 0.0;
  double green_grad_rel_max = 0.0;
  double robin_grad_rel_max = 0.0;
  double harmonic_max = 0.0;       ///< max |Δ_h H| d² / |H|, d the boundary distance of x
  double rescaling_rel_max = 0.0;  ///< error relative to |fundamental| + |robin| at the base pair
};

GreenConformance green_conformance(const DomainKerneld& kernel, int samples, std::uint64_t seed = 1);

void to_json(nlohmann::json& j, const RobinBoundReport& r);
void to_json(nlohmann::json& j, const HalfspaceConvergenceReport& r);
void to_json(nlohmann::json& j, const GreenConformance& r);

}  // namespace plasma_spike
