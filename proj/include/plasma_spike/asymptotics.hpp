#pragma once

#include <functional>

#include <nlohmann/json.hpp>

#include "plasma_spike/green_kernels.hpp"
#include "plasma_spike/radial_profile.hpp"
#include "plasma_spike/semilinear_solver.hpp"
#include "plasma_spike/sphere_quadrature.hpp"

namespace plasma_spike {

using GradientField = std::function<Pointd(const Pointd&)>;

struct PointSource {
  Pointd z;
  double weight = 1.0;
};

/// ∇ of Σ wᵢ C_N|x - zᵢ|^{2-N}.
GradientField fundamental_sum_gradient(const ProblemConfig& config, std::vector<PointSource> sources);
/// ∇ of Σ wᵢ G(x, zᵢ) for a domain kernel.
GradientField green_sum_gradient(const DomainKernel<double>& kernel, std::vector<PointSource> sources);
/// Central differences of the trilinear interpolant with step h.
GradientField field_gradient(const GridField& field);

/// ∮_{∂B_r(c)} [-(∂_ν u)∇u + ½|∇u|²ν] dσ from the gradient of u.
Pointd pohozaev_surface(const GradientField& grad, const Pointd& center, double r, int order);

/// Mean of a vector field over ∂B_r(c).
Pointd sphere_mean(const GradientField& field, const Pointd& center, double r, int order);

/// Splitting u = a·|x - c|^{2-N} + F near c. `total` is the surface integral
/// of u, `leading` is a(N-2)|S^{N-1}|∇F(c), `quadratic` the signed integral of
/// the F-F part and `quadratic_magnitude` the integral of its pointwise norm.
struct PohozaevSplit {
  Pointd total;
  Pointd leading;
  Pointd quadratic;
  double quadratic_magnitude = 0.0;
  double r = 0.0;
};
PohozaevSplit pohozaev_split(int N, double a, const Pointd& center, const GradientField& grad_F, double r, int order);

/// Far-field comparison of ε^{2-N}v with Σ M_{p,0}G(x, zᵢ) outside ∪B_r(zᵢ).
struct RemainderReport {
  double r = 0.0;
  double R = 1.0;
  int nodes = 0;
  double sup_remainder = 0.0;
  double sup_grad_remainder = 0.0;
  double leading_scale = 0.0;
  double leading_grad_scale = 0.0;
  double ratio() const { return leading_scale > 0 ? sup_remainder / leading_scale : 0.0; }
  double grad_ratio() const { return leading_grad_scale > 0 ? sup_grad_remainder / leading_grad_scale : 0.0; }
};

/// Throws std::invalid_argument when r < 2εR₀, r < 3h or no spike was detected.
RemainderReport farfield_remainder(const GridField& field, const SpikeReport& report, const RadialProfile& profile,
                                   const DomainKernel<double>& kernel, double r);

/// C⁰ distance between v(c + εy) and w₀(|y|) on |y| ≤ R: through trilinear
/// interpolation on a lattice of spacing R/16, and at the grid nodes themselves.
struct ProfileErrorReport {
  double R = 0.0;
  double interpolated = 0.0;
  double nodal = 0.0;
  double peak = 0.0;  ///< w₀(0)
};
/// Throws std::invalid_argument when εR < 3h.
ProfileErrorReport profile_error(const GridField& field, const Pointd& center, const RadialProfile& profile, double R);
double local_profile_error(const GridField& field, const Pointd& center, const RadialProfile& profile, double R);

struct MassQuantization {
  double measured = 0.0;
  double expected = 0.0;
  int Z = 0;
};
MassQuantization mass_quantization_check(const GridField& field, const SpikeReport& report,
                                         const RadialProfile& profile);

void to_json(nlohmann::json& j, const RemainderReport& r);
void to_json(nlohmann::json& j, const ProfileErrorReport& r);
void to_json(nlohmann::json& j, const MassQuantization& m);
void to_json(nlohmann::json& j, const PohozaevSplit& s);

}  // namespace plasma_spike
