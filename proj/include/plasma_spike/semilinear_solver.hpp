#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "plasma_spike/ball_grid.hpp"
#include "plasma_spike/radial_profile.hpp"

namespace plasma_spike {

/// Nodal values of v on the whole cube; nodes on or outside the sphere hold 0.
struct GridField {
  std::shared_ptr<const BallGrid> grid;
  Eigen::VectorXd values;
  double mu = 0.0;
  double epsilon = 0.0;  ///< mu^{-1/2}

  double h() const { return grid->h(); }
  double at(int i, int j, int k) const;
  /// Trilinear interpolation; 0 outside the cube.
  double interpolate(const Pointd& x) const;
  /// Central differences of the interpolant with step h.
  Pointd gradient(const Pointd& x) const;
  double max_value() const { return values.maxCoeff(); }
  double min_value() const { return values.minCoeff(); }
};

GridField zero_field(std::shared_ptr<const BallGrid> grid, double mu);

/// Largest μ for which the spike diameter 2εR₀ spans at least three cells.
double max_resolvable_mu(const BallGrid& grid, const RadialProfile& profile);

/// Samples Σᵢ w₀(|x - cᵢ|/ε) at interior nodes.
GridField seed_spike(std::shared_ptr<const BallGrid> grid, const PointListd& centers, const RadialProfile& profile,
                     double mu);
GridField seed_spike(std::shared_ptr<const BallGrid> grid, const Pointd& center, const RadialProfile& profile,
                     double mu);

enum class SolveOutcome { Converged, Vanishing, Diverged, MaxIterations };
std::string to_string(SolveOutcome outcome);

struct SolveOptions {
  double tol = 1e-10;          ///< on ‖F(v)‖∞
  int max_iterations = 60;
  double linear_tol = 1e-12;   ///< floor of the relative MINRES tolerance
  double max_forcing = 1e-2;   ///< cap of the Eisenstat-Walker forcing term
  int max_linear_iterations = 4000;
  double armijo = 1e-4;
  int max_backtracks = 30;
};

struct SolveResult {
  GridField field;
  SolveOutcome outcome = SolveOutcome::MaxIterations;
  int iterations = 0;
  int linear_iterations = 0;
  double residual = 0.0;  ///< ‖F(v)‖∞ at exit
  std::vector<double> residual_history;
  std::vector<double> step_lengths;
  double min_value = 0.0;
  bool nonnegative = true;  ///< min v ≥ -10h²
  std::string message;
};

/// F(v) = -Δ_h v - μ[v-1]₊ᵖ on the unknowns.
Eigen::VectorXd semilinear_residual(const GridField& field, double p);

/// Damped Newton with Armijo backtracking on ‖F‖₂²; each step solves the
/// symmetric indefinite Jacobian system by preconditioned MINRES.
SolveResult solve_semilinear(const GridField& initial, double p, const SolveOptions& opts = {});

/// dv/dμ along the solution branch: J⁻¹[v-1]₊ᵖ, returned on the full cube.
Eigen::VectorXd branch_tangent(const GridField& field, double p, const SolveOptions& opts = {});

enum class Predictor {
  Rescale,  ///< resample the previous field about its nearest center by ε_new/ε_old
  Tangent   ///< first-order step along dv/dμ
};

struct ContinuationOptions {
  SolveOptions solve;
  Predictor predictor = Predictor::Tangent;
  int max_subdivisions = 6;  ///< halvings of a failed log-μ step before giving up
};

struct ContinuationResult {
  std::vector<SolveResult> steps;  ///< one per requested μ
  std::vector<double> visited_mu;  ///< every μ solved, including inserted sub-steps
  std::optional<double> failed_mu;
  bool ok() const { return !failed_mu.has_value(); }
};

/// Warm-started solves along an increasing μ sequence starting from a seed at
/// the first entry. A step whose Newton iteration fails is retried from the
/// last converged field through geometric sub-steps.
ContinuationResult continue_in_mu(std::shared_ptr<const BallGrid> grid, const PointListd& centers,
                                  const RadialProfile& profile, const std::vector<double>& mu_sequence,
                                  const ContinuationOptions& opts = {});

/// Largest μ at which the seeded spike radius εR₀ spans six cells.
double comfortable_seed_mu(const BallGrid& grid, const RadialProfile& profile);

/// Seeds at min(mu, comfortable_seed_mu) and continues geometrically to mu.
ContinuationResult solve_seeded(std::shared_ptr<const BallGrid> grid, const PointListd& centers,
                                const RadialProfile& profile, double mu, const ContinuationOptions& opts = {});

/// Spike data of a field.
struct PlasmaComponent {
  int node_count = 0;
  int center_index = -1;         ///< nearest detected center, -1 if none
  double bounding_radius = 0.0;  ///< max distance from that center to the interpolated level set v = 1
  double mass = 0.0;             ///< μ^{N/2}Σ[v-1]₊ᵖ over the component
  bool contained = true;         ///< bounding_radius ≤ 2εR₀ + h (only checked when R₀ is given)
};

struct SpikeReport {
  double sigma = 0.1;
  PointListd centers;  ///< sub-grid refined maxima
  std::vector<int> center_nodes;
  std::vector<double> heights;  ///< nodal maxima
  std::vector<PlasmaComponent> components;
  double mass = 0.0;
  bool containment_ok = true;
};

/// Local maxima above 1+σ (27-neighborhood), plasma components by 6-connected
/// flood fill of {v > 1}, and the scaled plasma mass. R₀ > 0 enables the
/// containment check.
SpikeReport extract_spikes(const GridField& field, double p, double sigma = 0.1, double R0 = 0.0);

void to_json(nlohmann::json& j, const SolveResult& r);
void to_json(nlohmann::json& j, const SpikeReport& r);

}  // namespace plasma_spike
