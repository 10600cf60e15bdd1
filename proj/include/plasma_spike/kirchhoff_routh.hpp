#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plasma_spike/green_kernels.hpp"

namespace plasma_spike {

/// k interior points with nonzero weights on which the Kirchhoff-Routh
/// Hamiltonian Σ kᵢ² H(xᵢ,xᵢ) + Σ_{i≠j} kᵢkⱼ G(xᵢ,xⱼ) is evaluated.
template <typename Scalar>
struct SpikeConfiguration {
  PointList<Scalar> points;
  std::vector<Scalar> weights;
  DomainKernel<Scalar> kernel;

  std::size_t size() const { return points.size(); }

  void validate() const {
    if (points.empty()) throw std::invalid_argument("configuration has no points");
    if (points.size() != weights.size()) throw std::invalid_argument("points and weights differ in length");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != kernel.N) throw std::invalid_argument("point has the wrong dimension");
      if (!kernel.contains_open(points[i])) throw std::invalid_argument("point " + std::to_string(i) + " not interior");
      if (weights[i] == Scalar(0)) throw std::invalid_argument("weights must be nonzero");
      for (std::size_t j = 0; j < i; ++j) {
        if ((points[i] - points[j]).norm() <= detail::coincidence_threshold<Scalar>()) {
          throw std::invalid_argument("coincident points in configuration");
        }
      }
    }
  }
};

using SpikeConfigurationd = SpikeConfiguration<double>;

template <typename Scalar>
Scalar hamiltonian(const SpikeConfiguration<Scalar>& c) {
  c.validate();
  Scalar total(0);
  const std::size_t k = c.size();
  for (std::size_t i = 0; i < k; ++i) {
    total += c.weights[i] * c.weights[i] * robin(c.kernel, c.points[i], c.points[i]);
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) total += c.weights[i] * c.weights[j] * green(c.kernel, c.points[i], c.points[j]);
    }
  }
  return total;
}

/// Gradient with respect to each point:
/// ∂_{x_m} = 2k_m² ∇ₓH(x_m,x_m) + 2 Σ_{j≠m} k_m k_j ∇ₓG(x_m,x_j).
template <typename Scalar>
PointList<Scalar> hamiltonian_grad(const SpikeConfiguration<Scalar>& c) {
  c.validate();
  const std::size_t k = c.size();
  PointList<Scalar> grad(k);
  for (std::size_t m = 0; m < k; ++m) {
    Point<Scalar> g = Scalar(2) * c.weights[m] * c.weights[m] * robin_grad_x(c.kernel, c.points[m], c.points[m]);
    for (std::size_t j = 0; j < k; ++j) {
      if (j != m) g += Scalar(2) * c.weights[m] * c.weights[j] * green_grad_x(c.kernel, c.points[m], c.points[j]);
    }
    grad[m] = g;
  }
  return grad;
}

template <typename Scalar>
Scalar max_abs_component(const PointList<Scalar>& v) {
  Scalar m(0);
  for (const auto& x : v) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

struct CriticalSearchOptions {
  int restarts = 16;
  double tol = 1e-9;
  int max_iterations = 200;
  double init_shrink = 0.8;    ///< restarts drawn from the 0.8-scaled domain
  double escape_radius = 1e3;  ///< unbounded domains: leaving this ball counts as escape
  double dedup_tol = 1e-6;
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0: global cap
};

struct CriticalPoint {
  SpikeConfigurationd configuration;
  double grad_norm = 0.0;  ///< ‖∇ℋ‖∞
  double value = 0.0;
  int hits = 0;  ///< restarts that converged to this class
};

enum class RestartOutcome { Converged, Escaped, Stalled, MaxIterations };

struct CriticalSearchResult {
  std::vector<CriticalPoint> critical;
  std::vector<RestartOutcome> outcomes;
  std::vector<SpikeConfigurationd> raw;  ///< per converged restart, before dedup
  std::string diagnostics;
};

/// Damped Newton on ∇ℋ = 0 from random restarts, deduplicated up to
/// permutation (and rotation for the ball).
CriticalSearchResult find_critical(const DomainKerneld& kernel, int k, const std::vector<double>& weights,
                                   const CriticalSearchOptions& opts = {});

/// Canonical representative used for deduplication: for the ball the point of
/// largest norm is rotated onto +e₁ (its weight class is kept), then points are
/// sorted lexicographically together with their weights.
SpikeConfigurationd canonicalize(const SpikeConfigurationd& c);

const char* to_string(RestartOutcome o);

void to_json(nlohmann::json& j, const CriticalPoint& c);
void to_json(nlohmann::json& j, const CriticalSearchResult& r);

}  // namespace plasma_spike
