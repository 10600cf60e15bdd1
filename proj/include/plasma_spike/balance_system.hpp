#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plasma_spike/green_kernels.hpp"

namespace plasma_spike {

enum class BalanceMode { Interior, Boundary };

/// Limit point configuration of a spike cluster. Interior mode lives in R^N;
/// boundary mode in the lower half-space with every (z_i)_N ≤ -1. The gauge
/// flag records the normalization z₁ = 0, |z₂| = 1.
template <typename Scalar>
struct BalanceConfig {
  PointList<Scalar> points;
  BalanceMode mode = BalanceMode::Interior;
  bool gauge = false;

  int dimension() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }

  void validate() const {
    using std::abs;
    if (points.empty()) throw std::invalid_argument("balance configuration has no points");
    const int N = dimension();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != N) throw std::invalid_argument("points differ in dimension");
      for (std::size_t j = 0; j < i; ++j) {
        if ((points[i] - points[j]).norm() == Scalar(0)) throw std::invalid_argument("coincident points");
      }
      if (mode == BalanceMode::Boundary) {
        if (!(points[i](N - 1) < Scalar(0))) throw std::invalid_argument("boundary-mode point touches the hyperplane");
        if (points[i](N - 1) > Scalar(-1)) throw std::invalid_argument("boundary-mode point has (z)_N > -1");
      }
    }
    if (gauge) {
      if (points.size() < 2) throw std::invalid_argument("gauge needs at least two points");
      if (points[0].norm() > Scalar(1e-12) || abs(points[1].norm() - Scalar(1)) > Scalar(1e-12)) {
        throw std::invalid_argument("gauge requires z1 = 0 and |z2| = 1");
      }
    }
  }
};

using BalanceConfigd = BalanceConfig<double>;

/// Fⱼ = Σ_{i≠j} (zᵢ - zⱼ)/|zᵢ - zⱼ|ᴺ.
template <typename Scalar>
PointList<Scalar> interior_residual(const BalanceConfig<Scalar>& c) {
  using std::pow;
  c.validate();
  if (c.mode != BalanceMode::Interior) throw std::invalid_argument("interior_residual needs interior mode");
  if (c.points.size() < 2) throw std::invalid_argument("interior_residual needs k >= 2");
  const int N = c.dimension();
  const std::size_t k = c.points.size();
  PointList<Scalar> F(k, Point<Scalar>::Zero(N));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = j + 1; i < k; ++i) {
      const Point<Scalar> d = c.points[i] - c.points[j];
      const Point<Scalar> pull = d / pow(d.norm(), Scalar(N));
      F[j] += pull;
      F[i] -= pull;
    }
  }
  return F;
}

/// (z̃ⱼ - zⱼ)/|z̃ⱼ - zⱼ|ᴺ + Σ_{i≠j} [(z̃ᵢ - zⱼ)/|z̃ᵢ - zⱼ|ᴺ - (zᵢ - zⱼ)/|zᵢ - zⱼ|ᴺ].
template <typename Scalar>
PointList<Scalar> boundary_residual(const BalanceConfig<Scalar>& c) {
  using std::pow;
  c.validate();
  if (c.mode != BalanceMode::Boundary) throw std::invalid_argument("boundary_residual needs boundary mode");
  const int N = c.dimension();
  const std::size_t k = c.points.size();
  PointList<Scalar> R(k, Point<Scalar>::Zero(N));
  for (std::size_t j = 0; j < k; ++j) {
    const Point<Scalar>& zj = c.points[j];
    for (std::size_t i = 0; i < k; ++i) {
      const Point<Scalar> di = reflect(c.points[i]) - zj;
      R[j] += di / pow(di.norm(), Scalar(N));
      if (i != j) {
        const Point<Scalar> d = c.points[i] - zj;
        R[j] -= d / pow(d.norm(), Scalar(N));
      }
    }
  }
  return R;
}

template <typename Scalar>
Scalar max_norm(const PointList<Scalar>& F) {
  Scalar m(0);
  for (const auto& f : F) m = std::max(m, f.norm());
  return m;
}

/// Per-configuration witness that the balance system has no solution: the
/// component along `direction` of the residual at `extremal_index` is at
/// least `lower_bound` > 0 in magnitude.
struct NonexistenceCertificate {
  Pointd direction;
  int extremal_index = -1;
  double lower_bound = 0.0;
  double max_residual = 0.0;  ///< max_j |F_j| recorded at issuance
};

/// Tie cushion for the extremal-coordinate comparison.
inline constexpr double kCertificateCushion = 1e-12;

NonexistenceCertificate certify_interior(const BalanceConfigd& c);
NonexistenceCertificate certify_boundary(const BalanceConfigd& c);

struct MinimizeOptions {
  int restarts = 64;
  int N = 3;
  std::uint64_t seed = 1;
  int pattern_iterations = 4000;
  int polish_iterations = 500;
  double escape_norm = 1e6;
  int threads = 0;
};

struct MinimizeResult {
  BalanceConfigd best_config;
  double best_value = 0.0;  ///< smallest max_j |F_j| found
  bool escaped = false;     ///< some restart pushed a point beyond escape_norm
  std::vector<double> restart_values;
};

/// Pattern search plus gradient polishing of max_j|F_j| over gauge-fixed
/// (interior) or constrained (boundary, (z_i)_N ≤ -1) configurations.
MinimizeResult minimize_residual(BalanceMode mode, int k, const MinimizeOptions& opts = {});

struct FuzzReport {
  int samples = 0;
  int violations = 0;   ///< bound > max_j |F_j| + 1e-12
  int nonpositive = 0;  ///< bound ≤ 0
  double min_bound = 0.0;
  double min_residual = 0.0;
};

/// Certificates on random configurations: interior samples are gauge fixed
/// (z₁ = 0, z₂ on the unit sphere, the rest in the radius-3 ball); boundary
/// samples have lateral coordinates in [-3, 3] and depth in [1, 4].
FuzzReport fuzz_certificates(BalanceMode mode, int k, int samples, std::uint64_t seed = 1, int N = 3);

void to_json(nlohmann::json& j, const NonexistenceCertificate& c);
void to_json(nlohmann::json& j, const FuzzReport& r);

}  // namespace plasma_spike
