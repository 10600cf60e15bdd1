#pragma once

#include <vector>

#include "plasma_spike/types.hpp"

namespace plasma_spike {

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

/// Product rule on the unit sphere S^{N-1}: Gauss-Legendre in each polar
/// angle and 2·order equispaced azimuths. Weights sum to |S^{N-1}|.
struct SphereRule {
  int N = 3;
  int order = 0;
  PointListd nodes;
  std::vector<double> weights;
};

constexpr int kMinSphereOrder = 4;
constexpr int kMaxSphereOrder = 256;

/// Throws std::invalid_argument for N < 2 or order outside [4, 256].
SphereRule sphere_rule(int N, int order);

}  // namespace plasma_spike
