#pragma once

#include <cmath>
#include <random>

#include "plasma_spike/green_kernels.hpp"

namespace plasma_spike {

using Rng = std::mt19937_64;

inline Pointd random_unit_vector(int N, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Pointd v(N);
  do {
    for (int i = 0; i < N; ++i) v(i) = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// Uniform in the ball of radius `radius`.
inline Pointd random_in_ball(int N, double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return radius * std::pow(u(rng), 1.0 / N) * random_unit_vector(N, rng);
}

/// Interior sample of a base domain, drawn from the `shrink`-scaled domain;
/// for the half-space that is the box [-shrink, shrink]^{N-1} × (-shrink, 0).
inline Pointd random_interior(const DomainKerneld& k, double shrink, Rng& rng) {
  if (k.base == DomainKind::UnitBall) {
    Pointd x;
    do {
      x = random_in_ball(k.N, shrink, rng);
    } while (!k.contains_open(k.to_base(x)));
    return x;
  }
  std::uniform_real_distribution<double> u(-shrink, shrink);
  std::uniform_real_distribution<double> depth(1e-3, shrink);
  Pointd x(k.N);
  for (int i = 0; i + 1 < k.N; ++i) x(i) = u(rng);
  x(k.N - 1) = -depth(rng);
  return x;
}

}  // namespace plasma_spike
