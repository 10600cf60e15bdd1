#include "plasma_spike/sphere_quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace plasma_spike {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    T(k, k - 1) = b;
    T(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * v0 * v0;
  }
  return rule;
}

namespace {

SphereRule circle(int order) {
  SphereRule r;
  r.N = 2;
  r.order = order;
  const int m = 2 * order;
  for (int i = 0; i < m; ++i) {
    const double phi = 2.0 * std::numbers::pi * (i + 0.5) / m;
    r.nodes.push_back(make_point({std::cos(phi), std::sin(phi)}));
    r.weights.push_back(2.0 * std::numbers::pi / m);
  }
  return r;
}

}  // namespace

SphereRule sphere_rule(int N, int order) {
  if (N < 2) throw std::invalid_argument("sphere rule needs N >= 2");
  if (order < kMinSphereOrder || order > kMaxSphereOrder) {
    throw std::invalid_argument("unsupported quadrature order " + std::to_string(order) + "; use 4.." +
                                std::to_string(kMaxSphereOrder));
  }
  if (N == 2) return circle(order);
  const SphereRule sub = sphere_rule(N - 1, order);
  const GaussRule gl = gauss_legendre(order);
  SphereRule r;
  r.N = N;
  r.order = order;
  for (int i = 0; i < order; ++i) {
    // S²: integrate in t = cos θ directly. Higher spheres: in the angle ψ with
    // weight sin^{N-2}ψ.
    double c, s, w;
    if (N == 3) {
      c = gl.nodes[i];
      s = std::sqrt(1.0 - c * c);
      w = gl.weights[i];
    } else {
      const double psi = 0.5 * std::numbers::pi * (gl.nodes[i] + 1.0);
      c = std::cos(psi);
      s = std::sin(psi);
      w = 0.5 * std::numbers::pi * gl.weights[i] * std::pow(s, N - 2);
    }
    for (std::size_t j = 0; j < sub.nodes.size(); ++j) {
      Pointd x(N);
      x(N - 1) = c;
      x.head(N - 1) = s * sub.nodes[j];
      r.nodes.push_back(std::move(x));
      r.weights.push_back(w * sub.weights[j]);
    }
  }
  return r;
}

}  // namespace plasma_spike
