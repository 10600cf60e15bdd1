#pragma once

#include <cmath>
#include <stdexcept>

#include "plasma_spike/model_core.hpp"
#include "plasma_spike/types.hpp"

namespace plasma_spike {

enum class DomainKind { UnitBall, HalfSpace };

/// Dirichlet Green function data for the unit ball or the lower half-space
/// {x_N < 0}, optionally seen through the blow-up map x ↦ center + scale·x.
/// A rescaled kernel represents G_n(x,y) = scale^{N-2} G(center+scale·x, center+scale·y).
template <typename Scalar>
struct DomainKernel {
  DomainKind base = DomainKind::UnitBall;
  int N = 3;
  Scalar C_N = Scalar(0);
  Point<Scalar> center;
  Scalar scale = Scalar(1);
  bool is_rescaled = false;

  Point<Scalar> to_base(const Point<Scalar>& x) const {
    return is_rescaled ? Point<Scalar>(center + scale * x) : x;
  }

  /// Distance to the boundary of the (possibly rescaled) domain, negative outside.
  Scalar boundary_distance(const Point<Scalar>& x) const {
    const Point<Scalar> b = to_base(x);
    const Scalar d = base == DomainKind::UnitBall ? Scalar(1) - b.norm() : -b(N - 1);
    return d / scale;
  }

  bool contains_closed(const Point<Scalar>& x, Scalar slack = Scalar(1e-12)) const {
    return boundary_distance(x) >= -slack;
  }
  bool contains_open(const Point<Scalar>& x) const { return boundary_distance(x) > Scalar(0); }
};

using DomainKerneld = DomainKernel<double>;

template <typename Scalar = double>
DomainKernel<Scalar> unit_ball_kernel(const ProblemConfig& config) {
  DomainKernel<Scalar> k;
  k.base = DomainKind::UnitBall;
  k.N = config.N;
  k.C_N = Scalar(config.C_N);
  k.center = Point<Scalar>::Zero(config.N);
  return k;
}

template <typename Scalar = double>
DomainKernel<Scalar> half_space_kernel(const ProblemConfig& config) {
  DomainKernel<Scalar> k = unit_ball_kernel<Scalar>(config);
  k.base = DomainKind::HalfSpace;
  return k;
}

/// Kernel of the image domain (Ω - center)/scale. Rescaling a rescaled kernel composes the maps.
template <typename Scalar>
DomainKernel<Scalar> rescaled_kernel(const DomainKernel<Scalar>& base, const Point<Scalar>& center, Scalar scale) {
  if (!(scale > Scalar(0))) throw std::invalid_argument("rescaling factor must be positive");
  if (center.size() != base.N) throw std::invalid_argument("center has the wrong dimension");
  if (!base.contains_closed(center)) throw std::invalid_argument("rescaling center must lie in the base domain");
  DomainKernel<Scalar> k = base;
  k.center = base.to_base(center);
  k.scale = base.scale * scale;
  k.is_rescaled = true;
  return k;
}

/// Reflection ỹ = (y', -y_N) across {x_N = 0}.
template <typename Derived>
auto reflect(const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  Point<Scalar> r = y;
  r(r.size() - 1) = -r(r.size() - 1);
  return r;
}

/// C_N |x-y|^{2-N}.
template <typename Scalar>
Scalar fundamental(int N, Scalar C_N, const Point<Scalar>& x, const Point<Scalar>& y) {
  using std::pow;
  return C_N * pow((x - y).norm(), Scalar(2 - N));
}

/// ∇ₓ C_N |x-y|^{2-N} = -(N-2) C_N (x-y)/|x-y|^N.
template <typename Scalar>
Point<Scalar> fundamental_grad_x(int N, Scalar C_N, const Point<Scalar>& x, const Point<Scalar>& y) {
  using std::pow;
  const Point<Scalar> d = x - y;
  return (-(N - 2) * C_N / pow(d.norm(), Scalar(N))) * d;
}

namespace detail {

template <typename Scalar>
constexpr Scalar coincidence_threshold() {
  return Scalar(1e-10);
}

template <typename Scalar>
void require_in_domain(const DomainKernel<Scalar>& k, const Point<Scalar>& x, const char* what) {
  if (x.size() != k.N) throw std::invalid_argument(std::string(what) + ": point has the wrong dimension");
  if (!k.contains_closed(x)) throw std::invalid_argument(std::string(what) + ": point outside the closed domain");
}

// Regular part in base coordinates. For the ball
//   H(x,y) = -C_N (|x|²|y|² - 2x·y + 1)^{(2-N)/2},
// which is the Kelvin-image term written without dividing by |y|.
template <typename Scalar>
Scalar base_robin(const DomainKernel<Scalar>& k, const Point<Scalar>& x, const Point<Scalar>& y) {
  using std::pow;
  if (k.base == DomainKind::UnitBall) {
    const Scalar q = x.squaredNorm() * y.squaredNorm() - Scalar(2) * x.dot(y) + Scalar(1);
    return -k.C_N * pow(q, Scalar(2 - k.N) / Scalar(2));
  }
  return -k.C_N * pow((x - reflect(y)).norm(), Scalar(2 - k.N));
}

template <typename Scalar>
Point<Scalar> base_robin_grad_x(const DomainKernel<Scalar>& k, const Point<Scalar>& x, const Point<Scalar>& y) {
  using std::pow;
  if (k.base == DomainKind::UnitBall) {
    const Scalar q = x.squaredNorm() * y.squaredNorm() - Scalar(2) * x.dot(y) + Scalar(1);
    return ((k.N - 2) * k.C_N * pow(q, -Scalar(k.N) / Scalar(2))) * (y.squaredNorm() * x - y);
  }
  const Point<Scalar> d = x - reflect(y);
  return ((k.N - 2) * k.C_N / pow(d.norm(), Scalar(k.N))) * d;
}

}  // namespace detail

/// Regular part H(x,y) = G(x,y) - C_N|x-y|^{2-N}. The diagonal x = y is
/// finite in the open domain and rejected on the boundary.
template <typename Scalar>
Scalar robin(const DomainKernel<Scalar>& k, const Point<Scalar>& x, const Point<Scalar>& y) {
  using std::pow;
  detail::require_in_domain(k, x, "robin");
  detail::require_in_domain(k, y, "robin");
  if (!k.contains_open(x) && !k.contains_open(y) && (x - y).norm() < detail::coincidence_threshold<Scalar>()) {
    throw std::invalid_argument("robin: the Robin function diverges at x = y on the boundary");
  }
  const Scalar factor = pow(k.scale, Scalar(k.N - 2));
  return factor * detail::base_robin(k, k.to_base(x), k.to_base(y));
}

template <typename Scalar>
Point<Scalar> robin_grad_x(const DomainKernel<Scalar>& k, const Point<Scalar>& x, const Point<Scalar>& y) {
  using std::pow;
  detail::require_in_domain(k, x, "robin_grad_x");
  detail::require_in_domain(k, y, "robin_grad_x");
  if (!k.contains_open(x) && !k.contains_open(y) && (x - y).norm() < detail::coincidence_threshold<Scalar>()) {
    throw std::invalid_argument("robin_grad_x: the Robin function diverges at x = y on the boundary");
  }
  const Scalar factor = pow(k.scale, Scalar(k.N - 1));
  return factor * detail::base_robin_grad_x(k, k.to_base(x), k.to_base(y));
}

/// Robin function on the diagonal, H(x,x).
template <typename Scalar>
Scalar robin_diagonal(const DomainKernel<Scalar>& k, const Point<Scalar>& x) {
  if (!k.contains_open(x)) throw std::invalid_argument("robin_diagonal: point must be interior");
  return robin(k, x, x);
}

/// ∇ of x ↦ H(x,x); by symmetry of H this is 2 ∇ₓH(x,y)|_{y=x}.
template <typename Scalar>
Point<Scalar> robin_diagonal_grad(const DomainKernel<Scalar>& k, const Point<Scalar>& x) {
  if (!k.contains_open(x)) throw std::invalid_argument("robin_diagonal_grad: point must be interior");
  return Scalar(2) * robin_grad_x(k, x, x);
}

/// Dirichlet Green function, -Δₓ G(·,y) = δ_y, G = 0 on the boundary.
template <typename Scalar>
Scalar green(const DomainKernel<Scalar>& k, const Point<Scalar>& x, const Point<Scalar>& y) {
  detail::require_in_domain(k, x, "green");
  detail::require_in_domain(k, y, "green");
  if ((x - y).norm() < detail::coincidence_threshold<Scalar>()) {
    throw std::invalid_argument("green: coincident points");
  }
  return fundamental(k.N, k.C_N, x, y) + robin(k, x, y);
}

template <typename Scalar>
Point<Scalar> green_grad_x(const DomainKernel<Scalar>& k, const Point<Scalar>& x, const Point<Scalar>& y) {
  detail::require_in_domain(k, x, "green_grad_x");
  detail::require_in_domain(k, y, "green_grad_x");
  if ((x - y).norm() < detail::coincidence_threshold<Scalar>()) {
    throw std::invalid_argument("green_grad_x: coincident points");
  }
  return fundamental_grad_x(k.N, k.C_N, x, y) + robin_grad_x(k, x, y);
}

}  // namespace plasma_spike
