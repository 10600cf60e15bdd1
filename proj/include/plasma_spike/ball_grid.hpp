#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "plasma_spike/types.hpp"

namespace plasma_spike {

using SparseMatrixd = Eigen::SparseMatrix<double>;

/// Cartesian discretization of the unit ball in R³ on the cube [-1,1]³ with
/// n nodes per axis. Unknowns are the nodes strictly inside the sphere; nodes
/// on or outside it carry the Dirichlet value 0.
///
/// Arms that leave the ball use the symmetric ghost-fluid form of the
/// Shortley-Weller stencil: the boundary crossing at fraction θ of the arm
/// contributes 1/θ to the diagonal and nothing off-diagonal, so -Δ_h is a
/// symmetric M-matrix.
class BallGrid {
 public:
  explicit BallGrid(int resolution);

  int n() const { return n_; }
  int half() const { return m_; }  ///< center index; h = 1/half
  double h() const { return h_; }
  std::size_t node_count() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  Eigen::Index unknown_count() const { return static_cast<Eigen::Index>(node_of_.size()); }

  /// Row-major node index, z fastest.
  int node(int i, int j, int k) const { return (i * n_ + j) * n_ + k; }
  std::array<int, 3> coords(int node) const { return {node / (n_ * n_), (node / n_) % n_, node % n_}; }
  Pointd position(int node) const;
  /// Grid coordinates (fractional node index) of a point.
  Eigen::Vector3d grid_coords(const Pointd& x) const;

  int unknown_of(int node) const { return unknown_[node]; }
  int node_of(int unknown) const { return node_of_[unknown]; }
  bool interior(int node) const { return unknown_[node] >= 0; }
  bool interior(int i, int j, int k) const;

  /// -Δ_h restricted to unknowns, symmetric positive definite.
  const SparseMatrixd& laplacian() const { return laplacian_; }
  /// h³ times the fraction of the node's cell inside the ball.
  const Eigen::VectorXd& cell_volume() const { return cell_volume_; }
  /// Arm fractions θ ∈ (0,1] per unknown and direction (±x, ±y, ±z); 1 for interior arms.
  const std::vector<std::array<double, 6>>& arm_fractions() const { return arm_fraction_; }

  Eigen::VectorXd gather(const Eigen::VectorXd& full) const;
  Eigen::VectorXd scatter(const Eigen::VectorXd& unknowns) const;

  /// Incomplete Cholesky of -Δ_h, computed on first use and shared.
  using Preconditioner = Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>;
  const Preconditioner& preconditioner() const;

 private:
  int n_;
  int m_;
  double h_;
  std::vector<int> unknown_;
  std::vector<int> node_of_;
  std::vector<std::array<double, 6>> arm_fraction_;
  SparseMatrixd laplacian_;
  Eigen::VectorXd cell_volume_;
  mutable std::once_flag precond_once_;
  mutable std::unique_ptr<Preconditioner> precond_;
};

/// Supported resolutions are 65, 97, 129 and 193.
std::shared_ptr<const BallGrid> build_grid(int resolution);

struct PoissonSolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves -Δ_h u = f (f given on unknowns) by preconditioned conjugate gradients.
Eigen::VectorXd solve_poisson(const BallGrid& grid, const Eigen::VectorXd& rhs, double tol = 1e-12,
                              PoissonSolveInfo* info = nullptr);

}  // namespace plasma_spike
