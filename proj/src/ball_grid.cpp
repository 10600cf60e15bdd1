#include "plasma_spike/ball_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace plasma_spike {
namespace {

constexpr std::array<std::array<int, 3>, 6> kDirections{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

}  // namespace

BallGrid::BallGrid(int resolution) : n_(resolution), m_((resolution - 1) / 2), h_(1.0 / m_) {
  const long m2 = static_cast<long>(m_) * m_;
  unknown_.assign(node_count(), -1);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      for (int k = 0; k < n_; ++k) {
        const long di = i - m_, dj = j - m_, dk = k - m_;
        if (di * di + dj * dj + dk * dk < m2) {
          unknown_[node(i, j, k)] = static_cast<int>(node_of_.size());
          node_of_.push_back(node(i, j, k));
        }
      }
    }
  }

  const Eigen::Index nu = unknown_count();
  const double inv_h2 = 1.0 / (h_ * h_);
  arm_fraction_.assign(nu, {1, 1, 1, 1, 1, 1});
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nu) * 7);
  for (Eigen::Index u = 0; u < nu; ++u) {
    const auto c = coords(node_of_[u]);
    const std::array<long, 3> d{c[0] - m_, c[1] - m_, c[2] - m_};
    const long S = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    double diag = 0.0;
    for (int dir = 0; dir < 6; ++dir) {
      const auto& e = kDirections[dir];
      const int nb = node(c[0] + e[0], c[1] + e[1], c[2] + e[2]);
      if (unknown_[nb] >= 0) {
        trip.emplace_back(static_cast<int>(u), unknown_[nb], -inv_h2);
        diag += inv_h2;
        continue;
      }
      const int axis = dir / 2;
      const long sign = e[axis];
      const long perp = S - d[axis] * d[axis];
      const double theta = std::sqrt(static_cast<double>(m2 - perp)) - static_cast<double>(sign * d[axis]);
      arm_fraction_[u][dir] = theta;
      diag += inv_h2 / theta;
    }
    trip.emplace_back(static_cast<int>(u), static_cast<int>(u), diag);
  }
  laplacian_.resize(nu, nu);
  laplacian_.setFromTriplets(trip.begin(), trip.end());
  laplacian_.makeCompressed();

  // Cell volumes: full h³ unless a corner of the cell lies outside the sphere,
  // in which case the inside fraction is sampled on an 8³ sub-lattice.
  cell_volume_.resize(nu);
  const double h3 = h_ * h_ * h_;
  constexpr int kSub = 8;
  for (Eigen::Index u = 0; u < nu; ++u) {
    const auto c = coords(node_of_[u]);
    const std::array<long, 3> d{c[0] - m_, c[1] - m_, c[2] - m_};
    bool full = true;
    for (int corner = 0; corner < 8 && full; ++corner) {
      long s = 0;
      for (int a = 0; a < 3; ++a) {
        const long twice = 2 * d[a] + (((corner >> a) & 1) ? 1 : -1);
        s += twice * twice;
      }
      full = s <= 4 * m2;
    }
    if (full) {
      cell_volume_(u) = h3;
      continue;
    }
    int inside = 0;
    for (int a = 0; a < kSub; ++a) {
      for (int b = 0; b < kSub; ++b) {
        for (int g = 0; g < kSub; ++g) {
          const double x = d[0] + (a + 0.5) / kSub - 0.5;
          const double y = d[1] + (b + 0.5) / kSub - 0.5;
          const double z = d[2] + (g + 0.5) / kSub - 0.5;
          if (x * x + y * y + z * z < static_cast<double>(m2)) ++inside;
        }
      }
    }
    cell_volume_(u) = h3 * inside / (kSub * kSub * kSub);
  }
}

Pointd BallGrid::position(int nd) const {
  const auto c = coords(nd);
  Pointd x(3);
  for (int a = 0; a < 3; ++a) x(a) = (c[a] - m_) * h_;
  return x;
}

Eigen::Vector3d BallGrid::grid_coords(const Pointd& x) const {
  return Eigen::Vector3d(x(0) / h_ + m_, x(1) / h_ + m_, x(2) / h_ + m_);
}

bool BallGrid::interior(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || i >= n_ || j >= n_ || k >= n_) return false;
  return unknown_[node(i, j, k)] >= 0;
}

Eigen::VectorXd BallGrid::gather(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(unknown_count());
  for (Eigen::Index u = 0; u < out.size(); ++u) out(u) = full(node_of_[u]);
  return out;
}

Eigen::VectorXd BallGrid::scatter(const Eigen::VectorXd& unknowns) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(node_count()));
  for (Eigen::Index u = 0; u < unknowns.size(); ++u) out(node_of_[u]) = unknowns(u);
  return out;
}

const BallGrid::Preconditioner& BallGrid::preconditioner() const {
  std::call_once(precond_once_, [this] {
    precond_ = std::make_unique<Preconditioner>();
    precond_->compute(laplacian_);
    if (precond_->info() != Eigen::Success) throw std::runtime_error("incomplete Cholesky of the Laplacian failed");
  });
  return *precond_;
}

std::shared_ptr<const BallGrid> build_grid(int resolution) {
  if (resolution != 65 && resolution != 97 && resolution != 129 && resolution != 193) {
    throw std::invalid_argument("unsupported resolution " + std::to_string(resolution) +
                                "; choose one of 65, 97, 129, 193");
  }
  return std::make_shared<const BallGrid>(resolution);
}

namespace {

// Adapts the grid's shared factorization to Eigen's preconditioner interface.
class SharedPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  void set(const BallGrid::Preconditioner* p) { p_ = p; }
  template <typename M>
  SharedPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  SharedPreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  SharedPreconditioner& compute(const M&) { return *this; }
  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& b) const { return p_->solve(b); }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  const BallGrid::Preconditioner* p_ = nullptr;
};

}  // namespace

Eigen::VectorXd solve_poisson(const BallGrid& grid, const Eigen::VectorXd& rhs, double tol, PoissonSolveInfo* info) {
  if (rhs.size() != grid.unknown_count()) throw std::invalid_argument("right-hand side has the wrong size");
  Eigen::ConjugateGradient<SparseMatrixd, Eigen::Lower | Eigen::Upper, SharedPreconditioner> cg;
  cg.preconditioner().set(&grid.preconditioner());
  cg.setTolerance(tol);
  cg.setMaxIterations(10000);
  cg.compute(grid.laplacian());
  Eigen::VectorXd u = cg.solve(rhs);
  if (info) {
    info->iterations = static_cast<int>(cg.iterations());
    info->relative_residual = cg.error();
  }
  return u;
}

}  // namespace plasma_spike
