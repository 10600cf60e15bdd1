#include "plasma_spike/balance_system.hpp"

#include <algorithm>
#include <limits>

#include "plasma_spike/parallel.hpp"
#include "plasma_spike/sampling.hpp"

namespace plasma_spike {

NonexistenceCertificate certify_interior(const BalanceConfigd& c) {
  const PointListd F = interior_residual(c);
  const int N = c.dimension();
  const std::size_t k = c.points.size();

  std::size_t a = 0, b = 1;
  double diameter = -1.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double d = (c.points[i] - c.points[j]).norm();
      if (d > diameter) {
        diameter = d;
        a = i;
        b = j;
      }
    }
  }
  NonexistenceCertificate cert;
  cert.direction = (c.points[a] - c.points[b]) / diameter;
  const Pointd& e = cert.direction;

  std::size_t j = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (c.points[i].dot(e) > c.points[j].dot(e)) j = i;
  }
  const double top = c.points[j].dot(e);
  double bound = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double proj = c.points[i].dot(e);
    if (i == j || !(proj < top - kCertificateCushion)) continue;
    const Pointd d = c.points[j] - c.points[i];
    bound += d.dot(e) / std::pow(d.norm(), N);
  }
  cert.extremal_index = static_cast<int>(j);
  cert.lower_bound = bound;
  cert.max_residual = max_norm(F);

  if (!(bound > 0.0)) throw std::logic_error("interior certificate has a non-positive bound");
  if (bound > std::abs(F[j].dot(e)) + kCertificateCushion || bound > cert.max_residual + kCertificateCushion) {
    throw std::logic_error("interior certificate exceeds the residual it bounds");
  }
  return cert;
}

NonexistenceCertificate certify_boundary(const BalanceConfigd& c) {
  const PointListd R = boundary_residual(c);
  const int N = c.dimension();
  const std::size_t k = c.points.size();

  // argmin of (z̃ᵢ)_N = -(zᵢ)_N, i.e. the shallowest point.
  std::size_t j = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (-c.points[i](N - 1) < -c.points[j](N - 1)) j = i;
  }
  const Pointd zj = c.points[j];
  const Pointd zj_ref = reflect(zj);

  NonexistenceCertificate cert;
  cert.direction = Pointd::Zero(N);
  cert.direction(N - 1) = 1.0;
  cert.extremal_index = static_cast<int>(j);
  cert.lower_bound = 2.0 * zj_ref(N - 1) / std::pow((zj_ref - zj).norm(), N);
  cert.max_residual = max_norm(R);

  if (!(cert.lower_bound > 0.0)) throw std::logic_error("boundary certificate has a non-positive bound");
  if (R[j](N - 1) < cert.lower_bound - kCertificateCushion || cert.lower_bound > cert.max_residual + kCertificateCushion) {
    throw std::logic_error("boundary certificate exceeds the residual it bounds");
  }
  return cert;
}

namespace {

using Vec = Eigen::VectorXd;

class Parametrization {
 public:
  Parametrization(BalanceMode mode, int k, int N) : mode_(mode), k_(k), N_(N) {}

  int size() const { return mode_ == BalanceMode::Interior ? (k_ - 1) * N_ : k_ * N_; }

  // Interior: θ = (u, z₃, …, z_k) with z₁ = 0 and z₂ = u/|u|.
  // Boundary: θ = (x'ᵢ, sᵢ) with zᵢ = (x'ᵢ, -1 - sᵢ²).
  BalanceConfigd decode(const Vec& theta) const {
    BalanceConfigd c;
    c.mode = mode_;
    if (mode_ == BalanceMode::Interior) {
      c.gauge = true;
      c.points.push_back(Pointd::Zero(N_));
      const Pointd u = theta.head(N_);
      const double n = u.norm();
      c.points.push_back(n > 1e-300 ? Pointd(u / n) : Pointd::Unit(N_, 0));
      for (int i = 2; i < k_; ++i) c.points.push_back(theta.segment((i - 1) * N_, N_));
    } else {
      for (int i = 0; i < k_; ++i) {
        Pointd z = theta.segment(i * N_, N_);
        const double s = z(N_ - 1);
        z(N_ - 1) = -1.0 - s * s;
        c.points.push_back(z);
      }
    }
    return c;
  }

  Vec random_start(Rng& rng) const {
    Vec theta(size());
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> s(0.0, 1.5);
    if (mode_ == BalanceMode::Interior) {
      theta.head(N_) = random_unit_vector(N_, rng);
      for (int i = 2; i < k_; ++i) theta.segment((i - 1) * N_, N_) = random_in_ball(N_, 2.0, rng);
    } else {
      for (int i = 0; i < k_; ++i) {
        for (int a = 0; a + 1 < N_; ++a) theta(i * N_ + a) = u(rng);
        theta(i * N_ + N_ - 1) = s(rng);
      }
    }
    return theta;
  }

  PointListd residual(const BalanceConfigd& c) const {
    return mode_ == BalanceMode::Interior ? interior_residual(c) : boundary_residual(c);
  }

  // max_j |F_j|, +∞ for degenerate (coincident) configurations.
  double objective(const Vec& theta) const {
    const BalanceConfigd c = decode(theta);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if ((c.points[i] - c.points[j]).norm() < 1e-9) return std::numeric_limits<double>::infinity();
      }
    }
    return max_norm(residual(c));
  }

  double smooth_objective(const Vec& theta) const {
    const BalanceConfigd c = decode(theta);
    double s = 0.0;
    for (const auto& f : residual(c)) s += f.squaredNorm();
    return s;
  }

  double max_point_norm(const Vec& theta) const {
    const BalanceConfigd c = decode(theta);
    double m = 0.0;
    for (const auto& z : c.points) m = std::max(m, z.norm());
    return m;
  }

 private:
  BalanceMode mode_;
  int k_;
  int N_;
};

struct RestartOutcome {
  Vec theta;
  double value = std::numeric_limits<double>::infinity();
  bool escaped = false;
};

// Expanding/contracting compass search on max_j |F_j|.
RestartOutcome pattern_search(const Parametrization& P, Vec theta, const MinimizeOptions& opts) {
  RestartOutcome out;
  double f = P.objective(theta);
  double step = 0.5;
  for (int it = 0; it < opts.pattern_iterations && step > 1e-12; ++it) {
    bool improved = false;
    for (Eigen::Index i = 0; i < theta.size() && !improved; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vec trial = theta;
        trial(i) += sign * step;
        const double ft = P.objective(trial);
        if (ft < f) {
          theta = trial;
          f = ft;
          improved = true;
          break;
        }
      }
    }
    step = improved ? std::min(2.0 * step, 1e7) : 0.5 * step;
    if (P.max_point_norm(theta) > opts.escape_norm) {
      out.escaped = true;
      break;
    }
  }
  out.theta = theta;
  out.value = f;
  return out;
}

// Gradient descent with backtracking on Σ|F_j|², keeping the best max-norm iterate.
RestartOutcome polish(const Parametrization& P, RestartOutcome start, const MinimizeOptions& opts) {
  if (start.escaped) return start;
  Vec theta = start.theta;
  double s = P.smooth_objective(theta);
  for (int it = 0; it < opts.polish_iterations; ++it) {
    Vec grad(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(theta(i)));
      Vec tp = theta, tm = theta;
      tp(i) += h;
      tm(i) -= h;
      grad(i) = (P.smooth_objective(tp) - P.smooth_objective(tm)) / (2.0 * h);
    }
    if (!(grad.norm() > 0.0) || !std::isfinite(grad.norm())) break;
    bool moved = false;
    for (double alpha = 1.0; alpha > 1e-14; alpha *= 0.5) {
      const Vec trial = theta - alpha * grad;
      const double st = P.smooth_objective(trial);
      if (std::isfinite(st) && st < s - 1e-4 * alpha * grad.squaredNorm()) {
        theta = trial;
        s = st;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    const double f = P.objective(theta);
    if (f < start.value) {
      start.value = f;
      start.theta = theta;
    }
    if (P.max_point_norm(theta) > opts.escape_norm) {
      start.escaped = true;
      break;
    }
  }
  return start;
}

}  // namespace

MinimizeResult minimize_residual(BalanceMode mode, int k, const MinimizeOptions& opts) {
  if (mode == BalanceMode::Interior && k < 2) throw std::invalid_argument("interior minimization needs k >= 2");
  if (mode == BalanceMode::Boundary && k < 1) throw std::invalid_argument("boundary minimization needs k >= 1");
  if (opts.N < 2) throw std::invalid_argument("dimension must be at least 2");
  const Parametrization P(mode, k, opts.N);

  std::vector<RestartOutcome> outcomes(opts.restarts);
  parallel_for(
      static_cast<std::size_t>(opts.restarts),
      [&](std::size_t r) {
        std::seed_seq seq{opts.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(k)};
        Rng rng(seq);
        outcomes[r] = polish(P, pattern_search(P, P.random_start(rng), opts), opts);
      },
      opts.threads);

  MinimizeResult res;
  res.best_value = std::numeric_limits<double>::infinity();
  for (const auto& o : outcomes) {
    res.restart_values.push_back(o.value);
    res.escaped = res.escaped || o.escaped;
    if (o.value < res.best_value) {
      res.best_value = o.value;
      res.best_config = P.decode(o.theta);
    }
  }
  return res;
}

FuzzReport fuzz_certificates(BalanceMode mode, int k, int samples, std::uint64_t seed, int N) {
  if (N < 3) throw std::invalid_argument("fuzz_certificates: N must be at least 3");
  if (samples < 1) throw std::invalid_argument("fuzz_certificates: samples must be positive");
  const bool interior = mode == BalanceMode::Interior;
  if (k < (interior ? 2 : 1)) throw std::invalid_argument("fuzz_certificates: k too small for the mode");
  Rng rng(seed);
  std::uniform_real_distribution<double> lateral(-3.0, 3.0), depth(1.0, 4.0);
  FuzzReport r;
  r.samples = samples;
  r.min_bound = std::numeric_limits<double>::infinity();
  r.min_residual = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    BalanceConfigd cfg;
    cfg.mode = mode;
    if (interior) {
      cfg.gauge = true;
      cfg.points = {Pointd::Zero(N), random_unit_vector(N, rng)};
      for (int j = 2; j < k; ++j) cfg.points.push_back(random_in_ball(N, 3.0, rng));
    } else {
      for (int j = 0; j < k; ++j) {
        Pointd z(N);
        for (int a = 0; a + 1 < N; ++a) z(a) = lateral(rng);
        z(N - 1) = -depth(rng);
        cfg.points.push_back(z);
      }
    }
    const auto cert = interior ? certify_interior(cfg) : certify_boundary(cfg);
    const double residual = max_norm(interior ? interior_residual(cfg) : boundary_residual(cfg));
    r.violations += cert.lower_bound > residual + kCertificateCushion;
    r.nonpositive += !(cert.lower_bound > 0.0);
    r.min_bound = std::min(r.min_bound, cert.lower_bound);
    r.min_residual = std::min(r.min_residual, residual);
  }
  return r;
}

void to_json(nlohmann::json& j, const FuzzReport& r) {
  j = {{"samples", r.samples},
       {"violations", r.violations},
       {"nonpositive", r.nonpositive},
       {"min_certified_bound", r.min_bound},
       {"min_residual_found", r.min_residual}};
}

void to_json(nlohmann::json& j, const NonexistenceCertificate& c) {
  j = {{"direction", std::vector<double>(c.direction.data(), c.direction.data() + c.direction.size())},
       {"extremal_index", c.extremal_index},
       {"lower_bound", c.lower_bound},
       {"max_residual", c.max_residual}};
}

}  // namespace plasma_spike
