#include "plasma_spike/kirchhoff_routh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "plasma_spike/parallel.hpp"
#include "plasma_spike/sampling.hpp"

namespace plasma_spike {
namespace {

using Vec = Eigen::VectorXd;

Vec flatten(const PointListd& pts) {
  const Eigen::Index N = pts.front().size();
  Vec x(static_cast<Eigen::Index>(pts.size()) * N);
  for (std::size_t i = 0; i < pts.size(); ++i) x.segment(static_cast<Eigen::Index>(i) * N, N) = pts[i];
  return x;
}

PointListd unflatten(const Vec& x, int N) {
  PointListd pts(x.size() / N);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = x.segment(static_cast<Eigen::Index>(i) * N, N);
  return pts;
}

class Problem {
 public:
  Problem(const DomainKerneld& kernel, std::vector<double> weights, double escape_radius)
      : kernel_(kernel), weights_(std::move(weights)), escape_radius_(escape_radius) {}

  bool admissible(const Vec& x) const {
    const PointListd pts = unflatten(x, kernel_.N);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!(kernel_.boundary_distance(pts[i]) > 1e-9)) return false;
      for (std::size_t j = 0; j < i; ++j) {
        if ((pts[i] - pts[j]).norm() < 1e-8) return false;
      }
    }
    return true;
  }

  bool escaped(const Vec& x) const {
    if (kernel_.base == DomainKind::UnitBall) return false;
    const PointListd pts = unflatten(x, kernel_.N);
    return std::any_of(pts.begin(), pts.end(), [&](const Pointd& p) { return p.norm() > escape_radius_; });
  }

  SpikeConfigurationd config(const Vec& x) const { return {unflatten(x, kernel_.N), weights_, kernel_}; }

  Vec gradient(const Vec& x) const { return flatten(hamiltonian_grad(config(x))); }

  // Symmetrized central-difference Jacobian of the analytic gradient.
  Eigen::MatrixXd hessian(const Vec& x) const {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double step = 1e-6 * std::max(1.0, std::abs(x(i)));
      Vec xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      H.col(i) = (gradient(xp) - gradient(xm)) / (2.0 * step);
    }
    return 0.5 * (H + H.transpose());
  }

 private:
  DomainKerneld kernel_;
  std::vector<double> weights_;
  double escape_radius_;
};

struct RestartResult {
  RestartOutcome outcome = RestartOutcome::MaxIterations;
  Vec x;
};

// Backtracking on the merit ‖∇ℋ‖²; returns false if no admissible decrease exists.
bool line_search(const Problem& prob, Vec& x, Vec& g, const Vec& dir) {
  const double merit = g.squaredNorm();
  for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
    const Vec trial = x + alpha * dir;
    if (!prob.admissible(trial)) continue;
    const Vec gt = prob.gradient(trial);
    if (gt.squaredNorm() < (1.0 - 1e-4 * alpha) * merit) {
      x = trial;
      g = gt;
      return true;
    }
  }
  return false;
}

RestartResult run_restart(const Problem& prob, Vec x, const CriticalSearchOptions& opts) {
  RestartResult res;
  Vec g = prob.gradient(x);
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() <= opts.tol) {
      res.outcome = RestartOutcome::Converged;
      res.x = x;
      return res;
    }
    const Eigen::MatrixXd H = prob.hessian(x);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(H);
    cod.setThreshold(1e-10);
    const Vec newton = -cod.solve(g);
    if (!line_search(prob, x, g, newton)) {
      // Steepest descent on ½‖∇ℋ‖² when the Newton step cannot reduce the merit.
      const Vec descent = -(H * g);
      const double scale = g.squaredNorm() / std::max(descent.squaredNorm(), 1e-300);
      if (!line_search(prob, x, g, scale * descent)) {
        res.outcome = RestartOutcome::Stalled;
        res.x = x;
        return res;
      }
    }
    if (prob.escaped(x)) {
      res.outcome = RestartOutcome::Escaped;
      res.x = x;
      return res;
    }
  }
  res.outcome = g.cwiseAbs().maxCoeff() <= opts.tol ? RestartOutcome::Converged : RestartOutcome::MaxIterations;
  res.x = x;
  return res;
}

bool same_class(const SpikeConfigurationd& a, const SpikeConfigurationd& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.weights[i] != b.weights[i]) return false;
    if ((a.points[i] - b.points[i]).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace

SpikeConfigurationd canonicalize(const SpikeConfigurationd& c) {
  SpikeConfigurationd out = c;
  const std::size_t k = c.size();
  if (c.kernel.base == DomainKind::UnitBall && !c.kernel.is_rescaled) {
    const int N = c.kernel.N;
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    auto rounded = [](double v) { return std::round(v * 1e7); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double na = rounded(c.points[a].norm()), nb = rounded(c.points[b].norm());
      if (na != nb) return na > nb;
      return c.weights[a] > c.weights[b];
    });
    // Orthonormal frame from the points in that order; each new axis points
    // toward the component of the next point orthogonal to the previous axes.
    Eigen::MatrixXd frame(N, 0);
    for (std::size_t idx : order) {
      if (frame.cols() == N) break;
      Pointd v = c.points[idx];
      if (frame.cols() > 0) v -= frame * (frame.transpose() * v);
      if (v.norm() > 1e-7) {
        frame.conservativeResize(N, frame.cols() + 1);
        frame.col(frame.cols() - 1) = v / v.norm();
      }
    }
    if (frame.cols() < N) {
      // Complete the basis; directions outside the span carry no coordinates.
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame.cols() > 0 ? frame : Eigen::MatrixXd::Identity(N, 1));
      Eigen::MatrixXd Q = qr.householderQ();
      for (Eigen::Index j = frame.cols(); j < N; ++j) {
        frame.conservativeResize(N, j + 1);
        frame.col(j) = Q.col(j);
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      out.points[i] = frame.transpose() * c.points[i];
      for (int a = 0; a < N; ++a) {
        if (std::abs(out.points[i](a)) < 1e-12) out.points[i](a) = 0.0;
      }
    }
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    const Pointd& pa = out.points[a];
    const Pointd& pb = out.points[b];
    for (Eigen::Index i = 0; i < pa.size(); ++i) {
      if (std::abs(pa(i) - pb(i)) > 1e-9) return pa(i) < pb(i);
    }
    return out.weights[a] < out.weights[b];
  });
  SpikeConfigurationd sorted = out;
  for (std::size_t i = 0; i < k; ++i) {
    sorted.points[i] = out.points[perm[i]];
    sorted.weights[i] = out.weights[perm[i]];
  }
  return sorted;
}

CriticalSearchResult find_critical(const DomainKerneld& kernel, int k, const std::vector<double>& weights,
                                   const CriticalSearchOptions& opts) {
  if (k < 1) throw std::invalid_argument("find_critical needs k >= 1");
  if (static_cast<int>(weights.size()) != k) throw std::invalid_argument("weights must have length k");
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    throw std::invalid_argument("weights must be nonzero");
  }
  const Problem prob(kernel, weights, opts.escape_radius);

  std::vector<RestartResult> results(opts.restarts);
  parallel_for(
      static_cast<std::size_t>(opts.restarts),
      [&](std::size_t r) {
        std::seed_seq seq{opts.seed, static_cast<std::uint64_t>(r)};
        Rng rng(seq);
        Vec x;
        do {
          PointListd pts;
          for (int i = 0; i < k; ++i) pts.push_back(random_interior(kernel, opts.init_shrink, rng));
          x = flatten(pts);
        } while (!prob.admissible(x));
        results[r] = run_restart(prob, x, opts);
      },
      opts.threads);

  CriticalSearchResult out;
  for (const auto& r : results) {
    out.outcomes.push_back(r.outcome);
    if (r.outcome != RestartOutcome::Converged) continue;
    SpikeConfigurationd cfg = prob.config(r.x);
    out.raw.push_back(cfg);
    const SpikeConfigurationd canon = canonicalize(cfg);
    auto it = std::find_if(out.critical.begin(), out.critical.end(),
                           [&](const CriticalPoint& c) { return same_class(c.configuration, canon, opts.dedup_tol); });
    if (it != out.critical.end()) {
      ++it->hits;
      continue;
    }
    CriticalPoint cp;
    cp.configuration = canon;
    cp.grad_norm = max_abs_component(hamiltonian_grad(cfg));
    cp.value = hamiltonian(cfg);
    cp.hits = 1;
    out.critical.push_back(cp);
  }
  std::ostringstream diag;
  std::array<int, 4> counts{};
  for (auto o : out.outcomes) ++counts[static_cast<int>(o)];
  diag << "restarts=" << opts.restarts << " converged=" << counts[0] << " escaped=" << counts[1]
       << " stalled=" << counts[2] << " max_iterations=" << counts[3];
  if (out.critical.empty()) diag << "; no critical configuration found";
  out.diagnostics = diag.str();
  return out;
}

const char* to_string(RestartOutcome o) {
  switch (o) {
    case RestartOutcome::Converged: return "converged";
    case RestartOutcome::Escaped: return "escaped";
    case RestartOutcome::Stalled: return "stalled";
    case RestartOutcome::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const CriticalPoint& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.configuration.points) pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  j = {{"points", pts},
       {"weights", c.configuration.weights},
       {"grad_norm", c.grad_norm},
       {"hamiltonian", c.value},
       {"hits", c.hits}};
}

void to_json(nlohmann::json& j, const CriticalSearchResult& r) {
  j = nlohmann::json::object();
  j["critical"] = r.critical;
  nlohmann::json outcomes = nlohmann::json::array();
  for (auto o : r.outcomes) outcomes.push_back(to_string(o));
  j["outcomes"] = outcomes;
  j["diagnostics"] = r.diagnostics;
}

}  // namespace plasma_spike
