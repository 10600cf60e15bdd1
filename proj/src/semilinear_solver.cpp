#include "plasma_spike/semilinear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/IterativeSolvers>

namespace plasma_spike {
namespace {

void require_three_dimensional(const RadialProfile& profile) {
  if (profile.config.N != 3) throw std::invalid_argument("the grid solver is three-dimensional; profile has N != 3");
}

Eigen::VectorXd positive_part_power(const Eigen::VectorXd& v, double p) {
  return (v.array() - 1.0).max(0.0).pow(p).matrix();
}

Eigen::VectorXd residual_of(const BallGrid& grid, const Eigen::VectorXd& v, double mu, double p) {
  return grid.laplacian() * v - mu * positive_part_power(v, p);
}

// Applies the grid's shared incomplete Cholesky factor inside MINRES.
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

double GridField::at(int i, int j, int k) const {
  const int n = grid->n();
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
  return values(grid->node(i, j, k));
}

double GridField::interpolate(const Pointd& x) const {
  const Eigen::Vector3d g = grid->grid_coords(x);
  const int n = grid->n();
  if ((g.array() < 0.0).any() || (g.array() > n - 1).any()) return 0.0;
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    base[a] = std::min(static_cast<int>(std::floor(g(a))), n - 2);
    frac[a] = g(a) - base[a];
  }
  double out = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) out += w * values(grid->node(idx[0], idx[1], idx[2]));
  }
  return out;
}

Pointd GridField::gradient(const Pointd& x) const {
  Pointd g(3);
  const double step = h();
  for (int a = 0; a < 3; ++a) {
    Pointd xp = x, xm = x;
    xp(a) += step;
    xm(a) -= step;
    g(a) = (interpolate(xp) - interpolate(xm)) / (2.0 * step);
  }
  return g;
}

GridField zero_field(std::shared_ptr<const BallGrid> grid, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive and finite");
  GridField f;
  f.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->node_count()));
  f.grid = std::move(grid);
  f.mu = mu;
  f.epsilon = 1.0 / std::sqrt(mu);
  return f;
}

double max_resolvable_mu(const BallGrid& grid, const RadialProfile& profile) {
  const double eps_min = 1.5 * grid.h() / profile.R0;
  return 1.0 / (eps_min * eps_min);
}

GridField seed_spike(std::shared_ptr<const BallGrid> grid, const PointListd& centers, const RadialProfile& profile,
                     double mu) {
  require_three_dimensional(profile);
  if (centers.empty()) throw std::invalid_argument("at least one center is required");
  GridField f = zero_field(grid, mu);
  const double mu_max = max_resolvable_mu(*grid, profile);
  if (mu > mu_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "spike unresolvable at mu=" << mu << " on resolution " << grid->n()
       << ": 2*eps*R0 must span 3 cells, so mu must not exceed " << mu_max;
    throw std::invalid_argument(os.str());
  }
  for (const auto& c : centers) {
    if (c.size() != 3 || c.squaredNorm() >= 1.0) throw std::invalid_argument("spike center must lie inside the unit ball");
  }
  const GluedProfile w0(profile);
  for (Eigen::Index u = 0; u < grid->unknown_count(); ++u) {
    const int nd = grid->node_of(static_cast<int>(u));
    const Pointd x = grid->position(nd);
    double v = 0.0;
    for (const auto& c : centers) v += w0((x - c).norm() / f.epsilon);
    f.values(nd) = v;
  }
  return f;
}

GridField seed_spike(std::shared_ptr<const BallGrid> grid, const Pointd& center, const RadialProfile& profile,
                     double mu) {
  return seed_spike(std::move(grid), PointListd{center}, profile, mu);
}

std::string to_string(SolveOutcome outcome) {
  switch (outcome) {
    case SolveOutcome::Converged: return "converged";
    case SolveOutcome::Vanishing: return "vanishing";
    case SolveOutcome::Diverged: return "diverged";
    case SolveOutcome::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

Eigen::VectorXd semilinear_residual(const GridField& field, double p) {
  return residual_of(*field.grid, field.grid->gather(field.values), field.mu, p);
}

SolveResult solve_semilinear(const GridField& initial, double p, const SolveOptions& opts) {
  const BallGrid& grid = *initial.grid;
  const double mu = initial.mu;
  SolveResult res;
  res.field = initial;

  Eigen::VectorXd v = grid.gather(initial.values);
  Eigen::VectorXd F = residual_of(grid, v, mu, p);
  double phi = F.squaredNorm();
  res.residual = F.lpNorm<Eigen::Infinity>();
  res.residual_history.push_back(res.residual);

  Eigen::MINRES<SparseMatrixd, Eigen::Lower | Eigen::Upper, SharedPreconditioner> minres;
  minres.preconditioner().set(&grid.preconditioner());
  minres.setMaxIterations(opts.max_linear_iterations);

  double eta = opts.max_forcing;
  bool done = res.residual <= opts.tol;
  while (!done && res.iterations < opts.max_iterations) {
    SparseMatrixd J = grid.laplacian();
    J.diagonal() -= mu * p * (v.array() - 1.0).max(0.0).pow(p - 1.0).matrix();
    minres.setTolerance(eta);
    minres.compute(J);
    const Eigen::VectorXd delta = minres.solve(-F);
    res.linear_iterations += static_cast<int>(minres.iterations());

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd v_trial, F_trial;
    double phi_trial = phi;
    for (int b = 0; b <= opts.max_backtracks; ++b, t *= 0.5) {
      v_trial = v + t * delta;
      F_trial = residual_of(grid, v_trial, mu, p);
      phi_trial = F_trial.squaredNorm();
      if (std::isfinite(phi_trial) && phi_trial <= (1.0 - 2.0 * opts.armijo * t) * phi) {
        accepted = true;
        break;
      }
    }
    ++res.iterations;
    if (!accepted) {
      res.outcome = SolveOutcome::Diverged;
      res.message = "line search exhausted";
      break;
    }
    const double ratio = std::sqrt(phi_trial / phi);
    const double eta_prev = eta;
    eta = 0.9 * ratio * ratio;
    if (0.9 * eta_prev * eta_prev > 0.1) eta = std::max(eta, 0.9 * eta_prev * eta_prev);
    eta = std::clamp(eta, opts.linear_tol, opts.max_forcing);
    phi = phi_trial;
    v.swap(v_trial);
    F.swap(F_trial);
    res.step_lengths.push_back(t);
    res.residual = F.lpNorm<Eigen::Infinity>();
    res.residual_history.push_back(res.residual);
    done = res.residual <= opts.tol;
  }

  res.field.values = grid.scatter(v);
  res.min_value = res.field.values.minCoeff();
  res.nonnegative = res.min_value >= -10.0 * grid.h() * grid.h();
  if (done) {
    res.outcome = res.field.values.maxCoeff() < 1.0 ? SolveOutcome::Vanishing : SolveOutcome::Converged;
    if (res.outcome == SolveOutcome::Vanishing) res.message = "max v < 1: trivial branch";
  } else if (res.outcome != SolveOutcome::Diverged) {
    res.outcome = SolveOutcome::MaxIterations;
    res.message = "iteration limit reached";
  }
  return res;
}

Eigen::VectorXd branch_tangent(const GridField& field, double p, const SolveOptions& opts) {
  const BallGrid& grid = *field.grid;
  const Eigen::VectorXd v = grid.gather(field.values);
  SparseMatrixd J = grid.laplacian();
  J.diagonal() -= field.mu * p * (v.array() - 1.0).max(0.0).pow(p - 1.0).matrix();
  Eigen::MINRES<SparseMatrixd, Eigen::Lower | Eigen::Upper, SharedPreconditioner> minres;
  minres.preconditioner().set(&grid.preconditioner());
  minres.setMaxIterations(opts.max_linear_iterations);
  minres.setTolerance(1e-8);
  minres.compute(J);
  return grid.scatter(minres.solve(positive_part_power(v, p)));
}

namespace {

GridField predict(const GridField& prev, double mu, double p, const ContinuationOptions& opts) {
  const auto& grid = prev.grid;
  GridField next = zero_field(grid, mu);
  if (opts.predictor == Predictor::Tangent) {
    next.values = prev.values + (mu - prev.mu) * branch_tangent(prev, p, opts.solve);
    return next;
  }
  PointListd anchors = extract_spikes(prev, p).centers;
  if (anchors.empty()) anchors.push_back(Pointd::Zero(3));
  const double ratio = next.epsilon / prev.epsilon;
  for (Eigen::Index u = 0; u < grid->unknown_count(); ++u) {
    const int nd = grid->node_of(static_cast<int>(u));
    const Pointd x = grid->position(nd);
    std::size_t best = 0;
    for (std::size_t c = 1; c < anchors.size(); ++c) {
      if ((x - anchors[c]).squaredNorm() < (x - anchors[best]).squaredNorm()) best = c;
    }
    next.values(nd) = prev.interpolate(anchors[best] + ratio * (x - anchors[best]));
  }
  return next;
}

SolveResult advance(const GridField& from, double mu, double p, const ContinuationOptions& opts, int depth,
                    std::vector<double>& visited) {
  SolveResult r = solve_semilinear(predict(from, mu, p, opts), p, opts.solve);
  visited.push_back(mu);
  if (r.outcome == SolveOutcome::Converged || depth >= opts.max_subdivisions) return r;
  const double mid = std::sqrt(from.mu * mu);
  SolveResult half = advance(from, mid, p, opts, depth + 1, visited);
  if (half.outcome != SolveOutcome::Converged) return half;
  return advance(half.field, mu, p, opts, depth + 1, visited);
}

}  // namespace

ContinuationResult continue_in_mu(std::shared_ptr<const BallGrid> grid, const PointListd& centers,
                                  const RadialProfile& profile, const std::vector<double>& mu_sequence,
                                  const ContinuationOptions& opts) {
  if (mu_sequence.empty()) throw std::invalid_argument("empty mu sequence");
  for (std::size_t i = 1; i < mu_sequence.size(); ++i) {
    if (!(mu_sequence[i] > mu_sequence[i - 1])) throw std::invalid_argument("mu sequence must be strictly increasing");
  }
  const double p = profile.config.p;
  ContinuationResult out;
  out.steps.push_back(solve_semilinear(seed_spike(grid, centers, profile, mu_sequence.front()), p, opts.solve));
  out.visited_mu.push_back(mu_sequence.front());
  if (out.steps.back().outcome != SolveOutcome::Converged) {
    out.failed_mu = mu_sequence.front();
    return out;
  }
  for (std::size_t s = 1; s < mu_sequence.size(); ++s) {
    out.steps.push_back(advance(out.steps.back().field, mu_sequence[s], p, opts, 0, out.visited_mu));
    if (out.steps.back().outcome != SolveOutcome::Converged) {
      out.failed_mu = mu_sequence[s];
      break;
    }
  }
  return out;
}

double comfortable_seed_mu(const BallGrid& grid, const RadialProfile& profile) {
  const double eps = 6.0 * grid.h() / profile.R0;
  return 1.0 / (eps * eps);
}

ContinuationResult solve_seeded(std::shared_ptr<const BallGrid> grid, const PointListd& centers,
                                const RadialProfile& profile, double mu, const ContinuationOptions& opts) {
  const double start = std::min(mu, comfortable_seed_mu(*grid, profile));
  std::vector<double> seq{start};
  if (mu > start) seq.push_back(mu);
  return continue_in_mu(std::move(grid), centers, profile, seq, opts);
}

SpikeReport extract_spikes(const GridField& field, double p, double sigma, double R0) {
  const BallGrid& grid = *field.grid;
  const int n = grid.n();
  const double h = grid.h();
  const double scale = std::pow(field.mu, 1.5);
  const auto& vals = field.values;
  SpikeReport rep;
  rep.sigma = sigma;

  for (Eigen::Index u = 0; u < grid.unknown_count(); ++u) {
    const int nd = grid.node_of(static_cast<int>(u));
    const double v = vals(nd);
    if (v < 1.0 + sigma) continue;
    const auto c = grid.coords(nd);
    bool is_max = true;
    for (int di = -1; di <= 1 && is_max; ++di) {
      for (int dj = -1; dj <= 1 && is_max; ++dj) {
        for (int dk = -1; dk <= 1 && is_max; ++dk) {
          if (!di && !dj && !dk) continue;
          const int i = c[0] + di, j = c[1] + dj, k = c[2] + dk;
          if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) continue;
          const int nb = grid.node(i, j, k);
          const double w = vals(nb);
          is_max = nb < nd ? v > w : v >= w;
        }
      }
    }
    if (!is_max) continue;
    Pointd center = grid.position(nd);
    for (int a = 0; a < 3; ++a) {
      std::array<int, 3> lo = c, hi = c;
      --lo[a];
      ++hi[a];
      const double fm = field.at(lo[0], lo[1], lo[2]);
      const double fp = field.at(hi[0], hi[1], hi[2]);
      const double curv = fm - 2.0 * v + fp;
      if (curv < 0.0) center(a) += std::clamp(0.5 * (fm - fp) / curv, -0.5, 0.5) * h;
    }
    rep.centers.push_back(center);
    rep.center_nodes.push_back(nd);
    rep.heights.push_back(v);
  }

  std::vector<char> seen(grid.node_count(), 0);
  constexpr std::array<std::array<int, 3>, 6> dirs{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  for (Eigen::Index u = 0; u < grid.unknown_count(); ++u) {
    const int start = grid.node_of(static_cast<int>(u));
    if (seen[start] || vals(start) <= 1.0) continue;
    std::vector<int> members;
    std::deque<int> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const int nd = queue.front();
      queue.pop_front();
      members.push_back(nd);
      const auto c = grid.coords(nd);
      for (const auto& d : dirs) {
        if (!grid.interior(c[0] + d[0], c[1] + d[1], c[2] + d[2])) continue;
        const int nb = grid.node(c[0] + d[0], c[1] + d[1], c[2] + d[2]);
        if (!seen[nb] && vals(nb) > 1.0) {
          seen[nb] = 1;
          queue.push_back(nb);
        }
      }
    }

    // Level-set crossings along edges leaving the component.
    PointListd crossings;
    PlasmaComponent comp;
    comp.node_count = static_cast<int>(members.size());
    for (int nd : members) {
      const double vin = vals(nd);
      comp.mass += scale * std::pow(vin - 1.0, p) * grid.cell_volume()(grid.unknown_of(nd));
      const auto c = grid.coords(nd);
      const Pointd x = grid.position(nd);
      for (const auto& d : dirs) {
        const double vout = field.at(c[0] + d[0], c[1] + d[1], c[2] + d[2]);
        if (vout > 1.0) continue;
        const double t = (vin - 1.0) / (vin - vout);
        Pointd y = x;
        for (int a = 0; a < 3; ++a) y(a) += t * d[a] * h;
        crossings.push_back(y);
      }
    }

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < rep.centers.size(); ++ci) {
      if (std::find(members.begin(), members.end(), rep.center_nodes[ci]) == members.end()) continue;
      double radius = 0.0;
      for (const auto& y : crossings) radius = std::max(radius, (y - rep.centers[ci]).norm());
      if (radius < best) {
        best = radius;
        comp.center_index = static_cast<int>(ci);
      }
    }
    if (comp.center_index < 0) {
      const int top = *std::max_element(members.begin(), members.end(), [&](int a, int b) { return vals(a) < vals(b); });
      double radius = 0.0;
      for (const auto& y : crossings) radius = std::max(radius, (y - grid.position(top)).norm());
      best = radius;
    }
    comp.bounding_radius = best;
    if (R0 > 0.0) comp.contained = comp.center_index >= 0 && best <= 2.0 * field.epsilon * R0 + h;
    rep.containment_ok = rep.containment_ok && comp.contained;
    rep.components.push_back(comp);
  }

  const Eigen::VectorXd vu = grid.gather(vals);
  rep.mass = scale * positive_part_power(vu, p).dot(grid.cell_volume());
  return rep;
}

void to_json(nlohmann::json& j, const SolveResult& r) {
  j = nlohmann::json{{"outcome", to_string(r.outcome)},
                     {"iterations", r.iterations},
                     {"linear_iterations", r.linear_iterations},
                     {"residual", r.residual},
                     {"residual_history", r.residual_history},
                     {"step_lengths", r.step_lengths},
                     {"min_value", r.min_value},
                     {"max_value", r.field.values.size() ? r.field.values.maxCoeff() : 0.0},
                     {"nonnegative", r.nonnegative},
                     {"mu", r.field.mu},
                     {"epsilon", r.field.epsilon},
                     {"resolution", r.field.grid ? r.field.grid->n() : 0},
                     {"message", r.message}};
}

void to_json(nlohmann::json& j, const SpikeReport& r) {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : r.centers) centers.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : r.components) {
    comps.push_back({{"node_count", c.node_count},
                     {"center_index", c.center_index},
                     {"bounding_radius", c.bounding_radius},
                     {"mass", c.mass},
                     {"contained", c.contained}});
  }
  j = nlohmann::json{{"sigma", r.sigma},   {"centers", centers}, {"heights", r.heights},
                     {"plasma_components", comps}, {"mass", r.mass}, {"containment_ok", r.containment_ok}};
}

}  // namespace plasma_spike
