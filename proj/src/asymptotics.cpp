#include "plasma_spike/asymptotics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace plasma_spike {

GradientField fundamental_sum_gradient(const ProblemConfig& config, std::vector<PointSource> sources) {
  return [config, sources = std::move(sources)](const Pointd& x) {
    Pointd g = Pointd::Zero(x.size());
    for (const auto& s : sources) g += s.weight * fundamental_grad_x(config.N, config.C_N, x, s.z);
    return g;
  };
}

GradientField green_sum_gradient(const DomainKernel<double>& kernel, std::vector<PointSource> sources) {
  return [kernel, sources = std::move(sources)](const Pointd& x) {
    Pointd g = Pointd::Zero(x.size());
    for (const auto& s : sources) g += s.weight * green_grad_x(kernel, x, s.z);
    return g;
  };
}

GradientField field_gradient(const GridField& field) {
  return [&field](const Pointd& x) { return field.gradient(x); };
}

namespace {

Pointd pohozaev_density(const Pointd& g, const Pointd& nu) { return -(g.dot(nu)) * g + 0.5 * g.squaredNorm() * nu; }

void check_sphere(const Pointd& center, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  if (center.size() < 2) throw std::invalid_argument("sphere center needs dimension >= 2");
}

}  // namespace

Pointd pohozaev_surface(const GradientField& grad, const Pointd& center, double r, int order) {
  check_sphere(center, r);
  const int N = static_cast<int>(center.size());
  const SphereRule rule = sphere_rule(N, order);
  const double area = std::pow(r, N - 1);
  Pointd sum = Pointd::Zero(N);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const Pointd& nu = rule.nodes[q];
    sum += rule.weights[q] * pohozaev_density(grad(center + r * nu), nu);
  }
  return area * sum;
}

Pointd sphere_mean(const GradientField& field, const Pointd& center, double r, int order) {
  check_sphere(center, r);
  const int N = static_cast<int>(center.size());
  const SphereRule rule = sphere_rule(N, order);
  Pointd sum = Pointd::Zero(N);
  double total = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    sum += rule.weights[q] * field(center + r * rule.nodes[q]);
    total += rule.weights[q];
  }
  return sum / total;
}

PohozaevSplit pohozaev_split(int N, double a, const Pointd& center, const GradientField& grad_F, double r, int order) {
  check_sphere(center, r);
  if (center.size() != N) throw std::invalid_argument("center has the wrong dimension");
  const SphereRule rule = sphere_rule(N, order);
  const double area = std::pow(r, N - 1);
  PohozaevSplit s;
  s.r = r;
  s.total = Pointd::Zero(N);
  s.quadratic = Pointd::Zero(N);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const Pointd& nu = rule.nodes[q];
    const Pointd gF = grad_F(center + r * nu);
    const Pointd gu = a * (2 - N) * std::pow(r, 1 - N) * nu + gF;
    const Pointd quad = pohozaev_density(gF, nu);
    s.total += rule.weights[q] * pohozaev_density(gu, nu);
    s.quadratic += rule.weights[q] * quad;
    s.quadratic_magnitude += rule.weights[q] * quad.norm();
  }
  s.total *= area;
  s.quadratic *= area;
  s.quadratic_magnitude *= area;
  const double sphere_area = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  s.leading = a * (N - 2) * sphere_area * grad_F(center);
  return s;
}

RemainderReport farfield_remainder(const GridField& field, const SpikeReport& report, const RadialProfile& profile,
                                   const DomainKernel<double>& kernel, double r) {
  const BallGrid& grid = *field.grid;
  const double h = grid.h();
  if (report.centers.empty()) throw std::invalid_argument("farfield_remainder: no spike detected");
  if (r < 2.0 * field.epsilon * profile.R0) throw std::invalid_argument("farfield_remainder: r is below 2*eps*R0");
  if (r < 3.0 * h) throw std::invalid_argument("farfield_remainder: r must span at least three grid cells");
  if (kernel.N != 3 || kernel.base != DomainKind::UnitBall || kernel.is_rescaled) {
    throw std::invalid_argument("farfield_remainder: the grid lives on the unit ball in R^3");
  }
  const double M = profile.M_p0;
  const double inv_eps = 1.0 / field.epsilon;
  const auto excluded = [&](const Pointd& x) {
    for (const auto& c : report.centers) {
      if ((x - c).norm() <= r) return true;
    }
    return false;
  };
  const auto qualifies = [&](int i, int j, int k) { return grid.interior(i, j, k) && !excluded(grid.position(grid.node(i, j, k))); };

  RemainderReport out;
  out.r = r;
  for (Eigen::Index u = 0; u < grid.unknown_count(); ++u) {
    const int nd = grid.node_of(static_cast<int>(u));
    const Pointd x = grid.position(nd);
    if (excluded(x)) continue;
    ++out.nodes;
    double lead = 0.0;
    Pointd lead_grad = Pointd::Zero(3);
    for (const auto& c : report.centers) {
      lead += M * green(kernel, x, c);
      lead_grad += M * green_grad_x(kernel, x, c);
    }
    out.leading_scale = std::max(out.leading_scale, std::abs(lead));
    out.sup_remainder = std::max(out.sup_remainder, std::abs(inv_eps * field.values(nd) - lead));

    const auto c = grid.coords(nd);
    Pointd g(3);
    bool ok = true;
    for (int a = 0; a < 3 && ok; ++a) {
      std::array<int, 3> lo = c, hi = c;
      --lo[a];
      ++hi[a];
      const bool has_lo = qualifies(lo[0], lo[1], lo[2]);
      const bool has_hi = qualifies(hi[0], hi[1], hi[2]);
      const double v0 = field.values(nd);
      if (has_lo && has_hi) {
        g(a) = (field.at(hi[0], hi[1], hi[2]) - field.at(lo[0], lo[1], lo[2])) / (2.0 * h);
      } else if (has_hi) {
        g(a) = (field.at(hi[0], hi[1], hi[2]) - v0) / h;
      } else if (has_lo) {
        g(a) = (v0 - field.at(lo[0], lo[1], lo[2])) / h;
      } else {
        ok = false;
      }
    }
    if (!ok) continue;
    out.leading_grad_scale = std::max(out.leading_grad_scale, lead_grad.norm());
    out.sup_grad_remainder = std::max(out.sup_grad_remainder, (inv_eps * g - lead_grad).norm());
  }
  return out;
}

ProfileErrorReport profile_error(const GridField& field, const Pointd& center, const RadialProfile& profile, double R) {
  const BallGrid& grid = *field.grid;
  const double eps = field.epsilon;
  if (eps * R < 3.0 * grid.h()) throw std::invalid_argument("local_profile_error: eps*R must span three grid cells");
  if (center.size() != 3) throw std::invalid_argument("local_profile_error: center must be a point of R^3");
  const GluedProfile w0(profile);
  ProfileErrorReport out;
  out.R = R;
  out.peak = w0.peak();

  constexpr int kSteps = 16;
  const double dy = R / kSteps;
  for (int i = -kSteps; i <= kSteps; ++i) {
    for (int j = -kSteps; j <= kSteps; ++j) {
      for (int k = -kSteps; k <= kSteps; ++k) {
        const Pointd y = make_point({i * dy, j * dy, k * dy});
        if (y.norm() > R * (1.0 + 1e-12)) continue;
        out.interpolated = std::max(out.interpolated, std::abs(field.interpolate(center + eps * y) - w0(y.norm())));
      }
    }
  }
  for (Eigen::Index u = 0; u < grid.unknown_count(); ++u) {
    const int nd = grid.node_of(static_cast<int>(u));
    const double s = (grid.position(nd) - center).norm() / eps;
    if (s <= R) out.nodal = std::max(out.nodal, std::abs(field.values(nd) - w0(s)));
  }
  return out;
}

double local_profile_error(const GridField& field, const Pointd& center, const RadialProfile& profile, double R) {
  return profile_error(field, center, profile, R).interpolated;
}

MassQuantization mass_quantization_check(const GridField&, const SpikeReport& report, const RadialProfile& profile) {
  MassQuantization m;
  m.Z = static_cast<int>(report.centers.size());
  m.measured = report.mass;
  m.expected = m.Z * profile.M_p0;
  return m;
}

void to_json(nlohmann::json& j, const RemainderReport& r) {
  j = nlohmann::json{{"r", r.r},
                     {"R", r.R},
                     {"nodes", r.nodes},
                     {"sup_remainder", r.sup_remainder},
                     {"sup_grad_remainder", r.sup_grad_remainder},
                     {"leading_scale", r.leading_scale},
                     {"leading_grad_scale", r.leading_grad_scale},
                     {"ratio", r.ratio()},
                     {"grad_ratio", r.grad_ratio()}};
}

void to_json(nlohmann::json& j, const ProfileErrorReport& r) {
  j = nlohmann::json{{"R", r.R}, {"interpolated", r.interpolated}, {"nodal", r.nodal}, {"peak", r.peak},
                     {"relative_interpolated", r.interpolated / r.peak}, {"relative_nodal", r.nodal / r.peak}};
}

void to_json(nlohmann::json& j, const MassQuantization& m) {
  j = nlohmann::json{{"measured", m.measured}, {"expected", m.expected}, {"Z", m.Z}};
}

void to_json(nlohmann::json& j, const PohozaevSplit& s) {
  const auto vec = [](const Pointd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j = nlohmann::json{{"r", s.r},
                     {"total", vec(s.total)},
                     {"leading", vec(s.leading)},
                     {"quadratic", vec(s.quadratic)},
                     {"quadratic_magnitude", s.quadratic_magnitude}};
}

}  // namespace plasma_spike
