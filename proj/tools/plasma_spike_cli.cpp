// plasma-spike: subcommand front end over the library. Every run writes a
// JSON report (manifest + result + failures) to --out-dir and echoes it.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plasma_spike/asymptotics.hpp"
#include "plasma_spike/balance_system.hpp"
#include "plasma_spike/field_io.hpp"
#include "plasma_spike/green_checks.hpp"
#include "plasma_spike/kirchhoff_routh.hpp"
#include "plasma_spike/parallel.hpp"

#ifndef PLASMA_SPIKE_VERSION
#define PLASMA_SPIKE_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plasma_spike;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Outcome {
  json result = json::object();
  json failures = json::array();

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct Globals {
  std::uint64_t seed = 1;
  int threads = -1;
  std::string out_dir = "reports";
  bool quiet = false;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Next free <stem>.json, <stem>-1.json, ... so earlier reports are never replaced.
fs::path fresh_path(const fs::path& dir, const std::string& stem) {
  fs::path p = dir / (stem + ".json");
  for (int n = 1; fs::exists(p); ++n) p = dir / (stem + "-" + std::to_string(n) + ".json");
  return p;
}

int emit(const Globals& g, const std::string& sub, const json& params, const Outcome& out, double seconds) {
  const std::string hash = hex16(fnv1a(sub + "\n" + params.dump() + "\n" + PLASMA_SPIKE_VERSION));
  json report = {{"manifest",
                  {{"subcommand", sub},
                   {"parameters", params},
                   {"config_hash", hash},
                   {"version", PLASMA_SPIKE_VERSION},
                   {"duration_seconds", seconds}}},
                 {"result", out.result},
                 {"failures", out.failures},
                 {"passed", out.failures.empty()}};
  fs::create_directories(g.out_dir);
  const fs::path path = fresh_path(g.out_dir, sub + "-" + hash);
  std::ofstream(path) << report.dump(2) << "\n";
  if (!g.quiet) std::cout << report.dump(2) << "\n";
  std::cerr << "report: " << path.string() << "\n";
  return out.failures.empty() ? 0 : 1;
}

Pointd parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad coordinate list '" + text + "'");
    }
  }
  if (v.empty()) throw UsageError("empty coordinate list");
  Pointd p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p(static_cast<Eigen::Index>(i)) = v[i];
  return p;
}

json point_json(const Pointd& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

DomainKerneld kernel_for(const std::string& domain, const ProblemConfig& cfg) {
  return domain == "ball" ? unit_ball_kernel(cfg) : half_space_kernel(cfg);
}

// ---- profile

struct ProfileArgs {
  int N = 3;
  double p = 2.0;
  double tol = 1e-11;
  std::string csv;
};

Outcome run_profile(const ProfileArgs& a) {
  const auto pr = shoot(make_config(a.N, a.p), a.tol);
  const auto w0 = glue_w0(pr);
  Outcome o;
  const double value_gap = std::abs(w0.inner_value_at_R0() - 1.0);
  const double slope_gap = std::abs(w0.inner_slope_at_R0() - w0.tail_slope_at_R0());
  const double poho = radial_pohozaev_residual(pr);
  const double closed = mass_closed_form(pr.config, pr.R0);
  o.result = {{"a_star", pr.a_star},
              {"uprime1", pr.uprime1},
              {"R0", pr.R0},
              {"M_p0", pr.M_p0},
              {"M_p0_closed_form", closed},
              {"glue_value_gap", value_gap},
              {"glue_slope_gap", slope_gap},
              {"pohozaev_residual", poho},
              {"ode_residual", pr.ode_residual},
              {"boundary_residual", pr.boundary_residual},
              {"w0_peak", w0.peak()}};
  o.require(value_gap == 0.0, "glue value gap is not zero");
  o.require(slope_gap <= 1e-8, "glue slope gap above 1e-8");
  o.require(poho <= 1e-6, "radial Pohozaev residual above 1e-6");
  o.require(std::abs(pr.M_p0 - closed) <= 1e-6 * closed, "mass differs from closed form by more than 1e-6");
  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    if (!f) throw std::runtime_error("cannot write " + a.csv);
    f.precision(17);
    f << "r,u,du\n";
    for (std::size_t i = 0; i < pr.r.size(); ++i) f << pr.r[i] << "," << pr.u[i] << "," << pr.du[i] << "\n";
  }
  return o;
}

// ---- greens

struct GreensArgs {
  int N = 3;
  double p = 2.0;
  std::string domain = "ball";
  std::string check = "all";
  int samples = 1000;
};

Outcome run_greens(const GreensArgs& a, const Globals& g) {
  const auto cfg = make_config(a.N, a.p);
  const auto k = kernel_for(a.domain, cfg);
  Outcome o;
  const bool all = a.check == "all";
  if (all || a.check == "conformance") {
    const auto c = green_conformance(k, a.samples, g.seed);
    o.result["conformance"] = c;
    o.require(c.dirichlet_max <= 1e-10, "Dirichlet values above 1e-10");
    o.require(c.symmetry_max <= 1e-10, "symmetry defect above 1e-10");
    o.require(std::max(c.green_grad_rel_max, c.robin_grad_rel_max) <= 1e-6, "gradient mismatch above 1e-6");
    o.require(c.rescaling_rel_max <= 1e-12, "rescaling identity defect above 1e-12");
  }
  if ((all && k.base == DomainKind::UnitBall) || a.check == "robin-bound") {
    const auto r = robin_boundary_bound_check(k, a.samples, g.seed);
    o.result["robin_bound"] = r;
    o.require(r.finite, "Robin bound constants not finite");
  }
  if (all || a.check == "halfspace-limit") {
    const std::vector<double> d{0.2, 0.1, 0.05, 0.025};
    const auto h = halfspace_convergence_check(cfg, d);
    o.result["halfspace_limit"] = h;
    o.require(h.passed, "half-space limit errors not decreasing by a factor 4");
  }
  return o;
}

// ---- kr-critical

struct KrArgs {
  int N = 3;
  double p = 2.0;
  std::string domain = "ball";
  int k = 1;
  int restarts = 64;
  std::vector<double> weights;
};

Outcome run_kr(const KrArgs& a, const Globals& g) {
  const auto cfg = make_config(a.N, a.p);
  std::vector<double> w = a.weights.empty() ? std::vector<double>(a.k, 1.0) : a.weights;
  if (static_cast<int>(w.size()) != a.k) throw UsageError("--weights needs exactly k entries");
  CriticalSearchOptions opts;
  opts.restarts = a.restarts;
  opts.seed = g.seed;
  const auto r = find_critical(kernel_for(a.domain, cfg), a.k, w, opts);
  Outcome o;
  o.result = r;
  for (const auto& c : r.critical) o.require(c.grad_norm <= opts.tol, "critical point with gradient above tolerance");
  return o;
}

// ---- balance

struct BalanceArgs {
  std::string mode = "interior";
  int k = 2;
  int fuzz = 0;
  int restarts = 64;
  int N = 3;
};

Outcome run_balance(const BalanceArgs& a, const Globals& g) {
  const BalanceMode mode = a.mode == "interior" ? BalanceMode::Interior : BalanceMode::Boundary;
  Outcome o;
  o.result = {{"violations", 0}, {"min_certified_bound", nullptr}, {"min_residual_found", nullptr}};
  if (a.fuzz > 0) {
    const auto f = fuzz_certificates(mode, a.k, a.fuzz, g.seed, a.N);
    o.result["fuzz"] = f;
    o.result["violations"] = f.violations;
    o.result["min_certified_bound"] = f.min_bound;
    o.require(f.violations == 0, "certificate exceeds the residual");
    o.require(f.nonpositive == 0, "non-positive certificate bound");
  }
  if (a.restarts > 0) {
    MinimizeOptions opts;
    opts.restarts = a.restarts;
    opts.N = a.N;
    opts.seed = g.seed;
    const auto m = minimize_residual(mode, a.k, opts);
    o.result["min_residual_found"] = m.best_value;
    o.result["minimize"] = {{"restarts", a.restarts},
                            {"best_value", m.best_value},
                            {"escaped", m.escaped},
                            {"best_points", [&] {
                               json pts = json::array();
                               for (const auto& p : m.best_config.points) pts.push_back(point_json(p));
                               return pts;
                             }()}};
    if (mode == BalanceMode::Interior) o.require(m.best_value >= 1e-3, "minimization found max|F_j| below 1e-3");
    else o.require(m.best_value > 0.0, "minimization reached a zero boundary residual");
  }
  return o;
}

// ---- solve

struct SolveArgs {
  double mu = 0.0;
  int res = 129;
  double p = 2.0;
  double sigma = 0.1;
  double tol = 1e-10;
  std::vector<std::string> centers;
  std::string predictor = "tangent";
  std::string dump;
};

Outcome run_solve(const SolveArgs& a) {
  if (!(a.mu > 0.0) || !std::isfinite(a.mu)) throw UsageError("--mu must be positive and finite");
  PointListd centers;
  for (const auto& c : a.centers) centers.push_back(parse_point(c));
  if (centers.empty()) centers.push_back(Pointd::Zero(3));
  const auto pr = shoot(make_config(3, a.p));
  const auto grid = build_grid(a.res);
  ContinuationOptions opts;
  opts.solve.tol = a.tol;
  opts.predictor = a.predictor == "rescale" ? Predictor::Rescale : Predictor::Tangent;
  const auto run = solve_seeded(grid, centers, pr, a.mu, opts);
  Outcome o;
  o.result["visited_mu"] = run.visited_mu;
  o.result["failed_mu"] = run.failed_mu ? json(*run.failed_mu) : json(nullptr);
  o.require(run.ok(), "continuation failed");
  if (run.steps.empty()) return o;
  const auto& last = run.steps.back();
  o.result["solve"] = last;
  o.result["spike_report"] = extract_spikes(last.field, a.p, a.sigma, pr.R0);
  o.require(last.outcome == SolveOutcome::Converged, "Newton did not converge: " + to_string(last.outcome));
  o.require(last.residual <= a.tol, "residual above tolerance");
  if (!a.dump.empty()) {
    write_field(a.dump, last.field);
    o.result["dump"] = a.dump;
  }
  return o;
}

// ---- verify

struct VerifyArgs {
  std::string field;
  bool all = false;
  double p = 2.0;
  double sigma = 0.1;
  double r = 0.3;
};

Outcome run_verify(const VerifyArgs& a) {
  const GridField f = read_field(a.field);
  const auto pr = shoot(make_config(3, a.p));
  const auto w0 = glue_w0(pr);
  const auto ball = unit_ball_kernel(pr.config);
  Outcome o;
  json checks = json::array();
  const auto check = [&](const std::string& name, double measured, double baseline, bool ok) {
    checks.push_back({{"name", name}, {"measured", measured}, {"baseline", baseline}, {"passed", ok}});
    o.require(ok, name);
  };
  const double residual = semilinear_residual(f, a.p).lpNorm<Eigen::Infinity>();
  check("residual", residual, 1e-10, residual <= 1e-10);
  const SpikeReport rep = extract_spikes(f, a.p, a.sigma, pr.R0);
  o.result["spike_report"] = rep;
  check("spike_count", static_cast<double>(rep.centers.size()), 1.0, !rep.centers.empty());
  if (a.all && !rep.centers.empty()) {
    const double M = pr.M_p0;
    const double Z = static_cast<double>(rep.centers.size());
    check("mass", rep.mass, Z * M, std::abs(rep.mass - Z * M) <= 0.1 * Z * M);
    const double q = quantization_ratio(recover_plasma_state(f.mu, rep.mass / std::pow(f.mu, 1.5), pr.config), pr.config);
    check("quantization_ratio", q, Z * M, std::abs(q - Z * M) <= 0.1 * Z * M);
    if (!rep.components.empty()) {
      const double epsR0 = f.epsilon * pr.R0;
      const double radius = rep.components.front().bounding_radius;
      check("plasma_radius", radius, epsR0, std::abs(radius - epsR0) <= f.h());
    }
    json profile = json::array();
    for (const auto& c : rep.centers) {
      if (f.epsilon * 2.0 * pr.R0 < 3.0 * f.h()) break;
      const auto e = profile_error(f, c, pr, 2.0 * pr.R0);
      profile.push_back(e);
      check("local_profile_error", e.interpolated, 0.05 * w0.peak(), e.interpolated <= 0.05 * w0.peak());
    }
    o.result["profile_error"] = profile;
    try {
      const auto rem = farfield_remainder(f, rep, pr, ball, a.r);
      o.result["farfield"] = rem;
      check("farfield_ratio", rem.ratio(), 0.1, rem.ratio() <= 0.1);
    } catch (const std::invalid_argument& e) {
      o.result["farfield"] = {{"skipped", e.what()}};
    }
  }
  o.result["mu"] = f.mu;
  o.result["resolution"] = f.grid->n();
  o.result["checks"] = checks;
  return o;
}

// ---- report

Outcome run_report(const std::string& dir) {
  Outcome o;
  json entries = json::array();
  int failing = 0;
  if (fs::is_directory(dir)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      json r;
      try {
        std::ifstream(p) >> r;
      } catch (const json::exception&) {
        o.require(false, "unreadable report " + p.filename().string());
        continue;
      }
      if (!r.contains("manifest") || r["manifest"].value("subcommand", "") == "report") continue;
      const bool passed = r.value("passed", false);
      failing += !passed;
      entries.push_back({{"file", p.filename().string()},
                         {"subcommand", r["manifest"]["subcommand"]},
                         {"config_hash", r["manifest"]["config_hash"]},
                         {"passed", passed},
                         {"failures", r.value("failures", json::array()).size()}});
    }
  }
  o.result = {{"directory", dir}, {"reports", entries}, {"failing", failing}};
  return o;
}

int resolve_threads(int flag) {
  if (flag >= 0) return flag;
  if (const char* env = std::getenv("PLASMA_SPIKE_THREADS")) {
    try {
      return std::max(0, std::stoi(env));
    } catch (const std::exception&) {
      throw UsageError("PLASMA_SPIKE_THREADS must be an integer");
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike solutions of -Δv = μ[v-1]₊ᵖ: profiles, kernels, balance laws, PDE solves."};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults");
  Globals g;
  app.add_option("--seed", g.seed, "seed for every randomized step")->capture_default_str();
  app.add_option("--threads", g.threads, "worker cap (default: $PLASMA_SPIKE_THREADS or all cores)");
  app.add_option("--out-dir", g.out_dir, "report directory")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "do not echo the report");

  ProfileArgs pa;
  auto* profile = app.add_subcommand("profile", "radial ground state and glued spike profile");
  profile->add_option("--N", pa.N)->capture_default_str();
  profile->add_option("--p", pa.p)->capture_default_str();
  profile->add_option("--tol", pa.tol)->capture_default_str();
  profile->add_option("--csv", pa.csv, "write (r, u, u') samples");

  GreensArgs ga;
  auto* greens = app.add_subcommand("greens", "Green function conformance checks");
  greens->add_option("--N", ga.N)->capture_default_str();
  greens->add_option("--p", ga.p)->capture_default_str();
  greens->add_option("--domain", ga.domain)->check(CLI::IsMember({"ball", "halfspace"}))->capture_default_str();
  greens->add_option("--check", ga.check)
      ->check(CLI::IsMember({"all", "conformance", "robin-bound", "halfspace-limit"}))
      ->capture_default_str();
  greens->add_option("--samples", ga.samples)->check(CLI::PositiveNumber)->capture_default_str();

  KrArgs ka;
  auto* kr = app.add_subcommand("kr-critical", "critical points of the Kirchhoff-Routh function");
  kr->add_option("--N", ka.N)->capture_default_str();
  kr->add_option("--p", ka.p)->capture_default_str();
  kr->add_option("--domain", ka.domain)->check(CLI::IsMember({"ball", "halfspace"}))->capture_default_str();
  kr->add_option("--k", ka.k)->check(CLI::PositiveNumber)->capture_default_str();
  kr->add_option("--restarts", ka.restarts)->check(CLI::PositiveNumber)->capture_default_str();
  kr->add_option("--weights", ka.weights, "one weight per point (default all 1)")->delimiter(',');

  BalanceArgs ba;
  auto* balance = app.add_subcommand("balance", "force-balance certificates and residual minimization");
  balance->add_option("--mode", ba.mode)->check(CLI::IsMember({"interior", "boundary"}))->capture_default_str();
  balance->add_option("--k", ba.k)->check(CLI::PositiveNumber)->capture_default_str();
  balance->add_option("--fuzz", ba.fuzz, "random configurations to certify")->check(CLI::NonNegativeNumber);
  balance->add_option("--restarts", ba.restarts)->check(CLI::NonNegativeNumber)->capture_default_str();
  balance->add_option("--N", ba.N)->capture_default_str();

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "seeded Newton solve on the ball grid");
  solve->add_option("--mu", sa.mu)->required();
  solve->add_option("--res", sa.res)->check(CLI::IsMember({65, 97, 129, 193}))->capture_default_str();
  solve->add_option("--p", sa.p)->capture_default_str();
  solve->add_option("--seed-center", sa.centers, "x,y,z (repeatable; default origin)");
  solve->add_option("--sigma", sa.sigma)->capture_default_str();
  solve->add_option("--tol", sa.tol)->capture_default_str();
  solve->add_option("--predictor", sa.predictor)->check(CLI::IsMember({"tangent", "rescale"}))->capture_default_str();
  solve->add_option("--dump", sa.dump, "raw field dump path");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "asymptotic checks on a field dump");
  verify->add_option("--field", va.field)->required()->check(CLI::ExistingFile);
  verify->add_flag("--all", va.all, "run every check, not just residual and spike count");
  verify->add_option("--p", va.p)->capture_default_str();
  verify->add_option("--sigma", va.sigma)->capture_default_str();
  verify->add_option("--r", va.r, "far-field radius")->capture_default_str();

  std::string report_dir;
  auto* report = app.add_subcommand("report", "summarize the reports in a directory");
  report->add_option("--dir", report_dir, "directory to scan (default: --out-dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  json params;
  if (name == "profile") params = {{"N", pa.N}, {"p", pa.p}, {"tol", pa.tol}, {"csv", pa.csv}};
  else if (name == "greens")
    params = {{"N", ga.N}, {"p", ga.p}, {"domain", ga.domain}, {"check", ga.check}, {"samples", ga.samples}};
  else if (name == "kr-critical")
    params = {{"N", ka.N}, {"p", ka.p}, {"domain", ka.domain}, {"k", ka.k}, {"restarts", ka.restarts}, {"weights", ka.weights}};
  else if (name == "balance")
    params = {{"mode", ba.mode}, {"k", ba.k}, {"fuzz", ba.fuzz}, {"restarts", ba.restarts}, {"N", ba.N}};
  else if (name == "solve")
    params = {{"mu", sa.mu},       {"res", sa.res}, {"p", sa.p},   {"sigma", sa.sigma}, {"tol", sa.tol},
              {"centers", sa.centers}, {"predictor", sa.predictor}, {"dump", sa.dump}};
  else if (name == "verify")
    params = {{"field", va.field}, {"all", va.all}, {"p", va.p}, {"sigma", va.sigma}, {"r", va.r}};
  else params = {{"dir", report_dir.empty() ? g.out_dir : report_dir}};
  params["seed"] = g.seed;

  try {
    set_thread_cap(resolve_threads(g.threads));
    Outcome out;
    if (name == "profile") out = run_profile(pa);
    else if (name == "greens") out = run_greens(ga, g);
    else if (name == "kr-critical") out = run_kr(ka, g);
    else if (name == "balance") out = run_balance(ba, g);
    else if (name == "solve") out = run_solve(sa);
    else if (name == "verify") out = run_verify(va);
    else out = run_report(report_dir.empty() ? g.out_dir : report_dir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return emit(g, name, params, out, secs);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
