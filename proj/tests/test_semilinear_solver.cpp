#include <doctest.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "plasma_spike/field_io.hpp"
#include "plasma_spike/semilinear_solver.hpp"

using namespace plasma_spike;

namespace {

const RadialProfile& profile() {
  static const RadialProfile pr = shoot(make_config(3, 2.0));
  return pr;
}

std::shared_ptr<const BallGrid> grid65() {
  static const auto g = build_grid(65);
  return g;
}

// μ at which the spike radius εR₀ spans `cells` grid cells.
double mu_for_cells(const BallGrid& g, double cells) {
  const double eps = cells * g.h() / profile().R0;
  return 1.0 / (eps * eps);
}

const SolveResult& centered_solution() {
  static const SolveResult r = [] {
    const auto g = grid65();
    return solve_semilinear(seed_spike(g, Pointd::Zero(3), profile(), 300.0), 2.0);
  }();
  return r;
}

}  // namespace

TEST_SUITE("semilinear_solver") {
  TEST_CASE("seeding") {
    const auto g = grid65();
    const double mu = mu_for_cells(*g, 10.0);
    const GridField f = seed_spike(g, Pointd::Zero(3), profile(), mu);
    CHECK(f.epsilon * f.epsilon * f.mu == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.max_value() == glue_w0(profile()).peak());
    CHECK(f.values(g->node(g->half(), g->half(), g->half())) == glue_w0(profile()).peak());
    CHECK(f.values(g->node(0, 0, 0)) == 0.0);
    CHECK(f.values(g->node(g->half(), g->half(), g->n() - 1)) == 0.0);

    const SpikeReport rep = extract_spikes(f, 2.0);
    CHECK(rep.mass == doctest::Approx(profile().M_p0).epsilon(0.05));

    CHECK_THROWS_AS(seed_spike(g, make_point({1.2, 0, 0}), profile(), mu), std::invalid_argument);
    const double too_large = 1.01 * max_resolvable_mu(*g, profile());
    CHECK_THROWS_WITH_AS(seed_spike(g, Pointd::Zero(3), profile(), too_large), doctest::Contains("must not exceed"),
                         std::invalid_argument);
    CHECK_NOTHROW(seed_spike(g, Pointd::Zero(3), profile(), max_resolvable_mu(*g, profile())));
    CHECK_THROWS_AS(zero_field(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(zero_field(g, -5.0), std::invalid_argument);
  }

  TEST_CASE("trivial branch") {
    const GridField zero = zero_field(grid65(), 300.0);
    const SolveResult r = solve_semilinear(zero, 2.0);
    CHECK(r.outcome == SolveOutcome::Vanishing);
    CHECK(r.iterations == 0);
    CHECK(r.field.values.cwiseAbs().maxCoeff() == 0.0);

    GridField small = zero;
    const auto g = grid65();
    for (Eigen::Index u = 0; u < g->unknown_count(); ++u) small.values(g->node_of(static_cast<int>(u))) = 0.5;
    const SolveResult r2 = solve_semilinear(small, 2.0);
    CHECK(r2.outcome == SolveOutcome::Vanishing);
    CHECK(r2.field.values.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(extract_spikes(r2.field, 2.0).centers.empty());
  }

  TEST_CASE("centered spike") {
    const SolveResult& r = centered_solution();
    REQUIRE(r.outcome == SolveOutcome::Converged);
    CHECK(r.residual <= 1e-10);
    CHECK(semilinear_residual(r.field, 2.0).lpNorm<Eigen::Infinity>() == r.residual);
    CHECK(r.nonnegative);
    CHECK(r.min_value >= -10.0 * grid65()->h() * grid65()->h());
    CHECK(r.field.max_value() > 1.0);

    const SpikeReport rep = extract_spikes(r.field, 2.0, 0.1, profile().R0);
    REQUIRE(rep.centers.size() == 1);
    CHECK(rep.centers[0].norm() <= 1e-12);
    CHECK(rep.heights[0] >= 1.1);
    REQUIRE(rep.components.size() == 1);
    CHECK(rep.containment_ok);
    CHECK(rep.components[0].center_index == 0);
    CHECK(rep.components[0].mass == doctest::Approx(rep.mass).epsilon(1e-12));
  }

  TEST_CASE("converged field is a fixed point") {
    const SolveResult& r = centered_solution();
    const SolveResult again = solve_semilinear(r.field, 2.0);
    CHECK(again.iterations == 0);
    CHECK((again.field.values - r.field.values).cwiseAbs().maxCoeff() <= 1e-14);
  }

  TEST_CASE("cube symmetry of the centered spike") {
    const SolveResult& r = centered_solution();
    const auto g = grid65();
    const int n = g->n();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double v = r.field.at(i, j, k);
          std::array<int, 3> c{i, j, k};
          std::sort(c.begin(), c.end());
          do {
            for (int flips = 0; flips < 8; ++flips) {
              const int a = (flips & 1) ? n - 1 - c[0] : c[0];
              const int b = (flips & 2) ? n - 1 - c[1] : c[1];
              const int d = (flips & 4) ? n - 1 - c[2] : c[2];
              worst = std::max(worst, std::abs(r.field.at(a, b, d) - v));
            }
          } while (std::next_permutation(c.begin(), c.end()));
        }
      }
    }
    CHECK(worst <= 1e-9);
  }

  TEST_CASE("detection threshold monotonicity") {
    const SolveResult& r = centered_solution();
    std::size_t prev = extract_spikes(r.field, 2.0, 0.0).centers.size();
    for (double sigma : {0.05, 0.1, 0.5, 1.0, 2.0, 5.0}) {
      const std::size_t count = extract_spikes(r.field, 2.0, sigma).centers.size();
      CHECK(count <= prev);
      prev = count;
    }
    CHECK(prev == 0);
  }

  TEST_CASE("continuation") {
    const auto g = grid65();
    CHECK_THROWS_AS(continue_in_mu(g, {Pointd::Zero(3)}, profile(), {300.0, 200.0}), std::invalid_argument);
    CHECK_THROWS_AS(continue_in_mu(g, {Pointd::Zero(3)}, profile(), {}), std::invalid_argument);

    const auto single = continue_in_mu(g, {Pointd::Zero(3)}, profile(), {300.0});
    REQUIRE(single.ok());
    CHECK((single.steps[0].field.values - centered_solution().field.values).cwiseAbs().maxCoeff() == 0.0);

    for (Predictor pred : {Predictor::Tangent, Predictor::Rescale}) {
      ContinuationOptions opts;
      opts.predictor = pred;
      const auto run = continue_in_mu(g, {Pointd::Zero(3)}, profile(), {100.0, 200.0, 300.0}, opts);
      REQUIRE(run.ok());
      REQUIRE(run.steps.size() == 3);
      for (const auto& s : run.steps) CHECK(s.residual <= 1e-10);
      CHECK((run.steps.back().field.values - centered_solution().field.values).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("seeded solve continues from a resolved start") {
    const auto g = grid65();
    const double target = 1.5 * comfortable_seed_mu(*g, profile());
    const auto run = solve_seeded(g, {Pointd::Zero(3)}, profile(), target);
    REQUIRE(run.ok());
    CHECK(run.steps.back().field.mu == target);
    CHECK(run.steps.front().field.mu == doctest::Approx(comfortable_seed_mu(*g, profile())));
  }

  TEST_CASE("field dump format") {
    const GridField& f = centered_solution().field;
    const std::string path = "field_dump_test.bin";
    write_field(path, f);
    CHECK(field_header(65, 300.0) == "plasma-field v1 res=65 mu=300\n");
    CHECK(field_header(129, 0.1) == "plasma-field v1 res=129 mu=0.10000000000000001\n");
    std::ifstream raw(path, std::ios::binary);
    std::string header;
    std::getline(raw, header);
    CHECK(header == "plasma-field v1 res=65 mu=300");
    unsigned char bytes[8];
    raw.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
    CHECK(std::bit_cast<double>(bits) == f.values(0));

    const GridField back = read_field(path);
    CHECK(back.grid->n() == 65);
    CHECK(back.mu == f.mu);
    CHECK((back.values - f.values).cwiseAbs().maxCoeff() == 0.0);

    std::ofstream(path, std::ios::binary) << "plasma-field v2 res=65 mu=1\n";
    CHECK_THROWS_AS(read_field(path), std::runtime_error);
    std::ofstream(path, std::ios::binary) << "plasma-field v1 res=65 mu=1\n" << "abc";
    CHECK_THROWS_AS(read_field(path), std::runtime_error);
    std::remove(path.c_str());
  }
}

namespace {

// Centered spike in the continuum ball for p = 2: v - 1 = A u(r/ρ) inside the
// plasma, B(1/r - 1) outside; matching value and flux gives μρ² = |u'(1)|(1-ρ).
double continuum_peak(double mu) {
  const double s = std::abs(profile().uprime1);
  const double rho = (-s + std::sqrt(s * s + 4.0 * mu * s)) / (2.0 * mu);
  return 1.0 + profile().a_star / (s * (1.0 - rho));
}

double seeded_height(int res, double mu) {
  const auto run = solve_seeded(build_grid(res), {Pointd::Zero(3)}, profile(), mu);
  REQUIRE(run.ok());
  const SpikeReport rep = extract_spikes(run.steps.back().field, 2.0);
  REQUIRE(rep.heights.size() == 1);
  return rep.heights[0];
}

struct RefinementPair {
  double h97 = 0.0;
  double h129 = 0.0;
};

const RefinementPair& heights_at_1e3() {
  static const RefinementPair hp{seeded_height(97, 1e3), seeded_height(129, 1e3)};
  return hp;
}

}  // namespace

TEST_SUITE("pde_convergence") {
  TEST_CASE("spike height converges to the continuum ball solution") {
    const RefinementPair& hp = heights_at_1e3();
    const double exact = continuum_peak(1e3);
    CHECK(exact == doctest::Approx(3.0001).epsilon(1e-4));
    const double e97 = std::abs(hp.h97 - exact);
    const double e129 = std::abs(hp.h129 - exact);
    MESSAGE("height 97: " << hp.h97 << "  129: " << hp.h129 << "  continuum: " << exact);
    CHECK(e129 < e97);
    // h ratio 4/3; second order gives 1.78
    CHECK(e97 / e129 >= 1.5);
    CHECK(e97 / e129 <= 2.5);
  }
}

TEST_SUITE("pde_refinement") {
  TEST_CASE("spike height at mu 1e3 changes at most 2% from resolution 97 to 129") {
    const RefinementPair& hp = heights_at_1e3();
    const double change = std::abs(hp.h97 - hp.h129) / hp.h129;
    MESSAGE("relative height change: " << change);
    CHECK(change <= 0.02);
  }
}
