#include <doctest.h>

#include <cmath>

#include "esqpt/level_density.hpp"
#include "esqpt/stationary_analysis.hpp"

using namespace esqpt;

namespace {

const double kS2 = std::sqrt(2.0);

DensityOptions opts(std::uint64_t n, std::uint64_t seed = 1) {
  DensityOptions o;
  o.n_samples = n;
  o.seed = seed;
  return o;
}

// Grid holding a prescribed density evaluated at bin centres.
template <typename F>
DensityGrid synthetic(F f, double error) {
  DensityGrid g;
  const int bins = 300;
  for (int i = 0; i <= bins; ++i) g.e_edges.push_back(0.01 * i);
  g.n_samples = 100'000'000;
  for (int i = 0; i < bins; ++i) {
    g.rho.push_back(f(g.center(i)));
    g.mc_error.push_back(error);
  }
  g.drho_dE.assign(bins, 0.0);
  g.drho_error.assign(bins, 0.0);
  return g;
}

}  // namespace

TEST_CASE("support of the smooth density") {
  const DensityGrid g0 = mc_density(ModelParams(kS2, 0.0), opts(1'000'000));
  const double h = g0.bin_width();
  for (int i = 0; i < g0.bins(); ++i) {
    CHECK(g0.rho[i] >= 0.0);
    if (g0.e_edges[i] > 1.0 + 1e-12 || g0.e_edges[i + 1] < -1e-12) CHECK(g0.rho[i] == 0.0);
  }
  CHECK(g0.rho[g0.bin_of(1.0 - h)] > 0.0);
  CHECK(g0.rho[g0.bin_of(0.5 * h)] > 0.0);

  const DensityGrid g2 = mc_density(ModelParams(kS2, 2.0), opts(1'000'000));
  for (int i = 0; i < g2.bins(); ++i)
    if (g2.e_edges[i] > 2.0 + g2.bin_width()) CHECK(g2.rho[i] == 0.0);
}

TEST_CASE("normalisation to the L=0 dimension") {
  for (double l : {0.3, 1.0, 2.2}) {
    // for beta0' = 1.7 the support reaches E = 5 at lambda = 2.2
    DensityOptions o = opts(1'000'000);
    o.e_max = 10.0;
    o.bins = 1000;
    const DensityGrid g = mc_density(ModelParams(1.7, l), o);
    double integral = 0.0;
    for (double r : g.rho) integral += r * g.bin_width();
    CHECK(integral == doctest::Approx(basis_dimension(50)).epsilon(0.005));
  }
}

TEST_CASE("reproducibility and statistical behaviour") {
  const ModelParams p(kS2, 0.8);
  const DensityGrid a = mc_density(p, opts(1'000'000, 5));
  const DensityGrid b = mc_density(p, opts(1'000'000, 5));
  CHECK(a.rho == b.rho);

  DensityOptions threaded = opts(1'000'000, 5);
  threaded.threads = 3;
  CHECK(mc_density(p, threaded).rho == a.rho);

  const DensityGrid c = mc_density(p, opts(1'000'000, 6));
  for (int i = 0; i < a.bins(); ++i) {
    const double e = std::hypot(a.mc_error[i], c.mc_error[i]);
    CHECK(std::abs(a.rho[i] - c.rho[i]) <= 3.0 * e + 1e-12);
  }

  const DensityGrid d = mc_density(p, opts(2'000'000, 5));
  double ea = 0.0, ed = 0.0;
  for (int i = 0; i < a.bins(); ++i) {
    ea += a.mc_error[i];
    ed += d.mc_error[i];
  }
  CHECK(ed / ea == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("argument checks") {
  DensityOptions o = opts(1000);
  o.bins = 2;
  CHECK_THROWS_AS(mc_density(ModelParams(kS2, 0.5), o), DomainError);
  DensityOptions r = opts(1000);
  r.e_max = r.e_min;
  CHECK_THROWS_AS(mc_density(ModelParams(kS2, 0.5), r), DomainError);
}

TEST_CASE("derivative vanishes in flat regions") {
  const DensityGrid g = mc_density(ModelParams(kS2, 1.6), opts(2'000'000));
  const Derivative d = density_derivative(g);
  for (int i = 0; i < g.bins(); ++i) {
    CHECK(std::isfinite(d.value[i]));
    // the smoothing kernel leaks a few bins past the upper edge of the support
    if (g.e_edges[i] > 2.1) CHECK(std::abs(d.value[i]) <= 2.0 * d.error[i] + 1e-12);
  }
}

TEST_CASE("feature detector on synthetic densities") {
  SUBCASE("kink") {
    const DensityGrid g = synthetic([](double e) { return 100.0 + 20.0 * e + 400.0 * std::max(e - 1.5, 0.0); }, 0.05);
    const auto f = detect_features(g);
    REQUIRE(f.size() == 1);
    CHECK(f[0].type == FeatureType::kJumpUp);
    CHECK(std::abs(f[0].energy - 1.5) < g.bin_width());
  }
  SUBCASE("downward jump") {
    const DensityGrid g = synthetic([](double e) { return 300.0 - 300.0 * std::max(e - 0.8, 0.0) + 30.0 * e * e; }, 0.05);
    const auto f = detect_features(g);
    REQUIRE(f.size() == 1);
    CHECK(f[0].type == FeatureType::kJumpDown);
    CHECK(std::abs(f[0].energy - 0.8) < g.bin_width());
  }
  SUBCASE("logarithmic spike") {
    const DensityGrid g = synthetic(
        [](double e) {
          const double t = e - 1.2;
          return 200.0 + 10.0 * e - (t == 0.0 ? 0.0 : 40.0 * t * std::log(std::abs(t)));
        },
        0.05);
    const auto f = detect_features(g);
    REQUIRE_FALSE(f.empty());
    CHECK(f[0].type == FeatureType::kSpikeUp);
    CHECK(std::abs(f[0].energy - 1.2) < g.bin_width());
    for (std::size_t k = 1; k < f.size(); ++k) CHECK(std::abs(f[k].energy - 1.2) < 2 * g.bin_width());
  }
  SUBCASE("smooth density has no features") {
    const DensityGrid g = synthetic([](double e) { return 50.0 + 30.0 * std::sin(e); }, 0.05);
    CHECK(detect_features(g).empty());
  }
}

TEST_CASE("detected features at three cuts") {
  struct Cut {
    double lambda;
    FeatureType type;
    int index_r;
  };
  // (i) spherical minimum, (ii) saddle between the degenerate minima, (iii) r = 2 saddle
  for (const Cut& c : {Cut{0.2, FeatureType::kJumpUp, 0}, Cut{1.0, FeatureType::kSpikeUp, 1}, Cut{1.6, FeatureType::kJumpDown, 2}}) {
    const ModelParams p(kS2, c.lambda);
    const DensityGrid g = mc_density(p, opts(10'000'000));
    const auto feats = detect_features(g);
    const StationaryCensus census = find_stationary_points(p);
    bool matched = false;
    for (const auto& s : census.points) {
      if (s.index_r != c.index_r) continue;
      for (const auto& f : feats) matched = matched || (f.type == c.type && std::abs(f.energy - s.energy) <= g.bin_width());
    }
    CHECK_MESSAGE(matched, "lambda = " << c.lambda);
  }
}

TEST_CASE("phase diagram") {
  DensityOptions o = opts(300'000, 3);
  const std::vector<double> grid{0.2, 1.0, 2.0};
  const PhaseDiagram a = phase_diagram(kS2, grid, o);
  const PhaseDiagram b = phase_diagram(kS2, grid, o);
  CHECK(a.drho_dE == b.drho_dE);
  CHECK(a.drho_dE.rows() == 3);
  CHECK(a.drho_dE.cols() == o.bins);
  for (int r = 0; r < 3; ++r) {
    // interior points can lie above the boundary maximum
    double emax = boundary_extrema_closed_form(grid[r]).second;
    for (const auto& s : find_stationary_points(ModelParams(kS2, grid[r])).points) emax = std::max(emax, s.energy);
    const double scale = a.drho_dE.row(r).cwiseAbs().maxCoeff();
    for (int k = 0; k < o.bins; ++k)
      if (a.e_centers[k] > emax + 0.1) {
        CHECK(a.rho(r, k) == 0.0);
        CHECK(std::abs(a.drho_dE(r, k)) <= 1e-9 * scale);
      }
  }
  CHECK_THROWS_AS(phase_diagram(kS2, {1.0, 0.5}, o), DomainError);
}

TEST_CASE("smoothed flow") {
  std::vector<double> centers;
  for (int k = 0; k < 300; ++k) centers.push_back(0.005 + 0.01 * k);
  DiagonalizeOptions left, right;
  left.side = SlopeSide::kLeft;
  right.side = SlopeSide::kRight;
  const ModelParams p(kS2, 1.0);
  const FlowGrid fl = smoothed_flow({diagonalize(p, 30, left)}, centers, 0.05);
  const FlowGrid fr = smoothed_flow({diagonalize(p, 30, right)}, centers, 0.05);
  double diff = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) diff = std::max(diff, std::abs(fl.jbar[k] - fr.jbar[k]));
  CHECK(diff > 1.0);

  SpectrumResult ground = diagonalize(ModelParams(kS2, 0.5), 30);
  ground.eigenvalues.conservativeResize(1);
  ground.slopes.conservativeResize(1);
  ground.nd_expectation.conservativeResize(1);
  ground.degenerate.resize(1);
  const FlowGrid g0 = smoothed_flow({ground}, centers, 0.05);
  for (double j : g0.jbar) CHECK(std::abs(j) < 1e-12);
  for (std::size_t k = 0; k < centers.size(); ++k)
    if (fl.rhobar[k] > 0.0) CHECK(std::isfinite(fl.phibar[k]));

  const ModelParams q(kS2, 0.6);
  CHECK_THROWS_AS(smoothed_flow({diagonalize(q, 20), diagonalize(q, 30), diagonalize(q, 20)}, centers, 0.05, true),
                  DomainError);
}

TEST_CASE("continuity equation") {
  std::vector<double> centers;
  for (int k = 0; k < 300; ++k) centers.push_back(0.005 + 0.01 * k);
  const ContinuityCheck c = continuity_check(kS2, 0.5, 50, 0.05, centers);
  CHECK(c.max_djbar_dE > 0.0);
  CHECK(c.max_residual < 0.1 * c.max_djbar_dE);
}

TEST_CASE("counting comparison bookkeeping") {
  const ModelParams p(kS2, 0.5);
  const SpectrumResult s = diagonalize(p, 50);
  const DensityGrid g = mc_density(p, opts(1'000'000));
  const CountingComparison c = compare_counting(s, g, 0.2, 2.8);
  CHECK(c.dimension == basis_dimension(50));
  CHECK_FALSE(c.energies.empty());
  for (std::size_t k = 1; k < c.energies.size(); ++k) {
    CHECK(c.quantum[k] >= c.quantum[k - 1]);
    CHECK(c.semiclassical[k] >= c.semiclassical[k - 1] - 1e-9);
  }
  CHECK(c.quantum.back() <= c.dimension);
}
