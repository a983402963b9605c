#include <doctest.h>

#include <cmath>
#include <random>

#include "esqpt/classical_limit.hpp"
#include "esqpt/excited_surfaces.hpp"
#include "fock_oracle.hpp"

using namespace esqpt;

namespace {

const double kS2 = std::sqrt(2.0);

// <N H> / (2 N^2) in a normalised oracle state.
double oracle_energy(double b, double l, const oracle::State& st, int N) {
  const oracle::State s = oracle::normalized(st);
  return oracle::dot(s, oracle::apply_nh(b, l, s)) / (2.0 * N * N);
}

oracle::State axial_state(int N, int n_gamma, double beta) {
  oracle::State s = oracle::vacuum();
  for (int k = 0; k < n_gamma / 2; ++k) s = oracle::create(oracle::dm(2), oracle::create(oracle::dm(-2), s));
  return oracle::raise_orbital(oracle::condensate(beta, 0.0), N - n_gamma, s);
}

}  // namespace

TEST_CASE("intrinsic bosons are orthonormal") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> b(0.0, kS2), g(0.0, 2 * M_PI);
  for (int k = 0; k < 200; ++k) {
    const IntrinsicBosons ib = intrinsic_bosons(b(rng), g(rng));
    Eigen::Matrix<double, 6, 3> m;
    m << ib.condensate, ib.beta_mode, ib.gamma_mode;
    CHECK((m.transpose() * m - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(ib.condensate[kModeS] == doctest::Approx(std::sqrt(1.0 - ib.beta * ib.beta / 2.0)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(intrinsic_bosons(1.5, 0.0), DomainError);
}

TEST_CASE("condensate energy against the Fock oracle, N <= 8") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> b(0.0, kS2), g(0.0, 2 * M_PI), lam(0.0, 3.0);
  for (int N = 1; N <= 8; ++N)
    for (int k = 0; k < 6; ++k) {
      const double beta = b(rng), gamma = g(rng), l = lam(rng), b0 = k % 2 ? kS2 : 1.7;
      const double ref = oracle_energy(b0, l, oracle::raise_orbital(oracle::condensate(beta, gamma), N, oracle::vacuum()), N);
      CHECK(std::abs(condensate_energy(ModelParams(b0, l), N, beta, gamma) - ref) < 1e-10);
    }
}

TEST_CASE("excited energy against the Fock oracle, N <= 8, every even N_gamma") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> b(0.0, kS2);
  for (int N = 2; N <= 8; ++N)
    for (int ng = 0; ng <= N; ng += 2)
      for (int k = 0; k < 20; ++k) {
        const double beta = b(rng), l = 0.15 * k, b0 = k % 2 ? kS2 : 1.7;
        const double ref = oracle_energy(b0, l, axial_state(N, ng, beta), N);
        CHECK(std::abs(excited_energy(ModelParams(b0, l), N, ng, beta) - ref) < 1e-10);
      }
}

TEST_CASE("excited energy reductions and argument checks") {
  const ModelParams p(1.7, 0.6);
  for (double beta : {0.0, 0.4, 1.1}) CHECK(excited_energy(p, 12, 0, beta) == doctest::Approx(condensate_energy(p, 12, beta, 0.0)).epsilon(1e-14));
  CHECK_THROWS_AS(excited_energy(p, 12, 3, 0.5), DomainError);
  CHECK_THROWS_AS(excited_energy(p, 12, 14, 0.5), DomainError);
  CHECK_THROWS_AS(condensate_energy(p, 12, 1.6, 0.0), DomainError);
}

TEST_CASE("spherical condensate energy") {
  for (int N : {2, 5, 8}) {
    CHECK(condensate_energy(ModelParams(kS2, 0.7), N, 0.0, 0.0) == 0.0);
    const double ref = oracle_energy(kS2, 2.0, oracle::raise_orbital(oracle::condensate(0.0, 0.0), N, oracle::vacuum()), N);
    CHECK(condensate_energy(ModelParams(kS2, 2.0), N, 0.0, 0.0) == doctest::Approx(ref).epsilon(1e-12));
    // xi beta0'^4 <s+ s+ s s> / (2 N^2) = (1 - 1/N) times the classical value 2
    CHECK(ref == doctest::Approx(2.0 * (1.0 - 1.0 / N)).epsilon(1e-12));
  }
}

TEST_CASE("1/N convergence to the classical energy") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> b(0.1, 1.3), g(0.0, 2 * M_PI);
  for (int k = 0; k < 10; ++k) {
    const ModelParams p(k % 2 ? kS2 : 1.7, 0.3 * k);
    const double beta = b(rng), gamma = g(rng);
    const double cl = eval_H(p, PhasePoint(beta * std::cos(gamma), beta * std::sin(gamma), 0, 0));
    std::vector<double> c;
    for (int N : {10, 20, 40, 80}) c.push_back(N * (condensate_energy(p, N, beta, gamma) - cl));
    // the coefficient of 1/N settles
    CHECK(std::abs(c[3] - c[2]) < 1e-9 + 1e-12 * std::abs(c[3]));
    CHECK(std::abs(c[1] - c[0]) < 1e-9 + 1e-12 * std::abs(c[1]));
  }
  // extrapolated energy of the deformed minimum at lambda = 1
  const ModelParams p(kS2, 1.0);
  const double b0 = 2.0 / std::sqrt(3.0);
  const double e1 = condensate_energy(p, 1000, b0, 0.0), e2 = condensate_energy(p, 2000, b0, 0.0);
  CHECK(std::abs(2.0 * e2 - e1) < 1e-9);
}

TEST_CASE("surface stationary points at lambda = 1") {
  const auto pts = surface_stationary_points(ModelParams(kS2, 1.0), 5000, 0);
  bool near0 = false, deformed = false;
  for (const auto& q : pts) {
    if (q.kind == SurfacePointKind::kMaximum) continue;
    CHECK(std::abs(q.energy) < 1e-3);
    near0 = near0 || q.beta < 1e-3;
    deformed = deformed || std::abs(q.beta - 2.0 / std::sqrt(3.0)) < 1e-2;
  }
  CHECK(near0);
  CHECK(deformed);
}

TEST_CASE("gamma quanta favour the spherical minimum") {
  const ModelParams p(kS2, 4.0 / 3.0);
  const int N = 50;
  double last = -1e9;
  for (int ng : {0, 2, 4, 6}) {
    // at the antispinodal beta = 0 is only marginally stationary for N_gamma = 0
    const double sph = excited_energy(p, N, ng, 0.0);
    double def = 1e9;
    for (const auto& q : surface_stationary_points(p, N, ng))
      if (q.kind != SurfacePointKind::kMaximum && q.beta > 1e-6) def = std::min(def, q.energy);
    REQUIRE(def < 1e9);
    // deformed minus spherical grows: the spherical well deepens relatively
    CHECK(def - sph > last);
    last = def - sph;
  }
}

TEST_CASE("excited phase evolution is retarded") {
  // lambda where the spherical and deformed minima of the surface degenerate
  auto crossing = [](int ng) {
    double lo = 0.8, hi = 1.6;
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto pts = surface_stationary_points(ModelParams(kS2, mid), 50, ng);
      double sph = NAN, def = 1e9;
      for (const auto& q : pts) {
        if (q.kind == SurfacePointKind::kMaximum) continue;
        if (q.beta < 1e-6) sph = q.energy;
        else def = std::min(def, q.energy);
      }
      if (!std::isfinite(sph) || def < sph) hi = mid;
      else lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double c0 = crossing(0), c4 = crossing(4);
  CHECK(c4 > 1.0);
  CHECK(c4 > c0);
}

TEST_CASE("excited surface grid") {
  const ExcitedSurface s = excited_surface(ModelParams(kS2, 0.9), 50, 2, 101);
  CHECK(s.beta_grid.size() == 101);
  CHECK(s.beta_grid.back() == doctest::Approx(kS2));
  for (std::size_t i = 0; i < s.beta_grid.size(); ++i)
    CHECK(s.energies[i] == doctest::Approx(excited_energy(s.params, 50, 2, s.beta_grid[i])).epsilon(1e-14));
}

TEST_CASE("phonon ratio") {
  CHECK(phonon_ratio(2.0) == doctest::Approx(1.0));
  CHECK(phonon_ratio(0.5) == doctest::Approx(0.0));
  CHECK(phonon_ratio(1.5) == doctest::Approx(2.0 / 3.0));
}
