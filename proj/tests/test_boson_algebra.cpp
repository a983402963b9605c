#include <doctest.h>

#include <cmath>
#include <random>

#include "esqpt/boson_algebra.hpp"
#include "esqpt/classical_limit.hpp"
#include "esqpt/clebsch_gordan.hpp"
#include "esqpt/ibm_quantum.hpp"
#include "fock_oracle.hpp"

using namespace esqpt;

namespace {

Monomial mono(std::vector<int> c, std::vector<int> a) { return Monomial{std::move(c), std::move(a)}; }

// Apply a normal-ordered expression to an oracle state.
oracle::State act(const BosonExpr& e, const oracle::State& in) {
  oracle::State out;
  for (const auto& [m, c] : e.terms()) {
    oracle::State s = in;
    for (auto it = m.annihilators.rbegin(); it != m.annihilators.rend(); ++it) s = oracle::annihilate(*it, s);
    for (auto it = m.creators.rbegin(); it != m.creators.rend(); ++it) s = oracle::create(*it, s);
    oracle::axpy(c.real(), s, out);
  }
  return out;
}

// Apply a raw word right to left.
oracle::State act(const Word& w, const oracle::State& in) {
  oracle::State s = in;
  for (auto it = w.rbegin(); it != w.rend(); ++it) s = it->dagger ? oracle::create(it->mode, s) : oracle::annihilate(it->mode, s);
  return s;
}

}  // namespace

TEST_CASE("normal_order: single commutator") {
  const BosonExpr e = normal_order(Word{{kModeS, false}, {kModeS, true}});
  CHECK(e.terms().size() == 2);
  CHECK(e.coefficient(mono({0}, {0})) == Complex(1.0));
  CHECK(e.coefficient(mono({}, {})) == Complex(1.0));
}

TEST_CASE("normal_order: d0 d0+ d0 d0+") {
  const int m = d_mode(0);
  const BosonExpr e = normal_order(Word{{m, false}, {m, true}, {m, false}, {m, true}});
  CHECK(e.terms().size() == 3);
  CHECK(e.coefficient(mono({m, m}, {m, m})) == Complex(1.0));
  CHECK(e.coefficient(mono({m}, {m})) == Complex(3.0));
  CHECK(e.coefficient(mono({}, {})) == Complex(1.0));
}

TEST_CASE("normal_order: normal-ordered input unchanged, idempotent, linear") {
  const RawExpr raw = parse_operator("2.0 * s+ s+ d0 d0 - d-2+ d2");
  const BosonExpr e = normal_order(raw);
  CHECK(e.coefficient(mono({0, 0}, {3, 3})) == Complex(2.0));
  CHECK(e.coefficient(mono({1}, {5})) == Complex(-1.0));
  CHECK(e.terms().size() == 2);

  const RawExpr a = parse_operator("d1 d1+ s s+");
  const RawExpr b = parse_operator("0.5 d-1+ d-1 s d2+");
  RawExpr ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  CHECK((normal_order(ab) - (normal_order(a) + normal_order(b))).pruned().empty());

  const BosonExpr once = normal_order(ab);
  RawExpr again;
  for (const auto& [m, c] : once.terms()) {
    Word w;
    for (int k : m.creators) w.push_back({k, true});
    for (int k : m.annihilators) w.push_back({k, false});
    again.push_back({c, w});
  }
  CHECK(normal_order(again).distance(once) == 0.0);
}

TEST_CASE("parser: imaginary factor and minus signs") {
  const BosonExpr e = normal_order(parse_operator("- i d2+ d-2 + 3 * s+ s"));
  CHECK(e.coefficient(mono({5}, {1})) == Complex(0.0, -1.0));
  CHECK(e.coefficient(mono({0}, {0})) == Complex(3.0));
  CHECK_THROWS_AS(parse_operator("d3+"), DomainError);
}

TEST_CASE("normal_order preserves matrix elements up to 5 quanta") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> mode(0, 5), len(1, 5), flip(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    Word w;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) w.push_back({mode(rng), flip(rng) == 1});
    const BosonExpr e = normal_order(w);
    for (int q = 0; q <= 5 - n; ++q) {
      for (const auto& occ : oracle::fock_basis(q)) {
        const oracle::State in = oracle::basis_state(occ);
        oracle::State diff = act(w, in);
        oracle::axpy(-1.0, act(e, in), diff);
        double worst = 0.0;
        for (const auto& [o, v] : diff) worst = std::max(worst, std::abs(v));
        CHECK(worst < 1e-12);
      }
    }
  }
}

TEST_CASE("hermiticity and number flags are verified") {
  BosonExpr h = normal_order(parse_operator("s+ d0 + d0+ s"));
  CHECK_NOTHROW(h.mark_hermitian());
  CHECK(h.hermitian_flag());
  BosonExpr g = normal_order(parse_operator("s+ d0"));
  CHECK_THROWS_AS(g.mark_hermitian(), DomainError);
  BosonExpr k = normal_order(parse_operator("s+ s+"));
  CHECK_THROWS_AS(k.mark_number_conserving(), DomainError);
}

TEST_CASE("Clebsch-Gordan against exact values") {
  for (int m1 = -2; m1 <= 2; ++m1)
    for (int m2 = -2; m2 <= 2; ++m2) {
      if (std::abs(m1 + m2) > 2) continue;
      CHECK(clebsch_gordan(2, m1, 2, m2, 2, m1 + m2) == doctest::Approx(oracle::cg22(m1, m2)).epsilon(1e-15));
    }
  CHECK(clebsch_gordan(1, 0, 1, 0, 2, 0) == doctest::Approx(std::sqrt(6.0) / 3.0).epsilon(1e-15));
  CHECK(clebsch_gordan(2, 1, 2, -1, 0, 0) == doctest::Approx(-std::sqrt(5.0) / 5.0).epsilon(1e-15));
  CHECK(clebsch_gordan(2, 2, 2, -1, 3, 1) == doctest::Approx(std::sqrt(30.0) / 10.0).epsilon(1e-15));
  CHECK(clebsch_gordan(3, -1, 2, 1, 4, 0) == doctest::Approx(-std::sqrt(70.0) / 14.0).epsilon(1e-15));
  CHECK(clebsch_gordan(4, 2, 2, -2, 6, 0) == doctest::Approx(std::sqrt(33.0) / 33.0).epsilon(1e-15));
  CHECK(clebsch_gordan(8, 3, 8, -3, 8, 0) == doctest::Approx(73.0 * std::sqrt(56810.0) / 56810.0).epsilon(1e-15));
  CHECK(clebsch_gordan(2, 1, 2, 1, 4, 2) == doctest::Approx(2.0 * std::sqrt(7.0) / 7.0).epsilon(1e-15));
  CHECK(clebsch_gordan(2, 1, 2, 1, 1, 1) == 0.0);
  CHECK(clebsch_gordan(2, 1, 2, 0, 2, 2) == 0.0);
}

TEST_CASE("couple: scalar partner gives the plain product") {
  const TensorOp sd = couple(TensorOp::s_dagger(), TensorOp::d_dagger(), 2);
  for (int mu = -2; mu <= 2; ++mu) {
    const BosonExpr expected = BosonExpr::creator(kModeS) * BosonExpr::creator(d_mode(mu));
    CHECK(sd[mu].distance(expected) < 1e-15);
  }
  CHECK_THROWS_AS(couple(TensorOp::d_dagger(), TensorOp::d_dagger(), 5), DomainError);
}

TEST_CASE("tilde is an involution") {
  const TensorOp d = TensorOp::d_dagger();
  const TensorOp back = d.tilde().tilde();
  for (int mu = -2; mu <= 2; ++mu) CHECK(back[mu].distance(d[mu]) == 0.0);
}

TEST_CASE("scalar products") {
  BosonExpr nd;
  for (int mu = -2; mu <= 2; ++mu) nd += BosonExpr::number(d_mode(mu));
  CHECK(scalar_product(TensorOp::d_dagger(), TensorOp::d_tilde()).distance(nd) < 1e-14);

  const double b = 1.3;
  const TensorOp dp = d_pair_dagger(b, 0.0);
  const BosonExpr dd = scalar_product(dp, dp.conjugate_tilde());
  const BosonExpr expected = 2.0 * b * b * (BosonExpr::number(kModeS) * nd);
  CHECK(dd.distance(expected) < 1e-13);
}

TEST_CASE("D+.D~ at zeta = 0 matches the Fock oracle up to N = 3") {
  const double b = 1.3;
  const TensorOp dp = d_pair_dagger(b, 0.0);
  const BosonExpr dd = scalar_product(dp, dp.conjugate_tilde());
  for (int N = 0; N <= 3; ++N) {
    for (const auto& occ : oracle::fock_basis(N)) {
      const oracle::State in = oracle::basis_state(occ);
      oracle::State ref;
      for (int mu = -2; mu <= 2; ++mu) {
        const oracle::Pair p = oracle::d_pair(b, 0.0, mu);
        oracle::axpy(1.0, p.raise(p.lower(in)), ref);
      }
      oracle::State diff = act(dd, in);
      oracle::axpy(-1.0, ref, diff);
      for (const auto& [o, v] : diff) CHECK(std::abs(v) < 1e-12);
    }
  }
}

TEST_CASE("classical_map: generator dictionary on the L=0 plane") {
  BosonExpr nd;
  for (int mu = -2; mu <= 2; ++mu) nd += BosonExpr::number(d_mode(mu));
  const PhaseFunction fd = classical_map(nd, 2);
  const PhaseFunction fs = classical_map(BosonExpr::number(kModeS), 2);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int k = 0; k < 50; ++k) {
    const double x = u(rng), y = u(rng), px = u(rng), py = u(rng);
    const double r2 = x * x + y * y + px * px + py * py;
    CHECK(fd(x, y, px, py) == doctest::Approx(0.5 * r2).epsilon(1e-14));
    // fraction of s bosons: the per-boson counterpart of n_s = N - n_d
    CHECK(fs(x, y, px, py) == doctest::Approx(1.0 - 0.5 * r2).epsilon(1e-14));
  }
  CHECK_THROWS_AS(classical_map(BosonExpr::creator(0), 2), DomainError);
  CHECK_THROWS_AS(classical_map(nd, 3), DomainError);
}

TEST_CASE("classical_map of N H reproduces the polar classical Hamiltonian") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double lambda : {0.0, 0.4, 1.0}) {
    const double b = 1.7, zeta = lambda;
    const PhaseFunction f = classical_map(hamiltonian_expr(ModelParams(b, lambda)), 2, ClassicalScaling::kTwoBodyOverN);
    for (int k = 0; k < 100; ++k) {
      // random point of the ball with beta > 0
      const double beta = 0.05 + 1.2 * u(rng), gamma = 2.0 * M_PI * u(rng);
      const double pb = 0.5 * (u(rng) - 0.5), pg = 0.4 * beta * (u(rng) - 0.5);
      const double T = pb * pb + pg * pg / (beta * beta);
      const double hd = 0.5 * (T + beta * beta);
      if (hd >= 1.0) continue;
      const double h1 = hd * hd + b * b * (1.0 - hd) * hd + zeta * zeta * pg * pg +
                        zeta * b * std::sqrt(0.5 * (1.0 - hd)) *
                            ((pg * pg / beta - beta * pb * pb - beta * beta * beta) * std::cos(3 * gamma) +
                             2.0 * pb * pg * std::sin(3 * gamma));
      const double x = beta * std::cos(gamma), y = beta * std::sin(gamma);
      const double px = pb * std::cos(gamma) - pg / beta * std::sin(gamma);
      const double py = pb * std::sin(gamma) + pg / beta * std::cos(gamma);
      // The generator map gives <N H>/N^2, twice the energy per boson convention.
      CHECK(0.5 * f(x, y, px, py) == doctest::Approx(h1).epsilon(1e-12));
    }
  }
}
