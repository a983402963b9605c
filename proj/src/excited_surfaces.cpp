#include "esqpt/excited_surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "esqpt/ibm_quantum.hpp"

namespace esqpt {

IntrinsicBosons intrinsic_bosons(double beta, double gamma) {
  if (!(beta >= 0.0) || beta > std::sqrt(2.0) + 1e-12) throw DomainError("intrinsic_bosons: beta outside [0, sqrt 2]");
  const double s = std::sqrt(std::max(0.0, 1.0 - 0.5 * beta * beta));
  const double c = std::cos(gamma), sn = std::sin(gamma), r2 = std::sqrt(2.0);
  IntrinsicBosons b;
  b.beta = beta;
  b.gamma = gamma;
  b.condensate.setZero();
  b.beta_mode.setZero();
  b.gamma_mode.setZero();
  b.condensate[kModeS] = s;
  b.condensate[d_mode(0)] = beta * c / r2;
  b.condensate[d_mode(-2)] = b.condensate[d_mode(2)] = beta * sn / 2.0;
  b.beta_mode[kModeS] = -beta / r2;
  b.beta_mode[d_mode(0)] = s * c;
  b.beta_mode[d_mode(-2)] = b.beta_mode[d_mode(2)] = s * sn / r2;
  b.gamma_mode[d_mode(0)] = -sn;
  b.gamma_mode[d_mode(-2)] = b.gamma_mode[d_mode(2)] = c / r2;
  return b;
}

int OrbitalState::total() const {
  int n = 0;
  for (int k : occupations) n += k;
  return n;
}

double orbital_expectation(const BosonExpr& expr, const OrbitalState& st) {
  if (st.orbitals.size() != st.occupations.size()) throw DomainError("orbital_expectation: size mismatch");
  // Only occupied orbitals contribute.
  std::vector<const ModeVector*> u;
  std::vector<double> n;
  for (std::size_t a = 0; a < st.orbitals.size(); ++a) {
    if (st.occupations[a] < 0) throw DomainError("orbital_expectation: negative occupation");
    if (st.occupations[a] == 0) continue;
    u.push_back(&st.orbitals[a]);
    n.push_back(st.occupations[a]);
  }
  const std::size_t m = u.size();
  double total = 0.0;
  for (const auto& [mono, c] : expr.terms()) {
    const auto& cr = mono.creators;
    const auto& an = mono.annihilators;
    if (cr.size() != an.size()) continue;  // vanishes in a number eigenstate
    double v = 0.0;
    if (cr.empty()) {
      v = 1.0;
    } else if (cr.size() == 1) {
      for (std::size_t a = 0; a < m; ++a) v += n[a] * (*u[a])[cr[0]] * (*u[a])[an[0]];
    } else if (cr.size() == 2) {
      const int i = cr[0], j = cr[1], k = an[0], l = an[1];
      for (std::size_t a = 0; a < m; ++a) {
        const ModeVector& ua = *u[a];
        v += n[a] * (n[a] - 1.0) * ua[i] * ua[j] * ua[k] * ua[l];
        for (std::size_t b = 0; b < m; ++b) {
          if (b == a) continue;
          const ModeVector& ub = *u[b];
          v += n[a] * n[b] * ua[i] * ub[j] * (ua[k] * ub[l] + ub[k] * ua[l]);
        }
      }
    } else {
      throw UnsupportedError("orbital_expectation: beyond two-body terms");
    }
    total += c.real() * v;
  }
  return total;
}

namespace {

void check_counts(int N, int n_gamma) {
  if (N <= 0) throw DomainError("N must be positive");
  if (n_gamma < 0 || n_gamma > N) throw DomainError("N_gamma must lie in [0, N]");
}

void check_beta(double beta) {
  if (!(beta >= 0.0) || beta > std::sqrt(2.0) + 1e-12) throw DomainError("beta outside [0, sqrt 2]");
}

double energy_of(const BosonExpr& nh, const OrbitalState& st, int N) {
  // nh = N * H, so <H> / (2N) = <nh> / (2 N^2).
  return orbital_expectation(nh, st) / (2.0 * N * static_cast<double>(N));
}

}  // namespace

OrbitalState axial_excited_state(int N, int n_gamma, double beta) {
  check_counts(N, n_gamma);
  check_beta(beta);
  if (n_gamma % 2 != 0) {
    throw DomainError("axial gamma excitations with K = 0 exist only for even N_gamma");
  }
  OrbitalState st;
  st.orbitals.push_back(intrinsic_bosons(beta, 0.0).condensate);
  st.occupations.push_back(N - n_gamma);
  for (int mu : {2, -2}) {
    ModeVector e = ModeVector::Zero();
    e[d_mode(mu)] = 1.0;
    st.orbitals.push_back(e);
    st.occupations.push_back(n_gamma / 2);
  }
  return st;
}

OrbitalState gamma_excited_state(int N, int n_gamma, double beta, double gamma) {
  check_counts(N, n_gamma);
  check_beta(beta);
  const IntrinsicBosons b = intrinsic_bosons(beta, gamma);
  OrbitalState st;
  st.orbitals = {b.condensate, b.gamma_mode};
  st.occupations = {N - n_gamma, n_gamma};
  return st;
}

double condensate_energy(const ModelParams& params, int N, double beta, double gamma) {
  check_counts(N, 0);
  check_beta(beta);
  OrbitalState st;
  st.orbitals.push_back(intrinsic_bosons(beta, gamma).condensate);
  st.occupations.push_back(N);
  return energy_of(hamiltonian_expr(params), st, N);
}

double excited_energy(const ModelParams& params, int N, int n_gamma, double beta) {
  return energy_of(hamiltonian_expr(params), axial_excited_state(N, n_gamma, beta), N);
}

double excited_energy_general(const ModelParams& params, int N, int n_gamma, double beta, double gamma) {
  return energy_of(hamiltonian_expr(params), gamma_excited_state(N, n_gamma, beta, gamma), N);
}

std::string to_string(SurfacePointKind k) {
  switch (k) {
    case SurfacePointKind::kPrimaryMinimum: return "primary_min";
    case SurfacePointKind::kSecondaryMinimum: return "secondary_min";
    case SurfacePointKind::kMaximum: return "max";
  }
  return "?";
}

namespace {

struct RawStationary {
  double beta;
  double energy;
  bool minimum;
};

std::vector<RawStationary> stationary_1d(const std::function<double(double)>& V, const std::vector<double>& grid) {
  const double h = 1e-6;
  auto dV = [&](double b) {
    // One-sided near the ends of [0, sqrt 2].
    const double lo = std::max(0.0, b - h), hi = std::min(std::sqrt(2.0), b + h);
    return (V(hi) - V(lo)) / (hi - lo);
  };
  auto d2V = [&](double b) {
    const double e = 1e-4;
    if (b < e) return 2.0 * (V(e) - V(0.0)) / (e * e);  // V'(0) = 0
    return (V(b + e) - 2.0 * V(b) + V(b - e)) / (e * e);
  };
  std::vector<RawStationary> out;
  // beta = 0 is stationary: the surface has no linear term there.
  out.push_back({0.0, V(0.0), d2V(0.0) > 0.0});
  std::vector<double> d(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) d[k] = dV(grid[k]);
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    if (grid[k] <= 0.0 || !(d[k] * d[k + 1] < 0.0 || d[k + 1] == 0.0)) continue;
    double a = grid[k], b = grid[k + 1], fa = d[k];
    for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = dV(mid);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    const double root = 0.5 * (a + b);
    out.push_back({root, V(root), d2V(root) > 0.0});
  }
  return out;
}

}  // namespace

ExcitedSurface excited_surface(const ModelParams& params, int N, int n_gamma, int grid_points) {
  if (grid_points < 3) throw DomainError("excited_surface: need at least 3 grid points");
  axial_excited_state(N, n_gamma, 0.0);  // validates the counts
  const BosonExpr nh = hamiltonian_expr(params);
  auto V = [&](double b) { return energy_of(nh, axial_excited_state(N, n_gamma, b), N); };
  ExcitedSurface s;
  s.params = params;
  s.N = N;
  s.n_gamma = n_gamma;
  for (int k = 0; k < grid_points; ++k) {
    const double b = std::sqrt(2.0) * k / (grid_points - 1);
    s.beta_grid.push_back(b);
    s.energies.push_back(V(b));
  }
  const auto raw = stationary_1d(V, s.beta_grid);
  std::vector<RawStationary> minima, maxima;
  for (const auto& r : raw) (r.minimum ? minima : maxima).push_back(r);
  std::sort(minima.begin(), minima.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  if (!minima.empty()) s.stationary.push_back({minima[0].beta, minima[0].energy, SurfacePointKind::kPrimaryMinimum});
  if (minima.size() >= 2) {
    s.stationary.push_back({minima[1].beta, minima[1].energy, SurfacePointKind::kSecondaryMinimum});
    // The barrier between the two lowest minima.
    const double lo = std::min(minima[0].beta, minima[1].beta), hi = std::max(minima[0].beta, minima[1].beta);
    const RawStationary* best = nullptr;
    for (const auto& m : maxima) {
      if (m.beta > lo && m.beta < hi && (!best || m.energy > best->energy)) best = &m;
    }
    if (best) s.stationary.push_back({best->beta, best->energy, SurfacePointKind::kMaximum});
  } else if (!maxima.empty()) {
    s.stationary.push_back({maxima[0].beta, maxima[0].energy, SurfacePointKind::kMaximum});
  }
  std::sort(s.stationary.begin(), s.stationary.end(), [](const auto& a, const auto& b) { return a.beta < b.beta; });
  return s;
}

std::vector<SurfacePoint> surface_stationary_points(const ModelParams& params, int N, int n_gamma) {
  return excited_surface(params, N, n_gamma).stationary;
}

double phonon_ratio(double lambda) { return (2.0 * lambda - 1.0) / 3.0; }

}  // namespace esqpt
