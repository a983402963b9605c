#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esqpt/boson_algebra.hpp"
#include "esqpt/classical_limit.hpp"

namespace esqpt {

using ModeVector = Eigen::Matrix<double, kModes, 1>;

/// Condensate, beta-vibration and gamma-vibration single-boson amplitudes over
/// the modes (s, d_{-2}, .., d_{+2}).
struct IntrinsicBosons {
  double beta = 0.0;
  double gamma = 0.0;
  ModeVector condensate;
  ModeVector beta_mode;
  ModeVector gamma_mode;
};
IntrinsicBosons intrinsic_bosons(double beta, double gamma);

/// Fock state of mutually orthonormal real orbitals with given occupations.
struct OrbitalState {
  std::vector<ModeVector> orbitals;
  std::vector<int> occupations;

  int total() const;
};

/// Exact expectation of a normal-ordered expression of at most two-body
/// order in an orbital Fock state (falling factorials plus exchange terms).
double orbital_expectation(const BosonExpr& expr, const OrbitalState& state);

/// N - N_gamma bosons in B(beta, 0) plus (d+_{+2} d+_{-2})^{N_gamma / 2}.
OrbitalState axial_excited_state(int N, int n_gamma, double beta);
/// N - N_gamma bosons in B(beta, gamma) plus N_gamma in B_gamma(gamma).
OrbitalState gamma_excited_state(int N, int n_gamma, double beta, double gamma);

/// Energy per boson of the condensate, <H> / (2N), in the units of eval_H.
double condensate_energy(const ModelParams& params, int N, double beta, double gamma);
/// Same normalisation for the axial gamma-excited state on the y = 0 cut.
double excited_energy(const ModelParams& params, int N, int n_gamma, double beta);
/// Off-axis hook built from B_gamma(gamma); not used for the y = 0 figures.
double excited_energy_general(const ModelParams& params, int N, int n_gamma, double beta, double gamma);

enum class SurfacePointKind { kPrimaryMinimum, kSecondaryMinimum, kMaximum };
std::string to_string(SurfacePointKind k);

struct SurfacePoint {
  double beta = 0.0;
  double energy = 0.0;
  SurfacePointKind kind = SurfacePointKind::kPrimaryMinimum;
};

struct ExcitedSurface {
  ModelParams params;
  int N = 0;
  int n_gamma = 0;
  std::vector<double> beta_grid;
  std::vector<double> energies;
  std::vector<SurfacePoint> stationary;
};

/// Surface on a uniform beta grid over [0, sqrt 2] with its stationary points.
ExcitedSurface excited_surface(const ModelParams& params, int N, int n_gamma, int grid_points = 401);
std::vector<SurfacePoint> surface_stationary_points(const ModelParams& params, int N, int n_gamma);

/// Ratio of beta and gamma phonon energies for beta0' = sqrt 2.
double phonon_ratio(double lambda);

}  // namespace esqpt
