#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esqpt/classical_limit.hpp"
#include "esqpt/density_grid.hpp"
#include "esqpt/ibm_quantum.hpp"

namespace esqpt {

struct DensityOptions {
  std::uint64_t n_samples = 1'000'000;
  std::uint64_t seed = 1;
  int bins = 300;
  double e_min = -0.05;
  double e_max = 3.05;
  int shards = 16;           ///< independent RNG streams; the result depends on (seed, shards)
  int reference_n = 50;      ///< rho integrates to the L=0 dimension at this N
  double smoothing_bins = 2.0;
  int threads = 0;           ///< 0 = default_thread_count()
};

/// Uniform sampling of the phase-space ball, histogram of the energy.
/// Samples outside [e_min, e_max] count toward the normalisation only.
DensityGrid mc_density(const ModelParams& params, const DensityOptions& options = {});

struct Derivative {
  std::vector<double> value;
  std::vector<double> error;
};
/// Central differences after Gaussian pre-smoothing (width in bins, 0 = none);
/// errors propagated from the per-bin Monte-Carlo errors.
Derivative density_derivative(const DensityGrid& grid, double smoothing_bins = 2.0);

struct PhaseDiagram {
  double beta0p = 0.0;
  std::vector<double> lambdas;
  std::vector<double> e_centers;
  Eigen::MatrixXd drho_dE;  ///< rows: lambda, columns: energy bin
  Eigen::MatrixXd rho;
};
/// One density per lambda; the seed of row k is derived from (seed, k).
PhaseDiagram phase_diagram(double beta0p, const std::vector<double>& lambda_grid, const DensityOptions& options);

// ---------------------------------------------------------------------------
// Singular features of the density derivative

enum class FeatureType { kJumpUp, kJumpDown, kSpikeUp, kSpikeDown };
std::string to_string(FeatureType t);

struct DensityFeature {
  FeatureType type = FeatureType::kJumpUp;
  double energy = 0.0;
  int bin = 0;
  double significance = 0.0;
};

struct FeatureOptions {
  int window = 8;            ///< bins on each side of a trial energy in the local fit
  double threshold = 5.0;    ///< in propagated standard errors
  int subdivisions = 4;      ///< trial energies per bin
  double min_separation = 1.5;  ///< bins between accepted features
  int max_features = 12;
};
/// Greedy local fits of rho: quadratic background plus a kink (jump of
/// d rho / dE) or an x ln|x| term (logarithmic divergence of d rho / dE) at a
/// trial energy, each with its next-order companion. The most significant term
/// is kept and the search repeated with it in the model, so the response of
/// one feature is not counted twice.
std::vector<DensityFeature> detect_features(const DensityGrid& grid, const FeatureOptions& options = {});

// ---------------------------------------------------------------------------
// Quantum level density and flow

/// Gaussian-smoothed quantum level density in classical energy units.
std::vector<double> smoothed_quantum_density(const SpectrumResult& s, const std::vector<double>& e_centers,
                                             double width);

/// Smoothed flow at the parameter point of spectra[0]. One spectrum uses its
/// Hellmann-Feynman slopes; three spectra (lambda - d, lambda, lambda + d)
/// with finite_difference set use eigenvalue differences instead.
FlowGrid smoothed_flow(const std::vector<SpectrumResult>& spectra, const std::vector<double>& e_centers,
                       double width, bool finite_difference = false);

struct ContinuityCheck {
  std::vector<double> e_centers;
  std::vector<double> drho_dlambda;
  std::vector<double> djbar_dE;
  std::vector<double> residual;
  double max_residual = 0.0;
  double max_djbar_dE = 0.0;
};
/// d rho / d lambda (centred difference of smoothed spectra) against d j / dE.
ContinuityCheck continuity_check(double beta0p, double lambda, int N, double width,
                                 const std::vector<double>& e_centers, double dlambda = 1e-4);

/// Cumulative count of quantum levels versus the integrated smooth density.
struct CountingComparison {
  std::vector<double> energies;
  std::vector<double> quantum;
  std::vector<double> semiclassical;
  double max_deviation = 0.0;  ///< over the compared energies, in levels
  int dimension = 0;
};
CountingComparison compare_counting(const SpectrumResult& s, const DensityGrid& grid, double e_lo, double e_hi);

}  // namespace esqpt
