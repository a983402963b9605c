#pragma once

#include <cstdint>
#include <vector>

#include "esqpt/classical_limit.hpp"

namespace esqpt {

/// Binned smoothed level density for one parameter point, in classical
/// energy-per-boson units, normalised to the L=0 dimension at reference_n.
struct DensityGrid {
  ModelParams params;
  std::vector<double> e_edges;  ///< bins + 1 edges
  std::vector<double> rho;
  std::vector<double> drho_dE;
  std::vector<double> drho_error;  ///< propagated error of drho_dE
  std::vector<double> mc_error;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  int shards = 1;
  int reference_n = 50;

  int bins() const { return static_cast<int>(rho.size()); }
  double bin_width() const { return (e_edges.back() - e_edges.front()) / bins(); }
  double center(int i) const { return 0.5 * (e_edges[i] + e_edges[i + 1]); }
  /// Bin containing e, clamped to the grid.
  int bin_of(double e) const;
};

inline int DensityGrid::bin_of(double e) const {
  const int i = static_cast<int>((e - e_edges.front()) / bin_width());
  return i < 0 ? 0 : (i >= bins() ? bins() - 1 : i);
}

/// Smoothed level flow on a fixed energy binning.
struct FlowGrid {
  std::vector<double> e_centers;
  std::vector<double> jbar;
  std::vector<double> rhobar;
  std::vector<double> phibar;  ///< jbar / rhobar, 0 where rhobar vanishes
};

/// Oscillatory component of the quantum level density on a smooth grid.
struct OscillatoryGrid {
  std::vector<double> e_centers;
  std::vector<double> rho_smooth;
  std::vector<double> rho_osc;
  std::vector<double> sigma;
};

}  // namespace esqpt
