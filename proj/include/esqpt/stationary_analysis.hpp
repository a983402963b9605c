#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esqpt/classical_limit.hpp"

namespace esqpt {

enum class PointBranch { kTrivialMomentum, kKinetic, kBoundary };

/// Level-density singularity type generated by a critical energy.
enum class SingularityClass {
  kJumpUp,         ///< (i)   r = 0, upward jump of d(rho)/dE
  kLogUp,          ///< (ii)  r = 1, positive logarithmic divergence
  kJumpDown,       ///< (iii) r = 2, downward jump
  kLogDown,        ///< (iv)  r = 3, negative logarithmic divergence
  kJumpUpMaximum,  ///< (v)   r = 4, upward jump
  kBoundary,       ///< (vi)  extremum of the energy on the phase-space boundary
  kDegenerate,     ///< flat stationary point, not classified
};

std::string to_string(PointBranch b);
std::string to_string(SingularityClass c);
/// Roman-numeral key "i".."vi" (or "degenerate").
std::string roman_key(SingularityClass c);
SingularityClass class_for_index(int index_r);

struct StationaryPoint {
  PhasePoint location;
  double energy = 0.0;
  int index_r = 0;  ///< number of negative Hessian eigenvalues
  bool degenerate = false;
  PointBranch branch = PointBranch::kTrivialMomentum;
  Eigen::Vector4d hessian_eigenvalues = Eigen::Vector4d::Zero();

  SingularityClass singularity_class() const {
    return degenerate ? SingularityClass::kDegenerate : class_for_index(index_r);
  }
};

struct CensusOptions {
  int multistart_seeds = 20000;
  int potential_grid = 48;    ///< seed grid for stationary points of V0 on the disc
  int kinetic_q_grid = 20;    ///< q grid for seeding non-trivial momentum branches (0 = off)
  int kinetic_p_grid = 12;    ///< momentum seed grid per q
  int slice_grid = 40;        ///< seeds on the mirror-invariant planes (x, p_x) and (x, p_y)
  double dedup_distance = 1e-6;
  double degeneracy_ratio = 1e-6;
  std::vector<PhasePoint> extra_seeds;  ///< e.g. continuation from a neighbouring lambda
};

struct CensusDiagnostics {
  int seeds_tried = 0;
  int seeds_discarded = 0;  ///< polish did not converge within the iteration cap
  int from_potential = 0;
  int from_kinetic = 0;
  int from_slices = 0;
  int from_multistart = 0;
  int multistart_only = 0;  ///< points missed by the potential and kinetic paths
};

struct StationaryCensus {
  std::vector<StationaryPoint> points;  ///< sorted by energy
  CensusDiagnostics diagnostics;
};

/// Classifies a converged interior point (index, degeneracy, branch).
StationaryPoint classify_point(const ModelParams& params, const PhasePoint& pt,
                               double degeneracy_ratio = 1e-6);

/// All interior stationary points of the classical Hamiltonian.
StationaryCensus find_stationary_points(const ModelParams& params, const CensusOptions& options = {});

struct SpinodalResult {
  std::optional<double> lambda_star;       ///< deformed minimum of the coexistence region appears
  std::optional<double> lambda_star_star;  ///< spherical minimum disappears
};

/// Closed form for the antispinodal point, 1 + 1/(1 + beta0'^2).
double antispinodal_closed_form(double beta0p);
SpinodalResult spinodal_points(double beta0p, double tolerance = 1e-4);

/// Energy at sqrt(2) * direction on the boundary sphere.
double boundary_energy(const ModelParams& params, const Eigen::Vector4d& direction);

enum class ExtremumKind { kMin, kMax, kOther };
std::string to_string(ExtremumKind k);

struct BoundaryExtremum {
  Eigen::Vector4d direction = Eigen::Vector4d::Zero();  ///< unit 4-vector
  double energy = 0.0;
  ExtremumKind kind = ExtremumKind::kOther;
  double angular_gradient = 0.0;  ///< norm of the tangential gradient at the direction
  /// sign of dE/dR at the point (computed just inside the boundary).
  int sigma = 0;
};

struct BoundaryAnalysis {
  std::vector<BoundaryExtremum> extrema;  ///< one entry per distinct stationary energy
  double e_min = 0.0;
  double e_max = 0.0;
  int seeds = 0;
  int non_converged = 0;
  bool partial = false;
};

/// Stationary directions of the energy restricted to the boundary sphere.
BoundaryAnalysis boundary_extrema(const ModelParams& params, int seeds = 400);

/// Boundary extremum values in closed form.
std::pair<double, double> boundary_extrema_closed_form(double lambda);

struct BoundaryExponent {
  double exponent = 0.0;
  long long numerator = 0;  ///< exact exponent as numerator / denominator
  long long denominator = 1;
  bool discontinuous = false;  ///< integer exponent; otherwise divergent
  int derivative_order = 0;    ///< ceil(exponent)
};

/// Singularity exponent of a separable boundary extremum with powers K_l
/// (entries >= 2, integer or +infinity) and radial power M in {1/2, 1, 3/2, 2}.
BoundaryExponent boundary_exponent(const std::vector<double>& k_list, double m, int f);

struct BorderlinePoint {
  double lambda = 0.0;
  double energy = 0.0;
  PhasePoint location;
  int index_r = 0;
};

struct CriticalBorderline {
  std::vector<BorderlinePoint> points;  ///< monotone in lambda
  SingularityClass singularity_class = SingularityClass::kJumpUp;
  PointBranch branch = PointBranch::kTrivialMomentum;
  bool split_with_warning = false;
};

struct TraceOptions {
  CensusOptions census{.multistart_seeds = 4000, .potential_grid = 32, .kinetic_q_grid = 0, .kinetic_p_grid = 12, .extra_seeds = {}};
  double location_tolerance = 0.05;  ///< per lambda step of 0.01, scaled with the step
  double max_gap = 0.07;             ///< a curve stays open across missing points up to this lambda span
  bool include_boundary = true;
};

/// Critical borderlines E_c(lambda) of all stationary-point families and of
/// the boundary extrema.
std::vector<CriticalBorderline> trace_borderlines(double beta0p, const std::vector<double>& lambda_grid,
                                                  const TraceOptions& options = {});

/// Number of borderlines on the kinetic branch.
int count_kinetic_borderlines(const std::vector<CriticalBorderline>& lines);

/// Representative of a point under the symmetry group of the Hamiltonian
/// (rotation of (x,y) and (px,py) by 2pi/3, reflection y -> -y, p -> -p).
PhasePoint canonical_representative(const PhasePoint& pt);

}  // namespace esqpt
