#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esqpt/boson_algebra.hpp"
#include "esqpt/classical_limit.hpp"
#include "esqpt/density_grid.hpp"

namespace esqpt {

inline constexpr int kDefaultMaxBosons = 200;

/// (n_d, tau) label of an L=0 state; tau = 3 n_Delta is the d-boson seniority.
struct BasisLabel {
  int n_d = 0;
  int tau = 0;
  auto operator<=>(const BasisLabel&) const = default;
};

/// M=0 m-scheme space of n d bosons: occupations (n_{-2}, .., n_{+2}).
struct DBlock {
  std::vector<std::array<std::uint8_t, 5>> occupations;
};

/// Orthonormal L=0 basis |N; n_d, tau> = s^(N - n_d) / sqrt((N - n_d)!) |n_d, tau>.
/// The d-boson parts are stored as amplitude vectors over the m-scheme blocks.
class L0Basis {
 public:
  int N() const { return N_; }
  int dimension() const { return static_cast<int>(labels_.size()); }
  const std::vector<BasisLabel>& labels() const { return labels_; }
  const BasisLabel& label(int i) const { return labels_.at(i); }
  const Eigen::VectorXd& d_vector(int i) const { return vectors_.at(i); }
  const DBlock& block(int n_d) const { return blocks_->at(n_d); }

  /// Six-mode occupation (n_s, n_{-2}, .., n_{+2}) and amplitude of each
  /// m-scheme component of state i.
  std::vector<std::pair<std::array<int, 6>, double>> fock_components(int i) const;

  /// Index of an occupation inside its block, -1 if absent.
  int block_index(const std::array<std::uint8_t, 5>& occ) const;

 private:
  friend L0Basis build_basis(int N);
  struct Lookup;

  int N_ = 0;
  std::vector<BasisLabel> labels_;
  std::vector<Eigen::VectorXd> vectors_;
  std::shared_ptr<const std::vector<DBlock>> blocks_;
  std::shared_ptr<const Lookup> lookup_;
};

int basis_dimension(int N);
L0Basis build_basis(int N);

/// Matrix of a number-conserving, rotation-scalar operator in the basis.
Eigen::MatrixXd operator_matrix(const BosonExpr& op, const L0Basis& basis);

/// Pair and multipole operators of the intrinsic Hamiltonian family.
struct IbmOperators {
  BosonExpr nd;        ///< n_d
  BosonExpr nd_pairs;  ///< n_d (n_d - 1)
  BosonExpr uu;        ///< U+ . U~ with U+ = sqrt(2) [s+ d+]^(2)
  BosonExpr uv;        ///< U+ . V~ + V+ . U~ with V+ = sqrt(7) [d+ d+]^(2)
  BosonExpr vv;        ///< V+ . V~
  BosonExpr pp;        ///< P+ P with P+ = d+ . d+
  BosonExpr pss;       ///< P+ s s + s+ s+ P
  BosonExpr ssss;      ///< s+ s+ s s
};
const IbmOperators& ibm_operators();

/// D+_mu(beta0', zeta) and S+(beta0') as tensors; S+ uses the square of beta0'.
TensorOp d_pair_dagger(double beta0p, double zeta);
BosonExpr s_pair_dagger(double beta0p);
/// N * H^lambda as a boson expression (the 1/N prefactor stripped).
BosonExpr hamiltonian_expr(const ModelParams& params);

/// Beta-independent operator matrices for one N; the Hamiltonian is linear in them.
struct HamiltonianTerms {
  int N = 0;
  Eigen::MatrixXd nd, nd_pairs, uu, uv, vv, pp, pss, ssss;
};

/// Cached per N (process-wide, thread-safe). With a non-empty cache_dir the
/// matrices are also read from / written to a JSON file keyed by N.
std::shared_ptr<const HamiltonianTerms> hamiltonian_terms(int N, const std::string& cache_dir = "");
HamiltonianTerms compute_hamiltonian_terms(const L0Basis& basis);
void save_terms_cache(const std::string& path, const HamiltonianTerms& terms);
HamiltonianTerms load_terms_cache(const std::string& path);

Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const HamiltonianTerms& terms);
Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const L0Basis& basis);

/// Which one-sided derivative to use at lambda = 1. kAuto picks the left
/// branch for lambda <= 1 and the right branch above.
enum class SlopeSide { kAuto, kLeft, kRight };
Eigen::MatrixXd hamiltonian_lambda_derivative(const ModelParams& params, const HamiltonianTerms& terms,
                                              SlopeSide side = SlopeSide::kAuto);

struct SpectrumResult {
  ModelParams params;
  int N = 0;
  Eigen::VectorXd eigenvalues;     ///< ascending, absolute
  Eigen::VectorXd slopes;          ///< dE_i / dlambda (Hellmann-Feynman)
  Eigen::VectorXd nd_expectation;  ///< <n_d> per eigenstate
  std::vector<bool> degenerate;    ///< slope taken from a degenerate block
  Eigen::MatrixXd eigenvectors;    ///< columns; empty unless requested
  std::shared_ptr<const HamiltonianTerms> terms;

  Eigen::VectorXd excitation_energies() const { return eigenvalues.array() - eigenvalues[0]; }
};

struct DiagonalizeOptions {
  SlopeSide side = SlopeSide::kAuto;
  bool keep_vectors = false;
  int max_bosons = kDefaultMaxBosons;
  std::string cache_dir;
};

SpectrumResult diagonalize(const ModelParams& params, int N, const DiagonalizeOptions& options = {});
Eigen::VectorXd hf_slopes(const ModelParams& params, int N, SlopeSide side = SlopeSide::kAuto);

struct SlopePair {
  Eigen::VectorXd left, right;
};
/// Both one-sided slopes; they differ at lambda = 1 only.
SlopePair hf_slopes_both(const ModelParams& params, int N);

/// Energy unit linking quantum eigenvalues to the classical energy per boson:
/// E_classical = E_quantum / quantum_energy_scale(N).
double quantum_energy_scale(int N);

struct OscillatoryOptions {
  double c = 0.5;            ///< sigma = c / rho_smooth, so sigma stays below the mean spacing
  double sigma_max = 0.05;   ///< cap where the smooth density vanishes
};
/// rho~(E) = sum_i delta_sigma(E - E_i) - rho_smooth(E) with eigenvalues mapped to
/// classical units; Gaussian width chosen per bin.
OscillatoryGrid oscillatory_density(const SpectrumResult& spectrum, const DensityGrid& smooth,
                                    const OscillatoryOptions& options = {});

}  // namespace esqpt
