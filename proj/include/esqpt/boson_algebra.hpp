#pragma once

#include <array>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esqpt/errors.hpp"

namespace esqpt {

using Complex = std::complex<double>;

/// Mode labels: 0 = s, 1..5 = d_{-2}..d_{+2}.
inline constexpr int kModes = 6;
inline constexpr int kModeS = 0;
constexpr int d_mode(int mu) { return mu + 3; }
constexpr int d_projection(int mode) { return mode - 3; }
std::string mode_name(int mode);

struct Ladder {
  int mode = 0;
  bool dagger = false;
};
using Word = std::vector<Ladder>;

/// Normal-ordered product b+_{c1} .. b+_{ck} b_{a1} .. b_{al}; both lists sorted.
struct Monomial {
  std::vector<int> creators;
  std::vector<int> annihilators;

  int operator_count() const { return static_cast<int>(creators.size() + annihilators.size()); }
  auto operator<=>(const Monomial&) const = default;
};

/// Polynomial in the six boson modes, stored normal-ordered.
class BosonExpr {
 public:
  using TermMap = std::map<Monomial, Complex>;

  BosonExpr() = default;
  static BosonExpr scalar(Complex c);
  static BosonExpr creator(int mode);
  static BosonExpr annihilator(int mode);
  static BosonExpr number(int mode);
  static BosonExpr monomial(const Monomial& m, Complex c = 1.0);

  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  Complex coefficient(const Monomial& m) const;

  BosonExpr adjoint() const;
  bool is_hermitian(double tol = 1e-12) const;
  bool conserves_number() const;
  int max_operator_count() const;
  /// Drops terms with |coefficient| <= tol.
  BosonExpr pruned(double tol = 1e-13) const;
  /// Largest coefficient difference over the union of monomials.
  double distance(const BosonExpr& other) const;

  // Flags are only set after verification; a failed check throws DomainError.
  BosonExpr& mark_hermitian(double tol = 1e-12);
  BosonExpr& mark_number_conserving();
  bool hermitian_flag() const { return hermitian_; }
  bool number_conserving_flag() const { return conserving_; }

  BosonExpr& operator+=(const BosonExpr& o);
  BosonExpr& operator-=(const BosonExpr& o);
  BosonExpr& operator*=(Complex c);

  friend BosonExpr operator+(BosonExpr a, const BosonExpr& b) { return a += b; }
  friend BosonExpr operator-(BosonExpr a, const BosonExpr& b) { return a -= b; }
  friend BosonExpr operator-(BosonExpr a) { return a *= -1.0; }
  friend BosonExpr operator*(BosonExpr a, Complex c) { return a *= c; }
  friend BosonExpr operator*(Complex c, BosonExpr a) { return a *= c; }
  friend BosonExpr operator*(const BosonExpr& a, const BosonExpr& b);

 private:
  void add(const Monomial& m, Complex c);

  TermMap terms_;
  bool hermitian_ = false;
  bool conserving_ = false;
};

/// An operator polynomial in arbitrary order, before normal ordering.
struct RawTerm {
  Complex coefficient = 1.0;
  Word word;
};
using RawExpr = std::vector<RawTerm>;

/// Moves every annihilator to the right using [b_k, b_l+] = delta_kl.
BosonExpr normal_order(const RawExpr& expr);
BosonExpr normal_order(const Word& word);

/// Test-fixture notation. Terms are separated by standalone "+" or "-";
/// a term is an optional real factor (optionally followed by "*"), an
/// optional "i", and ladder tokens s, s+, d<m>, d<m>+ with m in -2..2, read
/// left to right. Example: "2.0 * s+ s+ d0 d0 - d-2+ d2".
RawExpr parse_operator(const std::string& text);

/// Spherical tensor operator of integer rank with components mu = -rank..rank.
class TensorOp {
 public:
  TensorOp(int rank, std::vector<BosonExpr> components);

  int rank() const { return rank_; }
  const BosonExpr& operator[](int mu) const { return components_.at(mu + rank_); }
  const std::vector<BosonExpr>& components() const { return components_; }

  /// x~_m = (-1)^(rank + m) x_{-m}.
  TensorOp tilde() const;
  /// Annihilation partner of a creation tensor: (-1)^(rank + m) (x_{-m})^+.
  TensorOp conjugate_tilde() const;
  TensorOp scaled(Complex c) const;
  TensorOp operator+(const TensorOp& o) const;

  static TensorOp s_dagger();
  static TensorOp d_dagger();
  static TensorOp s_tilde();
  static TensorOp d_tilde();

 private:
  int rank_;
  std::vector<BosonExpr> components_;
};

/// [a b]^(rank)_m = sum CG(la ma; lb mb | rank m) a_ma b_mb.
TensorOp couple(const TensorOp& a, const TensorOp& b, int rank);
/// (a . b) = (-1)^l sqrt(2l + 1) [a b]^(0)_0 for equal ranks l.
BosonExpr scalar_product(const TensorOp& a, const TensorOp& b);

// ---------------------------------------------------------------------------
// Classical limit

/// How powers of N are attached to the monomials before the large-N limit.
enum class ClassicalScaling {
  /// Generic form: one-body coefficients are epsilon, two-body coefficients are
  /// v with the 1/(N-1) prefactor implicit. Every k-body monomial survives.
  kPerBody,
  /// The expression is N times a Hamiltonian whose interaction carries an
  /// explicit 1/N, e.g. N * H = 2 n_d(n_d - 1) + D+ . D~. Only two-body
  /// monomials survive in the energy per boson.
  kTwoBodyOverN,
};

/// Real-valued phase-space function built from the generator dictionary.
/// f = 5 uses (q_{-2}..q_{+2}, p_{-2}..p_{+2}) for the d modes directly;
/// f = 2 uses the L=0 intrinsic plane (x, y, px, py).
class PhaseFunction {
 public:
  PhaseFunction(int f, std::vector<std::pair<Monomial, Complex>> terms) : f_(f), terms_(std::move(terms)) {}

  int f() const { return f_; }
  /// Throws DomainError outside the phase-space ball.
  Complex evaluate_complex(const Eigen::VectorXd& qp) const;
  double operator()(const Eigen::VectorXd& qp) const { return evaluate_complex(qp).real(); }
  double operator()(double x, double y, double px, double py) const;

  /// Classical amplitudes (s, d_{-2}..d_{+2}) for the given coordinates.
  static std::array<Complex, kModes> amplitudes(int f, const Eigen::VectorXd& qp);

 private:
  int f_;
  std::vector<std::pair<Monomial, Complex>> terms_;
};

PhaseFunction classical_map(const BosonExpr& expr, int f, ClassicalScaling scaling = ClassicalScaling::kPerBody);

}  // namespace esqpt
