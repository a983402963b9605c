#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "esqpt/errors.hpp"

namespace esqpt {

/// Squared radius of the compact phase space: x^2 + y^2 + px^2 + py^2 <= 2.
inline constexpr double kPhaseSpaceRadiusSquared = 2.0;
/// Critical value of the control parameter joining the two Hamiltonian forms.
inline constexpr double kLambdaCritical = 1.0;

enum class Branch {
  kSphericalToCritical,  ///< lambda in [0, 1]: zeta = lambda
  kCriticalToDeformed,   ///< lambda >= 1: xi = lambda - 1
};

/// Shape parameter beta0' and control parameter lambda of the piecewise
/// intrinsic-Hamiltonian family.
struct ModelParams {
  double beta0p = std::sqrt(2.0);
  double lambda = 0.0;

  ModelParams() = default;
  ModelParams(double beta0p_, double lambda_) : beta0p(beta0p_), lambda(lambda_) { validate(); }

  void validate() const {
    if (!(beta0p > 0.0) || !std::isfinite(beta0p)) throw DomainError("beta0p must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be >= 0");
  }

  double zeta() const { return std::min(lambda, kLambdaCritical); }
  double xi() const { return std::max(lambda - kLambdaCritical, 0.0); }
  Branch branch() const {
    return lambda <= kLambdaCritical ? Branch::kSphericalToCritical : Branch::kCriticalToDeformed;
  }
};

/// Polar (Bohr-like) form of a phase-space point.
struct PolarPoint {
  double beta = 0.0;
  double gamma = 0.0;
  double p_beta = 0.0;
  double p_gamma = 0.0;
};

/// Cartesian point (x, y, px, py) of the L=0 phase space.
struct PhasePoint {
  Eigen::Vector4d v = Eigen::Vector4d::Zero();

  PhasePoint() = default;
  explicit PhasePoint(const Eigen::Vector4d& coords) : v(coords) {}
  PhasePoint(double x, double y, double px, double py) : v(x, y, px, py) {}

  double x() const { return v[0]; }
  double y() const { return v[1]; }
  double px() const { return v[2]; }
  double py() const { return v[3]; }
  Eigen::Vector2d q() const { return v.head<2>(); }
  Eigen::Vector2d p() const { return v.tail<2>(); }
  double radius_squared() const { return v.squaredNorm(); }
  bool inside(double slack = 1e-12) const { return radius_squared() <= kPhaseSpaceRadiusSquared + slack; }

  /// Undefined angle at beta = 0 is reported as gamma = 0, p_gamma = 0.
  PolarPoint polar() const;
  static PhasePoint from_polar(const PolarPoint& pp);
};

/// Energy per boson of the classical L=0 Hamiltonian, written generically in
/// the Cartesian variables. Regular at beta = 0: the angular factors combine
/// into Re(z^3 + z pi^2) with z = x + iy, pi = px + i py.
template <typename Scalar>
Scalar hamiltonian(const ModelParams& m, const Scalar& x, const Scalar& y, const Scalar& px,
                   const Scalar& py) {
  using std::sqrt;
  const double b2 = m.beta0p * m.beta0p;
  const double zeta = m.zeta();
  const double xi = m.xi();

  const Scalar beta2 = x * x + y * y;
  const Scalar kin = px * px + py * py;
  const Scalar hd = (beta2 + kin) * 0.5;
  const Scalar one_minus = 1.0 - hd;
  const Scalar p_gamma = x * py - y * px;
  const Scalar beta_pbeta = x * px + y * py;
  const Scalar cubic = x * (x * x - 3.0 * y * y) + x * (px * px - py * py) - 2.0 * y * (px * py);

  Scalar h = hd * hd + b2 * (one_minus * hd) + (zeta * zeta) * (p_gamma * p_gamma);
  if (zeta != 0.0) {
    Scalar half = one_minus * 0.5;
    if constexpr (std::is_same_v<Scalar, double>) half = std::max(half, 0.0);
    h = h - (zeta * m.beta0p) * (sqrt(half) * cubic);
  }
  if (xi != 0.0) {
    const Scalar diff = beta2 - kin;
    h = h + (0.5 * xi) * (beta_pbeta * beta_pbeta + 0.25 * (diff * diff) - b2 * (one_minus * diff) +
                          (b2 * b2) * (one_minus * one_minus));
  }
  return h;
}

struct Derivatives {
  double value = 0.0;
  Eigen::Vector4d gradient = Eigen::Vector4d::Zero();
  Eigen::Matrix4d hessian = Eigen::Matrix4d::Zero();
};

struct EnergySplit {
  double kinetic = 0.0;
  double potential = 0.0;
};

/// Energy at a point of the closed ball; throws DomainError outside.
double eval_H(const ModelParams& params, const PhasePoint& pt);
/// Value, gradient and Hessian by forward-mode differentiation. Requires the
/// point strictly inside the ball (one-sided derivatives on the boundary).
Derivatives derivatives(const ModelParams& params, const PhasePoint& pt);
Eigen::Vector4d grad_H(const ModelParams& params, const PhasePoint& pt);
Eigen::Matrix4d hess_H(const ModelParams& params, const PhasePoint& pt);

/// Central finite differences of eval_H / grad_H, used as a fallback and as a check.
Eigen::Vector4d fd_gradient(const ModelParams& params, const PhasePoint& pt, double step = 1e-5);
Eigen::Matrix4d fd_hessian(const ModelParams& params, const PhasePoint& pt, double step = 1e-5);

/// Potential V0(q) = H(q, 0) and kinetic K0 = H(q, p) - H(q, 0).
EnergySplit decompose(const ModelParams& params, const PhasePoint& pt);

/// All real solutions p of dH/dp = 0 at fixed coordinates q. Always contains
/// p = 0 first; non-trivial solutions follow in (+p, -p) pairs.
std::vector<Eigen::Vector2d> momentum_branches(const ModelParams& params, const Eigen::Vector2d& q,
                                               int seed_grid = 64);

}  // namespace esqpt
