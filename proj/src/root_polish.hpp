#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Dense>

namespace esqpt::detail {

struct PolishOptions {
  int max_iterations = 200;
  double residual_tol = 1e-13;
  /// Iterates are kept inside |x|^2 <= radius_squared.
  double radius_squared = 2.0;
};

/// Damped Newton (Levenberg-Marquardt on |F|^2) for F(x) = 0 with a symmetric
/// Jacobian, confined to a ball. `system(x, F, J)` fills residual and Jacobian.
/// Returns the root, or nothing if the iteration stalls or leaves the ball.
template <int Dim, typename System>
std::optional<Eigen::Matrix<double, Dim, 1>> polish_root(const System& system,
                                                         Eigen::Matrix<double, Dim, 1> x,
                                                         const PolishOptions& opt) {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  Vec f;
  Mat j;
  system(x, f, j);
  double cost = f.squaredNorm();
  double mu = 1e-6;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (std::sqrt(cost) <= opt.residual_tol) return x;
    const Mat jtj = j.transpose() * j;
    const Vec jtf = j.transpose() * f;
    bool accepted = false;
    for (int inner = 0; inner < 12 && mu < 1e8; ++inner) {
      Mat a = jtj;
      a.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
      const Vec step = a.ldlt().solve(-jtf);
      Vec trial = x + step;
      if (!trial.allFinite() || trial.squaredNorm() >= opt.radius_squared) {
        mu *= 10.0;
        continue;
      }
      Vec ft;
      Mat jt;
      system(trial, ft, jt);
      const double trial_cost = ft.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        x = trial;
        f = ft;
        j = jt;
        cost = trial_cost;
        mu = std::max(mu * 0.1, 1e-15);
        accepted = true;
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) break;
  }
  if (std::sqrt(cost) <= opt.residual_tol * 100.0) return x;
  return std::nullopt;
}

}  // namespace esqpt::detail
