#include "esqpt/classical_limit.hpp"

#include <cmath>

#include "esqpt/jet.hpp"
#include "root_polish.hpp"

namespace esqpt {

PolarPoint PhasePoint::polar() const {
  PolarPoint pp;
  pp.beta = std::hypot(x(), y());
  if (pp.beta == 0.0) {
    pp.p_beta = std::hypot(px(), py());
    pp.gamma = 0.0;
    pp.p_gamma = 0.0;
    return pp;
  }
  pp.gamma = std::atan2(y(), x());
  pp.p_beta = (x() * px() + y() * py()) / pp.beta;
  pp.p_gamma = x() * py() - y() * px();
  return pp;
}

PhasePoint PhasePoint::from_polar(const PolarPoint& pp) {
  const double c = std::cos(pp.gamma);
  const double s = std::sin(pp.gamma);
  const double pg_over_beta = pp.beta > 0.0 ? pp.p_gamma / pp.beta : 0.0;
  return PhasePoint(pp.beta * c, pp.beta * s, pp.p_beta * c - pg_over_beta * s,
                    pp.p_beta * s + pg_over_beta * c);
}

namespace {

void require_closed(const PhasePoint& pt) {
  if (!pt.v.allFinite() || !pt.inside()) throw DomainError("phase point outside the phase-space ball");
}

void require_interior(const PhasePoint& pt) {
  if (!pt.v.allFinite() || pt.radius_squared() >= kPhaseSpaceRadiusSquared) {
    throw DomainError("derivatives need a point strictly inside the phase-space ball");
  }
}

}  // namespace

double eval_H(const ModelParams& params, const PhasePoint& pt) {
  require_closed(pt);
  return hamiltonian<double>(params, pt.x(), pt.y(), pt.px(), pt.py());
}

Derivatives derivatives(const ModelParams& params, const PhasePoint& pt) {
  require_interior(pt);
  const Jet r = hamiltonian<Jet>(params, Jet::variable(pt.x(), 0), Jet::variable(pt.y(), 1),
                                 Jet::variable(pt.px(), 2), Jet::variable(pt.py(), 3));
  Derivatives d;
  d.value = r.v;
  d.gradient = r.g;
  d.hessian = 0.5 * (r.h + r.h.transpose());
  return d;
}

Eigen::Vector4d grad_H(const ModelParams& params, const PhasePoint& pt) {
  return derivatives(params, pt).gradient;
}

Eigen::Matrix4d hess_H(const ModelParams& params, const PhasePoint& pt) {
  return derivatives(params, pt).hessian;
}

Eigen::Vector4d fd_gradient(const ModelParams& params, const PhasePoint& pt, double step) {
  Eigen::Vector4d g;
  for (int i = 0; i < 4; ++i) {
    PhasePoint a = pt, b = pt;
    a.v[i] += step;
    b.v[i] -= step;
    g[i] = (hamiltonian<double>(params, a.x(), a.y(), a.px(), a.py()) -
            hamiltonian<double>(params, b.x(), b.y(), b.px(), b.py())) /
           (2.0 * step);
  }
  return g;
}

Eigen::Matrix4d fd_hessian(const ModelParams& params, const PhasePoint& pt, double step) {
  Eigen::Matrix4d h;
  for (int i = 0; i < 4; ++i) {
    PhasePoint a = pt, b = pt;
    a.v[i] += step;
    b.v[i] -= step;
    h.col(i) = (fd_gradient(params, a, step) - fd_gradient(params, b, step)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

EnergySplit decompose(const ModelParams& params, const PhasePoint& pt) {
  const double total = eval_H(params, pt);
  EnergySplit s;
  s.potential = hamiltonian<double>(params, pt.x(), pt.y(), 0.0, 0.0);
  s.kinetic = total - s.potential;
  return s;
}

std::vector<Eigen::Vector2d> momentum_branches(const ModelParams& params, const Eigen::Vector2d& q,
                                               int seed_grid) {
  const double room = kPhaseSpaceRadiusSquared - q.squaredNorm();
  if (!(room > 1e-9)) throw DomainError("momentum_branches: q must lie inside the coordinate disc");
  std::vector<Eigen::Vector2d> found{Eigen::Vector2d::Zero()};

  auto system = [&](const Eigen::Vector2d& p, Eigen::Vector2d& f, Eigen::Matrix2d& j) {
    const Jet r = hamiltonian<Jet>(params, Jet(q[0]), Jet(q[1]), Jet::variable(p[0], 2),
                                   Jet::variable(p[1], 3));
    f = r.g.tail<2>();
    j = r.h.bottomRightCorner<2, 2>();
  };

  detail::PolishOptions opt;
  // Interior only: roots on the boundary sphere belong to the boundary analysis.
  opt.radius_squared = room - 1e-9;
  opt.max_iterations = 100;
  const double rmax = std::sqrt(room);
  for (int i = 0; i < seed_grid; ++i) {
    for (int k = 0; k < seed_grid; ++k) {
      Eigen::Vector2d seed(-rmax + (2.0 * i + 1.0) * rmax / seed_grid,
                           -rmax + (2.0 * k + 1.0) * rmax / seed_grid);
      if (seed.squaredNorm() >= opt.radius_squared) continue;
      auto root = detail::polish_root<2>(system, seed, opt);
      if (!root) continue;
      Eigen::Vector2d p = *root;
      if (p.norm() <= 1e-8 || p.squaredNorm() > opt.radius_squared) continue;
      // Canonical representative of the +-p pair.
      if (p[0] < 0.0 || (p[0] == 0.0 && p[1] < 0.0)) p = -p;
      bool dup = false;
      for (const auto& e : found) {
        if ((e - p).norm() <= 1e-8) {
          dup = true;
          break;
        }
      }
      if (!dup) found.push_back(p);
    }
  }
  std::vector<Eigen::Vector2d> out{Eigen::Vector2d::Zero()};
  for (std::size_t i = 1; i < found.size(); ++i) {
    out.push_back(found[i]);
    out.push_back(-found[i]);
  }
  return out;
}

}  // namespace esqpt
