#include "esqpt/stationary_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "esqpt/jet.hpp"
#include "esqpt/parallel.hpp"
#include "esqpt/sampling.hpp"
#include "root_polish.hpp"

namespace esqpt {

std::string to_string(PointBranch b) {
  switch (b) {
    case PointBranch::kTrivialMomentum: return "trivial_momentum";
    case PointBranch::kKinetic: return "kinetic";
    case PointBranch::kBoundary: return "boundary";
  }
  return "unknown";
}

std::string to_string(SingularityClass c) {
  switch (c) {
    case SingularityClass::kJumpUp: return "jump_up_r0";
    case SingularityClass::kLogUp: return "log_divergence_up_r1";
    case SingularityClass::kJumpDown: return "jump_down_r2";
    case SingularityClass::kLogDown: return "log_divergence_down_r3";
    case SingularityClass::kJumpUpMaximum: return "jump_up_r4";
    case SingularityClass::kBoundary: return "boundary";
    case SingularityClass::kDegenerate: return "degenerate";
  }
  return "unknown";
}

std::string roman_key(SingularityClass c) {
  switch (c) {
    case SingularityClass::kJumpUp: return "i";
    case SingularityClass::kLogUp: return "ii";
    case SingularityClass::kJumpDown: return "iii";
    case SingularityClass::kLogDown: return "iv";
    case SingularityClass::kJumpUpMaximum: return "v";
    case SingularityClass::kBoundary: return "vi";
    case SingularityClass::kDegenerate: return "degenerate";
  }
  return "unknown";
}

SingularityClass class_for_index(int index_r) {
  switch (index_r) {
    case 0: return SingularityClass::kJumpUp;
    case 1: return SingularityClass::kLogUp;
    case 2: return SingularityClass::kJumpDown;
    case 3: return SingularityClass::kLogDown;
    case 4: return SingularityClass::kJumpUpMaximum;
    default: throw DomainError("Hessian index must lie in 0..4");
  }
}

std::string to_string(ExtremumKind k) {
  switch (k) {
    case ExtremumKind::kMin: return "min";
    case ExtremumKind::kMax: return "max";
    case ExtremumKind::kOther: return "other";
  }
  return "unknown";
}

namespace {

constexpr double kInteriorLimit = kPhaseSpaceRadiusSquared - 1e-9;

void gradient_system(const ModelParams& params, const Eigen::Vector4d& x, Eigen::Vector4d& f,
                     Eigen::Matrix4d& j) {
  const Jet r = hamiltonian<Jet>(params, Jet::variable(x[0], 0), Jet::variable(x[1], 1),
                                 Jet::variable(x[2], 2), Jet::variable(x[3], 3));
  f = r.g;
  j = 0.5 * (r.h + r.h.transpose());
}

std::optional<Eigen::Vector4d> polish4(const ModelParams& params, const Eigen::Vector4d& seed) {
  detail::PolishOptions opt;
  opt.radius_squared = kInteriorLimit;
  auto sys = [&](const Eigen::Vector4d& x, Eigen::Vector4d& f, Eigen::Matrix4d& j) {
    gradient_system(params, x, f, j);
  };
  return detail::polish_root<4>(sys, seed, opt);
}

std::optional<Eigen::Vector2d> polish_potential(const ModelParams& params, const Eigen::Vector2d& seed) {
  detail::PolishOptions opt;
  opt.radius_squared = kInteriorLimit;
  auto sys = [&](const Eigen::Vector2d& q, Eigen::Vector2d& f, Eigen::Matrix2d& j) {
    const Jet r = hamiltonian<Jet>(params, Jet::variable(q[0], 0), Jet::variable(q[1], 1), Jet(0.0), Jet(0.0));
    f = r.g.head<2>();
    j = r.h.topLeftCorner<2, 2>();
  };
  return detail::polish_root<2>(sys, seed, opt);
}

// Stationary points restricted to the plane y = 0 with only momentum component
// `pk` (2 or 3) free. Both planes are fixed sets of a mirror symmetry, so a
// critical point of the restriction is critical for the full Hamiltonian.
std::optional<Eigen::Vector2d> polish_slice(const ModelParams& params, const Eigen::Vector2d& seed, int pk) {
  detail::PolishOptions opt;
  opt.radius_squared = kInteriorLimit;
  auto sys = [&](const Eigen::Vector2d& z, Eigen::Vector2d& f, Eigen::Matrix2d& j) {
    const Jet zero(0.0);
    const Jet x = Jet::variable(z[0], 0), p = Jet::variable(z[1], pk);
    const Jet r = pk == 2 ? hamiltonian<Jet>(params, x, zero, p, zero) : hamiltonian<Jet>(params, x, zero, zero, p);
    f << r.g[0], r.g[pk];
    j << r.h(0, 0), r.h(0, pk), r.h(pk, 0), r.h(pk, pk);
  };
  return detail::polish_root<2>(sys, seed, opt);
}

std::vector<Eigen::Vector2d> disc_grid(int n, double radius) {
  std::vector<Eigen::Vector2d> out;
  if (n <= 0) return out;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      Eigen::Vector2d q(-radius + (2.0 * i + 1.0) * radius / n, -radius + (2.0 * k + 1.0) * radius / n);
      if (q.squaredNorm() < radius * radius) out.push_back(q);
    }
  }
  return out;
}

// The twelve symmetry images of a phase point.
std::array<Eigen::Vector4d, 12> symmetry_images(const Eigen::Vector4d& v) {
  std::array<Eigen::Vector4d, 12> out;
  int n = 0;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    const double c = std::cos(a), s = std::sin(a);
    const Eigen::Vector4d r(c * v[0] - s * v[1], s * v[0] + c * v[1], c * v[2] - s * v[3], s * v[2] + c * v[3]);
    const Eigen::Vector4d m(r[0], -r[1], r[2], -r[3]);
    for (const auto& w : {r, m}) {
      out[n++] = w;
      out[n++] = Eigen::Vector4d(w[0], w[1], -w[2], -w[3]);
    }
  }
  return out;
}

double orbit_distance(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& img : symmetry_images(a)) best = std::min(best, (img - b).norm());
  return best;
}

}  // namespace

PhasePoint canonical_representative(const PhasePoint& pt) {
  auto images = symmetry_images(pt.v);
  constexpr double eps = 1e-8;
  auto before = [&](const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    for (int i = 0; i < 4; ++i) {
      if (a[i] > b[i] + eps) return true;
      if (a[i] < b[i] - eps) return false;
    }
    return false;
  };
  Eigen::Vector4d best = images[0];
  for (const auto& img : images) {
    if (before(img, best)) best = img;
  }
  return PhasePoint(best);
}

StationaryPoint classify_point(const ModelParams& params, const PhasePoint& pt, double degeneracy_ratio) {
  const Derivatives d = derivatives(params, pt);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(d.hessian, Eigen::EigenvaluesOnly);
  StationaryPoint sp;
  sp.location = pt;
  sp.energy = d.value;
  sp.hessian_eigenvalues = es.eigenvalues();
  const double scale = sp.hessian_eigenvalues.cwiseAbs().maxCoeff();
  sp.index_r = 0;
  for (int i = 0; i < 4; ++i) {
    const double ev = sp.hessian_eigenvalues[i];
    if (std::abs(ev) < degeneracy_ratio * scale || scale == 0.0) sp.degenerate = true;
    if (ev < 0.0) ++sp.index_r;
  }
  sp.branch = pt.p().norm() > 1e-6 ? PointBranch::kKinetic : PointBranch::kTrivialMomentum;
  return sp;
}

StationaryCensus find_stationary_points(const ModelParams& params, const CensusOptions& options) {
  params.validate();
  StationaryCensus census;

  struct Candidate {
    std::optional<Eigen::Vector4d> root;
    int source = 0;  // 1 potential, 2 kinetic, 4 multistart
  };

  // (a) stationary points of V0(q) = H(q, 0) on the coordinate disc.
  const auto q_seeds = disc_grid(options.potential_grid, std::sqrt(kInteriorLimit));
  std::vector<Candidate> potential(q_seeds.size());
  parallel_for(q_seeds.size(), [&](std::size_t i) {
    auto q = polish_potential(params, q_seeds[i]);
    if (!q) return;
    Eigen::Vector4d full(q->x(), q->y(), 0.0, 0.0);
    // Confirm as a stationary point of the full Hamiltonian.
    potential[i].root = polish4(params, full);
    potential[i].source = 1;
  });

  // (b) non-trivial momentum branches followed by the full stationarity condition.
  std::vector<Eigen::Vector4d> kinetic_seeds;
  if (options.kinetic_q_grid > 0) {
    const auto kq = disc_grid(options.kinetic_q_grid, std::sqrt(kInteriorLimit) * 0.999);
    std::vector<std::vector<Eigen::Vector2d>> branches(kq.size());
    parallel_for(kq.size(), [&](std::size_t i) {
      branches[i] = momentum_branches(params, kq[i], options.kinetic_p_grid);
    });
    for (std::size_t i = 0; i < kq.size(); ++i) {
      for (std::size_t b = 1; b < branches[i].size(); ++b) {
        kinetic_seeds.emplace_back(kq[i].x(), kq[i].y(), branches[i][b].x(), branches[i][b].y());
      }
    }
  }
  std::vector<Candidate> kinetic(kinetic_seeds.size());
  parallel_for(kinetic_seeds.size(), [&](std::size_t i) {
    kinetic[i].root = polish4(params, kinetic_seeds[i]);
    kinetic[i].source = 2;
  });

  // (c) the two mirror-invariant planes, where kinetic points usually sit.
  const auto z_seeds = disc_grid(options.slice_grid, std::sqrt(kInteriorLimit));
  std::vector<Candidate> slices(2 * z_seeds.size());
  parallel_for(slices.size(), [&](std::size_t i) {
    const int pk = i < z_seeds.size() ? 2 : 3;
    auto z = polish_slice(params, z_seeds[i % z_seeds.size()], pk);
    if (!z) return;
    Eigen::Vector4d full(z->x(), 0.0, 0.0, 0.0);
    full[pk] = z->y();
    slices[i].root = polish4(params, full);
    slices[i].source = 8;
  });

  // (d) multistart cross-check from low-discrepancy seeds in the ball.
  std::vector<Eigen::Vector4d> ms_seeds;
  ms_seeds.reserve(options.multistart_seeds + options.extra_seeds.size());
  for (const auto& e : options.extra_seeds) ms_seeds.push_back(e.v);
  for (int i = 0; i < options.multistart_seeds; ++i) {
    ms_seeds.push_back(ball4(halton4(static_cast<std::uint64_t>(i) + 1), std::sqrt(kInteriorLimit) * 0.9999));
  }
  std::vector<Candidate> multistart(ms_seeds.size());
  parallel_for(ms_seeds.size(), [&](std::size_t i) {
    multistart[i].root = polish4(params, ms_seeds[i]);
    multistart[i].source = 4;
  });

  struct Found {
    Eigen::Vector4d x;
    int sources;
  };
  std::vector<Found> found;
  auto merge = [&](const std::vector<Candidate>& cands) {
    for (const auto& c : cands) {
      ++census.diagnostics.seeds_tried;
      if (!c.root) {
        ++census.diagnostics.seeds_discarded;
        continue;
      }
      bool dup = false;
      for (auto& f : found) {
        if ((f.x - *c.root).norm() <= options.dedup_distance) {
          f.sources |= c.source;
          dup = true;
          break;
        }
      }
      if (dup) continue;
      // Complete the symmetry orbit so every image is reported.
      for (const auto& img : symmetry_images(*c.root)) {
        bool seen = false;
        for (const auto& f : found) {
          if ((f.x - img).norm() <= options.dedup_distance) {
            seen = true;
            break;
          }
        }
        if (!seen) found.push_back({img, c.source});
      }
    }
  };
  merge(potential);
  merge(kinetic);
  merge(slices);
  merge(multistart);

  for (const auto& f : found) {
    if (f.sources & 1) ++census.diagnostics.from_potential;
    if (f.sources & 2) ++census.diagnostics.from_kinetic;
    if (f.sources & 4) ++census.diagnostics.from_multistart;
    if (f.sources & 8) ++census.diagnostics.from_slices;
    if (f.sources == 4) ++census.diagnostics.multistart_only;
    census.points.push_back(classify_point(params, PhasePoint(f.x), options.degeneracy_ratio));
  }
  std::stable_sort(census.points.begin(), census.points.end(),
                   [](const StationaryPoint& a, const StationaryPoint& b) { return a.energy < b.energy; });
  return census;
}

// ---------------------------------------------------------------------------
// Spinodal and antispinodal points

double antispinodal_closed_form(double beta0p) { return 1.0 + 1.0 / (1.0 + beta0p * beta0p); }

namespace {

bool has_deformed_minimum(double beta0p, double lambda) {
  const ModelParams params(beta0p, lambda);
  std::vector<Eigen::Vector2d> seeds = disc_grid(40, std::sqrt(kInteriorLimit));
  // Minima sit on the symmetry lines gamma = k pi / 3; seed those densely.
  for (int i = 1; i < 400; ++i) {
    const double r = std::sqrt(kInteriorLimit) * i / 400.0;
    for (int k = 0; k < 6; ++k) {
      const double a = std::numbers::pi * k / 3.0;
      seeds.emplace_back(r * std::cos(a), r * std::sin(a));
    }
  }
  for (const auto& s : seeds) {
    auto q = polish_potential(params, s);
    if (!q || q->norm() < 1e-4) continue;
    const StationaryPoint sp = classify_point(params, PhasePoint(q->x(), q->y(), 0.0, 0.0));
    if (sp.index_r == 0 && !sp.degenerate) return true;
  }
  return false;
}

bool spherical_is_minimum(double beta0p, double lambda) {
  const ModelParams params(beta0p, lambda);
  const StationaryPoint sp = classify_point(params, PhasePoint(), 0.0);
  return sp.index_r == 0 && sp.hessian_eigenvalues.minCoeff() > 0.0;
}

// Walks from `from` towards `to` and bisects the first sign change of pred.
template <typename Pred>
std::optional<double> first_change(const Pred& pred, bool initial, double from, double to, double step, double tol) {
  if (pred(from) != initial) return std::nullopt;
  const double dir = to > from ? 1.0 : -1.0;
  const int count = static_cast<int>(std::floor(std::abs(to - from) / step + 1e-9));
  double prev = from;
  for (int k = 1; k <= count; ++k) {
    const double l = from + dir * k * step;
    if (pred(l) != initial) {
      double a = prev, b = l;
      while (std::abs(b - a) > tol) {
        const double m = 0.5 * (a + b);
        (pred(m) == initial ? a : b) = m;
      }
      return 0.5 * (a + b);
    }
    prev = l;
  }
  return std::nullopt;
}

}  // namespace

SpinodalResult spinodal_points(double beta0p, double tolerance) {
  if (!(beta0p > 0.0)) throw DomainError("beta0p must be positive");
  SpinodalResult r;
  // Downwards from lambda = 1, where the deformed minimum is degenerate with the
  // spherical one: a minimum near the boundary at small lambda for large beta0'
  // belongs to a different branch.
  r.lambda_star = first_change([&](double l) { return has_deformed_minimum(beta0p, l); }, true, 1.0, 0.0,
                               0.02, tolerance);
  r.lambda_star_star = first_change([&](double l) { return spherical_is_minimum(beta0p, l); }, true, 0.0, 3.2,
                                    0.02, tolerance);
  return r;
}

// ---------------------------------------------------------------------------
// Boundary of the phase space

namespace {

// Smooth extension of the boundary energy: every factor of (R0^2 - R^2) set to
// zero, coordinates sqrt(2) * u. Agrees with eval_H on |u| = 1.
template <typename Scalar>
Scalar boundary_form(const ModelParams& m, const Scalar& u0, const Scalar& u1, const Scalar& u2,
                     const Scalar& u3) {
  const double r0 = std::sqrt(kPhaseSpaceRadiusSquared);
  const Scalar x = u0 * r0, y = u1 * r0, px = u2 * r0, py = u3 * r0;
  const Scalar beta2 = x * x + y * y;
  const Scalar kin = px * px + py * py;
  const Scalar hd = (beta2 + kin) * 0.5;
  const Scalar p_gamma = x * py - y * px;
  const Scalar beta_pbeta = x * px + y * py;
  const Scalar diff = beta2 - kin;
  const double zeta = m.zeta();
  Scalar h = hd * hd + (zeta * zeta) * (p_gamma * p_gamma);
  if (m.xi() != 0.0) h = h + (0.5 * m.xi()) * (beta_pbeta * beta_pbeta + 0.25 * (diff * diff));
  return h;
}

Jet boundary_jet(const ModelParams& m, const Eigen::Vector4d& u) {
  return boundary_form<Jet>(m, Jet::variable(u[0], 0), Jet::variable(u[1], 1), Jet::variable(u[2], 2),
                            Jet::variable(u[3], 3));
}

Eigen::Vector4d tangential(const Eigen::Vector4d& g, const Eigen::Vector4d& u) { return g - g.dot(u) * u; }

}  // namespace

double boundary_energy(const ModelParams& params, const Eigen::Vector4d& direction) {
  const double n = direction.norm();
  if (!(std::abs(n - 1.0) <= 1e-9)) throw DomainError("boundary_energy: direction must be a unit vector");
  PhasePoint pt(direction / n * std::sqrt(kPhaseSpaceRadiusSquared));
  return hamiltonian<double>(params, pt.x(), pt.y(), pt.px(), pt.py());
}

std::pair<double, double> boundary_extrema_closed_form(double lambda) {
  if (lambda < 0.0) throw DomainError("lambda must be >= 0");
  if (lambda < 1.0) return {1.0, 1.0 + lambda * lambda};
  if (lambda < 3.0) return {(1.0 + lambda) / 2.0, 2.0};
  return {2.0, (1.0 + lambda) / 2.0};
}

BoundaryAnalysis boundary_extrema(const ModelParams& params, int seeds) {
  params.validate();
  BoundaryAnalysis out;
  out.seeds = seeds;

  struct Result {
    bool ok = false;
    Eigen::Vector4d u;
    double energy = 0.0;
    double grad = 0.0;
  };

  auto lagrange = [&](const Eigen::Matrix<double, 5, 1>& z, Eigen::Matrix<double, 5, 1>& f,
                      Eigen::Matrix<double, 5, 5>& j) {
    const Eigen::Vector4d u = z.head<4>();
    const double mu = z[4];
    const Jet r = boundary_jet(params, u);
    f.head<4>() = r.g - mu * u;
    f[4] = 0.5 * (1.0 - u.squaredNorm());
    j.setZero();
    j.topLeftCorner<4, 4>() = 0.5 * (r.h + r.h.transpose()) - mu * Eigen::Matrix4d::Identity();
    j.block<4, 1>(0, 4) = -u;
    j.block<1, 4>(4, 0) = -u.transpose();
  };

  auto solve_from = [&](Eigen::Vector4d u) -> Result {
    Result res;
    u.normalize();
    const Jet r = boundary_jet(params, u);
    Eigen::Matrix<double, 5, 1> z;
    z.head<4>() = u;
    z[4] = r.g.dot(u);
    detail::PolishOptions opt;
    opt.radius_squared = 100.0 + z[4] * z[4] * 4.0;
    opt.residual_tol = 1e-13;
    auto root = detail::polish_root<5>(lagrange, z, opt);
    if (!root) return res;
    res.u = root->head<4>().normalized();
    const Jet rr = boundary_jet(params, res.u);
    res.grad = tangential(rr.g, res.u).norm();
    res.energy = boundary_energy(params, res.u);
    res.ok = res.grad <= 1e-9;
    return res;
  };

  // Each seed is polished directly and after descent / ascent along the
  // tangential gradient, so both global extrema are reached.
  std::vector<std::array<Result, 3>> results(static_cast<std::size_t>(seeds));
  parallel_for(results.size(), [&](std::size_t i) {
    const auto h = halton4(i + 1);
    const Eigen::Vector4d u0 = unit_sphere4(h[0], h[1], h[2]);
    results[i][0] = solve_from(u0);
    for (int dir = 0; dir < 2; ++dir) {
      Eigen::Vector4d u = u0;
      const double sign = dir == 0 ? -1.0 : 1.0;
      for (int it = 0; it < 200; ++it) {
        const Jet r = boundary_jet(params, u);
        const Eigen::Vector4d g = tangential(r.g, u);
        if (g.norm() < 1e-10) break;
        u = (u + sign * 0.05 * g).normalized();
      }
      results[i][1 + dir] = solve_from(u);
    }
  });

  std::vector<Result> distinct;
  bool any = false;
  out.e_min = std::numeric_limits<double>::infinity();
  out.e_max = -std::numeric_limits<double>::infinity();
  for (const auto& triple : results) {
    for (const auto& r : triple) {
      if (!r.ok) {
        ++out.non_converged;
        continue;
      }
      any = true;
      out.e_min = std::min(out.e_min, r.energy);
      out.e_max = std::max(out.e_max, r.energy);
      bool dup = false;
      for (const auto& d : distinct) {
        if (std::abs(d.energy - r.energy) <= 1e-9) {
          dup = true;
          break;
        }
      }
      if (!dup) distinct.push_back(r);
    }
  }
  if (!any) throw NumericalError("boundary_extrema: no stationary direction converged");
  out.partial = out.non_converged > 0;
  std::sort(distinct.begin(), distinct.end(), [](const Result& a, const Result& b) { return a.energy < b.energy; });

  const double r0 = std::sqrt(kPhaseSpaceRadiusSquared);
  auto radial_sign = [&](const Eigen::Vector4d& u) {
    const double h = 1e-7;
    const PhasePoint a(u * r0), b(u * (r0 - h));
    const double d = (hamiltonian<double>(params, a.x(), a.y(), a.px(), a.py()) -
                      hamiltonian<double>(params, b.x(), b.y(), b.px(), b.py())) /
                     h;
    return std::abs(d) < 1e-6 ? 0 : (d > 0.0 ? 1 : -1);
  };
  for (const auto& d : distinct) {
    BoundaryExtremum e;
    e.direction = d.u;
    e.energy = d.energy;
    e.angular_gradient = d.grad;
    e.sigma = radial_sign(d.u);
    const bool is_min = std::abs(d.energy - out.e_min) <= 1e-9;
    const bool is_max = std::abs(d.energy - out.e_max) <= 1e-9;
    if (is_min) {
      e.kind = ExtremumKind::kMin;
      out.extrema.push_back(e);
    }
    if (is_max) {
      e.kind = ExtremumKind::kMax;
      out.extrema.push_back(e);
    }
    if (!is_min && !is_max) {
      e.kind = ExtremumKind::kOther;
      out.extrema.push_back(e);
    }
  }
  return out;
}

BoundaryExponent boundary_exponent(const std::vector<double>& k_list, double m, int f) {
  if (f < 1) throw DomainError("boundary_exponent: f must be >= 1");
  if (static_cast<int>(k_list.size()) != 2 * f - 1) {
    throw DomainError("boundary_exponent: K list must have 2f-1 entries");
  }
  // 1/M with M in {1/2, 1, 3/2, 2}: 1/M = 2 / (2M).
  const double twice_m = 2.0 * m;
  if (!(std::abs(twice_m - std::round(twice_m)) < 1e-12) || std::round(twice_m) < 1.0 || std::round(twice_m) > 4.0) {
    throw DomainError("boundary_exponent: M must be one of 1/2, 1, 3/2, 2");
  }
  // Exact rational I = sum_l 1/K_l + 1/M - 1 (since (2f-1)/K = sum_l 1/K_l).
  long long num = 2, den = static_cast<long long>(std::llround(twice_m));
  auto add = [&](long long n, long long d) {
    num = num * d + n * den;
    den *= d;
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  };
  for (double k : k_list) {
    if (std::isinf(k) && k > 0) continue;
    if (!(k >= 2.0) || std::abs(k - std::round(k)) > 1e-12) {
      throw DomainError("boundary_exponent: each K_l must be an integer >= 2 or infinity");
    }
    add(1, std::llround(k));
  }
  add(-1, 1);
  BoundaryExponent r;
  r.numerator = num;
  r.denominator = den;
  r.exponent = static_cast<double>(num) / static_cast<double>(den);
  r.discontinuous = (num % den) == 0;
  // ceil for a rational
  long long q = num / den;
  if (num % den != 0 && num > 0) ++q;
  r.derivative_order = static_cast<int>(q);
  return r;
}

// ---------------------------------------------------------------------------
// Borderline tracing

int count_kinetic_borderlines(const std::vector<CriticalBorderline>& lines) {
  return static_cast<int>(std::count_if(lines.begin(), lines.end(), [](const CriticalBorderline& l) {
    return l.branch == PointBranch::kKinetic;
  }));
}

std::vector<CriticalBorderline> trace_borderlines(double beta0p, const std::vector<double>& lambda_grid,
                                                  const TraceOptions& options) {
  for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > lambda_grid[i - 1])) throw DomainError("trace_borderlines: lambda grid must increase");
  }
  struct Active {
    std::size_t line;
    int missed = 0;
  };
  std::vector<CriticalBorderline> lines;
  std::vector<Active> active;
  std::vector<PhasePoint> previous;
  CriticalBorderline bmin, bmax;
  bmin.singularity_class = bmax.singularity_class = SingularityClass::kBoundary;
  bmin.branch = bmax.branch = PointBranch::kBoundary;

  double prev_lambda = lambda_grid.empty() ? 0.0 : lambda_grid.front();
  for (double lambda : lambda_grid) {
    const ModelParams params(beta0p, lambda);
    CensusOptions co = options.census;
    co.extra_seeds = previous;
    const StationaryCensus census = find_stationary_points(params, co);

    // One level per symmetry orbit.
    std::vector<StationaryPoint> levels;
    for (const auto& sp : census.points) {
      if (sp.degenerate) continue;
      bool dup = false;
      for (const auto& l : levels) {
        if (orbit_distance(l.location.v, sp.location.v) <= 1e-5) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        StationaryPoint c = sp;
        c.location = canonical_representative(sp.location);
        levels.push_back(c);
      }
    }
    previous.clear();
    for (const auto& sp : census.points) previous.push_back(sp.location);

    const double step = std::max(lambda - prev_lambda, 0.01);
    const double tol = options.location_tolerance * step / 0.01;
    std::vector<Active> next;
    std::vector<bool> used(active.size(), false);
    for (const auto& lv : levels) {
      const SingularityClass cls = lv.singularity_class();
      std::vector<std::size_t> cands;
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (used[a]) continue;
        const auto& line = lines[active[a].line];
        if (line.singularity_class != cls || line.branch != lv.branch) continue;
        const double reach = tol * (1 + active[a].missed);
        if (orbit_distance(line.points.back().location.v, lv.location.v) <= reach) cands.push_back(a);
      }
      if (cands.empty()) {
        // Points can move quickly just before two curves merge; fall back to the
        // only open curve of the same class and branch, if there is exactly one.
        std::vector<std::size_t> same;
        for (std::size_t a = 0; a < active.size(); ++a) {
          const auto& line = lines[active[a].line];
          if (!used[a] && line.singularity_class == cls && line.branch == lv.branch) same.push_back(a);
        }
        bool contested = false;
        for (const auto& other : levels) {
          if (&other != &lv && other.singularity_class() == cls && other.branch == lv.branch) contested = true;
        }
        if (same.size() == 1 && !contested) cands = same;
      }
      BorderlinePoint bp{lambda, lv.energy, lv.location, lv.index_r};
      if (cands.size() == 1) {
        used[cands[0]] = true;
        lines[active[cands[0]].line].points.push_back(bp);
        next.push_back({active[cands[0]].line, 0});
      } else {
        CriticalBorderline nl;
        nl.singularity_class = cls;
        nl.branch = lv.branch;
        nl.split_with_warning = cands.size() > 1;
        nl.points.push_back(bp);
        lines.push_back(std::move(nl));
        next.push_back({lines.size() - 1, 0});
      }
    }
    // Points near the phase-space edge or at degenerate configurations can be
    // missed for a few steps; keep the curve open across such gaps.
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double last = lines[active[a].line].points.back().lambda;
      if (!used[a] && lambda - last < options.max_gap) next.push_back({active[a].line, active[a].missed + 1});
    }
    active = std::move(next);

    if (options.include_boundary) {
      const BoundaryAnalysis ba = boundary_extrema(params, 60);
      bmin.points.push_back({lambda, ba.e_min, PhasePoint(), -1});
      bmax.points.push_back({lambda, ba.e_max, PhasePoint(), -1});
    }
    prev_lambda = lambda;
  }
  if (options.include_boundary && !lambda_grid.empty()) {
    lines.push_back(std::move(bmin));
    lines.push_back(std::move(bmax));
  }
  return lines;
}

}  // namespace esqpt
