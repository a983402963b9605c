#include "esqpt/level_density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "esqpt/parallel.hpp"

namespace esqpt {

namespace {

double uniform01(std::mt19937_64& rng) {
  // 53 random bits; never exactly 0 so that log() below is finite.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller written out so that streams are identical across standard libraries.
void gaussian_pair(std::mt19937_64& rng, double& a, double& b) {
  const double r = std::sqrt(-2.0 * std::log(uniform01(rng)));
  const double t = 2.0 * std::numbers::pi * uniform01(rng);
  a = r * std::cos(t);
  b = r * std::sin(t);
}

std::mt19937_64 shard_rng(std::uint64_t seed, std::uint64_t shard) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

DensityGrid mc_density(const ModelParams& params, const DensityOptions& o) {
  params.validate();
  if (o.bins < 3) throw DomainError("mc_density: need at least 3 bins");
  if (!(o.e_max > o.e_min)) throw DomainError("mc_density: empty energy range");
  if (o.n_samples == 0) throw DomainError("mc_density: n_samples must be positive");
  if (o.shards < 1) throw DomainError("mc_density: shards must be >= 1");
  if (o.reference_n < 0) throw DomainError("mc_density: reference N must be >= 0");

  DensityGrid g;
  g.params = params;
  g.n_samples = o.n_samples;
  g.seed = o.seed;
  g.shards = o.shards;
  g.reference_n = o.reference_n;
  for (int i = 0; i <= o.bins; ++i) g.e_edges.push_back(o.e_min + (o.e_max - o.e_min) * i / o.bins);
  const double width = (o.e_max - o.e_min) / o.bins;
  const double radius = std::sqrt(kPhaseSpaceRadiusSquared);

  std::vector<std::vector<std::uint64_t>> counts(o.shards, std::vector<std::uint64_t>(o.bins, 0));
  const std::uint64_t per = o.n_samples / o.shards, extra = o.n_samples % o.shards;
  parallel_for(
      static_cast<std::size_t>(o.shards),
      [&](std::size_t s) {
        std::mt19937_64 rng = shard_rng(o.seed, s);
        const std::uint64_t n = per + (s < extra ? 1 : 0);
        auto& c = counts[s];
        for (std::uint64_t k = 0; k < n; ++k) {
          double v[4];
          gaussian_pair(rng, v[0], v[1]);
          gaussian_pair(rng, v[2], v[3]);
          const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
          const double r = radius * std::pow(uniform01(rng), 0.25) / norm;
          const double e = hamiltonian<double>(params, r * v[0], r * v[1], r * v[2], r * v[3]);
          const double pos = (e - o.e_min) / width;
          if (pos >= 0.0 && pos < o.bins) ++c[static_cast<std::size_t>(pos)];
        }
      },
      o.threads > 0 ? o.threads : default_thread_count());

  const double dim = basis_dimension(o.reference_n);
  const double n = static_cast<double>(o.n_samples);
  g.rho.assign(o.bins, 0.0);
  g.mc_error.assign(o.bins, 0.0);
  for (int b = 0; b < o.bins; ++b) {
    std::uint64_t c = 0;
    for (int s = 0; s < o.shards; ++s) c += counts[s][b];
    const double p = c / n;
    g.rho[b] = p / width * dim;
    // Binomial error; an empty bin still carries the error of one count.
    const double var = std::max(c, std::uint64_t{1}) * (1.0 - p);
    g.mc_error[b] = std::sqrt(var) / n / width * dim;
  }
  const Derivative d = density_derivative(g, o.smoothing_bins);
  g.drho_dE = d.value;
  g.drho_error = d.error;
  return g;
}

Derivative density_derivative(const DensityGrid& g, double smoothing_bins) {
  const int n = g.bins();
  if (n < 3) throw DomainError("density_derivative: need at least 3 bins");
  if (smoothing_bins < 0.0) throw DomainError("density_derivative: negative smoothing width");
  const double h = g.bin_width();

  // Linear weights w_j of rho_j in the derivative at bin i; values outside the grid are zero.
  std::vector<double> kernel;
  int half = 0;
  if (smoothing_bins > 0.0) {
    half = static_cast<int>(std::ceil(4.0 * smoothing_bins));
    double sum = 0.0;
    for (int k = -half; k <= half; ++k) {
      kernel.push_back(std::exp(-0.5 * (k / smoothing_bins) * (k / smoothing_bins)));
      sum += kernel.back();
    }
    for (double& w : kernel) w /= sum;
  } else {
    kernel = {1.0};
  }
  Derivative d;
  d.value.assign(n, 0.0);
  d.error.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double v = 0.0, var = 0.0;
    for (int j = i - half - 1; j <= i + half + 1; ++j) {
      if (j < 0 || j >= n) continue;
      // smoothed(i + 1) - smoothed(i - 1), each a kernel sum.
      double w = 0.0;
      const int kp = j - (i + 1) + half, km = j - (i - 1) + half;
      if (kp >= 0 && kp < static_cast<int>(kernel.size())) w += kernel[kp];
      if (km >= 0 && km < static_cast<int>(kernel.size())) w -= kernel[km];
      w /= 2.0 * h;
      v += w * g.rho[j];
      var += w * w * g.mc_error[j] * g.mc_error[j];
    }
    d.value[i] = v;
    d.error[i] = std::sqrt(var);
  }
  return d;
}

PhaseDiagram phase_diagram(double beta0p, const std::vector<double>& lambda_grid, const DensityOptions& options) {
  for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > lambda_grid[i - 1])) throw DomainError("phase_diagram: lambda grid must increase");
  }
  PhaseDiagram pd;
  pd.beta0p = beta0p;
  pd.lambdas = lambda_grid;
  pd.drho_dE.resize(static_cast<Eigen::Index>(lambda_grid.size()), options.bins);
  pd.rho.resize(static_cast<Eigen::Index>(lambda_grid.size()), options.bins);
  for (int b = 0; b < options.bins; ++b) {
    pd.e_centers.push_back(options.e_min + (options.e_max - options.e_min) * (b + 0.5) / options.bins);
  }
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    DensityOptions o = options;
    o.seed = options.seed * 1000003ULL + k;
    const DensityGrid g = mc_density(ModelParams(beta0p, lambda_grid[k]), o);
    for (int b = 0; b < options.bins; ++b) {
      pd.drho_dE(static_cast<Eigen::Index>(k), b) = g.drho_dE[b];
      pd.rho(static_cast<Eigen::Index>(k), b) = g.rho[b];
    }
  }
  return pd;
}

// ---------------------------------------------------------------------------

std::string to_string(FeatureType t) {
  switch (t) {
    case FeatureType::kJumpUp: return "jump_up";
    case FeatureType::kJumpDown: return "jump_down";
    case FeatureType::kSpikeUp: return "spike_up";
    case FeatureType::kSpikeDown: return "spike_down";
  }
  return "?";
}

namespace {

// Singular shapes at t = E - E_c, bin-averaged through their antiderivatives.
// The kink max(t, 0) steps the slope; t (1 - ln|t|) has the slope -ln|t|.
enum class Shape { kKink, kLog };

// order 1 multiplies the shape by t, the leading correction away from E_c.
double primitive(Shape s, int order, double t) {
  if (s == Shape::kKink) return t > 0.0 ? (order == 0 ? 0.5 * t * t : t * t * t / 3.0) : 0.0;
  if (t == 0.0) return 0.0;
  const double l = std::log(std::abs(t));
  return order == 0 ? 0.75 * t * t - 0.5 * t * t * l : t * t * t * (l / 3.0 - 1.0 / 9.0);
}

double bin_average(Shape s, int order, double a, double b) {
  return (primitive(s, order, b) - primitive(s, order, a)) / (b - a);
}

}  // namespace

std::vector<DensityFeature> detect_features(const DensityGrid& g, const FeatureOptions& o) {
  const int n = g.bins();
  const int w = o.window;
  if (w < 3 || n < 2 * w + 1) throw DomainError("detect_features: window too large for the grid");
  if (o.subdivisions < 1) throw DomainError("detect_features: subdivisions must be >= 1");
  const double h = g.bin_width();
  const double e0 = g.e_edges.front();

  // When every sample landed inside the grid, rho is known to vanish outside it
  // and the grid is padded so that the support edges can be resolved.
  const double dim = basis_dimension(g.reference_n);
  double inside = 0.0;
  for (double r : g.rho) inside += r * h;
  const int pad = std::abs(inside - dim) <= 1e-9 * dim ? w : 0;
  const double empty_error = dim / (static_cast<double>(g.n_samples) * h);
  auto rho = [&](int j) { return j < 0 || j >= n ? 0.0 : g.rho[j]; };
  auto err = [&](int j) { return j < 0 || j >= n ? empty_error : std::max(g.mc_error[j], 1e-300); };

  struct Singular {
    Shape shape;
    double energy;
  };
  std::vector<Singular> accepted;

  // Weighted fit of rho over the bins within w of e: quadratic background, the
  // trial term and every accepted term near the window. Returns the
  // significance of the trial amplitude.
  auto trial = [&](const Singular& t) {
    const int centre = static_cast<int>(std::lround((t.energy - e0) / h));
    const int lo = std::max(centre - w, -pad), hi = std::min(centre + w, n + pad);
    std::vector<const Singular*> terms{&t};
    // A log term bends the background well beyond its own bin, a kink does not.
    for (const auto& s : accepted) {
      const double reach = s.shape == Shape::kLog ? w * h : h;
      if (s.energy > e0 + lo * h - reach && s.energy < e0 + hi * h + reach) terms.push_back(&s);
    }
    const int rows = hi - lo, cols = 3 + 2 * static_cast<int>(terms.size());
    if (rows <= cols + 2) return 0.0;
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
      const int j = lo + r;
      const double inv = 1.0 / err(j);
      const double xa = e0 + j * h - t.energy, xb = xa + h, xm = (xa + 0.5 * h) / (w * h);
      a(r, 0) = inv;
      a(r, 1) = xm * inv;
      a(r, 2) = xm * xm * inv;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const double d = terms[k]->energy - t.energy;
        // Scaled to the window so that the normal matrix stays well conditioned.
        a(r, 3 + 2 * k) = bin_average(terms[k]->shape, 0, xa - d, xb - d) * inv;
        a(r, 4 + 2 * k) = bin_average(terms[k]->shape, 1, xa - d, xb - d) / (w * h) * inv;
      }
      y[r] = rho(j) * inv;
    }
    const Eigen::MatrixXd normal = a.transpose() * a;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) return 0.0;
    const Eigen::VectorXd coef = ldlt.solve(a.transpose() * y);
    const Eigen::VectorXd unit = Eigen::VectorXd::Unit(cols, 3);
    const double var = unit.dot(ldlt.solve(unit));
    if (!(var > 0.0) || !std::isfinite(var)) return 0.0;
    // A poor local fit inflates every amplitude; scale the error by the misfit.
    const double chi2 = (a * coef - y).squaredNorm() / (rows - cols);
    return coef[3] / std::sqrt(var * std::max(1.0, chi2));
  };

  std::vector<DensityFeature> out;
  const int steps = (n + 2 * pad) * o.subdivisions;
  while (static_cast<int>(out.size()) < o.max_features) {
    Singular best{Shape::kKink, 0.0};
    double best_z = 0.0;
    for (int s = 0; s <= steps; ++s) {
      const double e = e0 + (static_cast<double>(s) / o.subdivisions - pad) * h;
      bool near = false;
      for (const auto& a : accepted) near = near || std::abs(a.energy - e) < o.min_separation * h;
      if (near) continue;
      // A divergent slope needs density on both sides of the trial energy.
      const int below = static_cast<int>(std::floor((e - e0) / h)) - 1;
      const bool interior = rho(below) > 0.0 && rho(below + 2) > 0.0;
      for (Shape shape : {Shape::kKink, Shape::kLog}) {
        if (shape == Shape::kLog && !interior) continue;
        const Singular t{shape, e};
        const double z = trial(t);
        if (std::abs(z) > std::abs(best_z)) {
          best_z = z;
          best = t;
        }
      }
    }
    if (std::abs(best_z) < o.threshold) break;
    accepted.push_back(best);
    DensityFeature f;
    if (best.shape == Shape::kKink) {
      f.type = best_z > 0.0 ? FeatureType::kJumpUp : FeatureType::kJumpDown;
    } else {
      f.type = best_z > 0.0 ? FeatureType::kSpikeUp : FeatureType::kSpikeDown;
    }
    f.energy = best.energy;
    f.bin = std::clamp(static_cast<int>(std::floor((best.energy - e0) / h)), 0, n - 1);
    f.significance = std::abs(best_z);
    out.push_back(f);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double gauss(double u, double width) {
  return std::exp(-0.5 * u * u / (width * width)) / (width * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

std::vector<double> smoothed_quantum_density(const SpectrumResult& s, const std::vector<double>& e_centers,
                                             double width) {
  if (!(width > 0.0)) throw DomainError("smoothing width must be positive");
  const double scale = quantum_energy_scale(s.N);
  std::vector<double> rho(e_centers.size(), 0.0);
  for (std::size_t b = 0; b < e_centers.size(); ++b) {
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) rho[b] += gauss(e_centers[b] - s.eigenvalues[i] / scale, width);
  }
  return rho;
}

FlowGrid smoothed_flow(const std::vector<SpectrumResult>& spectra, const std::vector<double>& e_centers, double width,
                       bool finite_difference) {
  if (spectra.empty()) throw DomainError("smoothed_flow: no spectra");
  if (!(width > 0.0)) throw DomainError("smoothed_flow: width must be positive");
  for (const auto& s : spectra) {
    if (s.N != spectra[0].N) throw DomainError("smoothed_flow: spectra with different N");
    if (s.params.beta0p != spectra[0].params.beta0p) throw DomainError("smoothed_flow: spectra with different beta0'");
  }
  const SpectrumResult* centre = &spectra[0];
  Eigen::VectorXd slopes;
  if (finite_difference) {
    if (spectra.size() != 3) throw DomainError("smoothed_flow: finite differences need spectra at lambda - d, lambda, lambda + d");
    centre = &spectra[1];
    const double dl = spectra[2].params.lambda - spectra[0].params.lambda;
    if (!(dl > 0.0)) throw DomainError("smoothed_flow: lambda values must increase");
    slopes = (spectra[2].eigenvalues - spectra[0].eigenvalues) / dl;
  } else {
    slopes = centre->slopes;
  }
  const double scale = quantum_energy_scale(centre->N);
  FlowGrid f;
  f.e_centers = e_centers;
  f.jbar.assign(e_centers.size(), 0.0);
  f.rhobar = smoothed_quantum_density(*centre, e_centers, width);
  for (std::size_t b = 0; b < e_centers.size(); ++b) {
    for (Eigen::Index i = 0; i < centre->eigenvalues.size(); ++i) {
      f.jbar[b] += slopes[i] / scale * gauss(e_centers[b] - centre->eigenvalues[i] / scale, width);
    }
  }
  f.phibar.resize(e_centers.size());
  for (std::size_t b = 0; b < e_centers.size(); ++b) {
    f.phibar[b] = f.rhobar[b] > 1e-300 ? f.jbar[b] / f.rhobar[b] : 0.0;
  }
  return f;
}

ContinuityCheck continuity_check(double beta0p, double lambda, int N, double width,
                                 const std::vector<double>& e_centers, double dlambda) {
  if (!(dlambda > 0.0)) throw DomainError("continuity_check: dlambda must be positive");
  if (lambda - dlambda < 0.0) throw DomainError("continuity_check: lambda - dlambda below 0");
  if (lambda - dlambda < kLambdaCritical && lambda + dlambda > kLambdaCritical) {
    throw DomainError("continuity_check: the stencil straddles lambda = 1");
  }
  const SpectrumResult lo = diagonalize(ModelParams(beta0p, lambda - dlambda), N);
  const SpectrumResult mid = diagonalize(ModelParams(beta0p, lambda), N);
  const SpectrumResult hi = diagonalize(ModelParams(beta0p, lambda + dlambda), N);
  const auto rlo = smoothed_quantum_density(lo, e_centers, width);
  const auto rhi = smoothed_quantum_density(hi, e_centers, width);

  // dj/dE analytically: the kernel derivative is known in closed form.
  const double scale = quantum_energy_scale(N);
  ContinuityCheck c;
  c.e_centers = e_centers;
  for (std::size_t b = 0; b < e_centers.size(); ++b) {
    double dj = 0.0;
    for (Eigen::Index i = 0; i < mid.eigenvalues.size(); ++i) {
      const double u = e_centers[b] - mid.eigenvalues[i] / scale;
      dj += mid.slopes[i] / scale * (-u / (width * width)) * gauss(u, width);
    }
    const double dr = (rhi[b] - rlo[b]) / (2.0 * dlambda);
    c.drho_dlambda.push_back(dr);
    c.djbar_dE.push_back(dj);
    c.residual.push_back(dr + dj);
    c.max_residual = std::max(c.max_residual, std::abs(dr + dj));
    c.max_djbar_dE = std::max(c.max_djbar_dE, std::abs(dj));
  }
  return c;
}

CountingComparison compare_counting(const SpectrumResult& s, const DensityGrid& g, double e_lo, double e_hi) {
  if (s.N != g.reference_n) throw DomainError("compare_counting: grid normalised to a different N");
  const double scale = quantum_energy_scale(s.N);
  CountingComparison c;
  c.dimension = static_cast<int>(s.eigenvalues.size());
  double cumulative = 0.0;
  const double h = g.bin_width();
  for (int b = 0; b < g.bins(); ++b) {
    cumulative += g.rho[b] * h;
    const double e = g.e_edges[b + 1];
    if (e < e_lo || e > e_hi) continue;
    const double q = static_cast<double>((s.eigenvalues.array() / scale <= e).count());
    c.energies.push_back(e);
    c.quantum.push_back(q);
    c.semiclassical.push_back(cumulative);
    c.max_deviation = std::max(c.max_deviation, std::abs(q - cumulative));
  }
  return c;
}

}  // namespace esqpt
