#include "esqpt/ibm_quantum.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include <json.hpp>

namespace esqpt {

namespace {

using Occupation = std::array<std::uint8_t, 5>;

std::uint64_t pack(const Occupation& o) {
  std::uint64_t k = 0;
  for (int i = 0; i < 5; ++i) k |= static_cast<std::uint64_t>(o[i]) << (8 * i);
  return k;
}

// All M=0 occupations of n d bosons, in lexicographic order.
DBlock enumerate_block(int n) {
  DBlock b;
  for (int a = 0; a <= n; ++a) {          // n_{-2}
    for (int c = 0; a + c <= n; ++c) {    // n_{-1}
      for (int e = 0; a + c + e <= n; ++e) {  // n_{+1}
        // n_{+2} fixed by M = 0, n_0 by the total.
        const int twice = 2 * a + c - e;
        if (twice < 0 || twice % 2 != 0) continue;
        const int f = twice / 2;
        const int z = n - a - c - e - f;
        if (z < 0) continue;
        b.occupations.push_back({static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(c),
                                 static_cast<std::uint8_t>(z), static_cast<std::uint8_t>(e),
                                 static_cast<std::uint8_t>(f)});
      }
    }
  }
  std::sort(b.occupations.begin(), b.occupations.end());
  return b;
}

double ln_factorial_ratio_sqrt(int n, int k) {
  // sqrt(n! / (n - k)!)
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= std::sqrt(static_cast<double>(n - i));
  return r;
}

struct DPart {
  std::vector<int> creators;      // 0..4 offsets into the occupation array
  std::vector<int> annihilators;
  int s_creators = 0;
  int s_annihilators = 0;
};

DPart split(const Monomial& m) {
  DPart p;
  for (int c : m.creators) {
    if (c == kModeS) ++p.s_creators;
    else p.creators.push_back(c - 1);
  }
  for (int a : m.annihilators) {
    if (a == kModeS) ++p.s_annihilators;
    else p.annihilators.push_back(a - 1);
  }
  return p;
}

int projection(const DPart& p) {
  int m = 0;
  for (int c : p.creators) m += c - 2;
  for (int a : p.annihilators) m -= a - 2;
  return m;
}

}  // namespace

struct L0Basis::Lookup {
  std::unordered_map<std::uint64_t, int> index;
};

int L0Basis::block_index(const Occupation& occ) const {
  auto it = lookup_->index.find(pack(occ));
  return it == lookup_->index.end() ? -1 : it->second;
}

std::vector<std::pair<std::array<int, 6>, double>> L0Basis::fock_components(int i) const {
  const BasisLabel& l = labels_.at(i);
  const DBlock& b = block(l.n_d);
  const Eigen::VectorXd& v = vectors_.at(i);
  std::vector<std::pair<std::array<int, 6>, double>> out;
  for (std::size_t k = 0; k < b.occupations.size(); ++k) {
    if (v[k] == 0.0) continue;
    std::array<int, 6> o{N_ - l.n_d};
    for (int m = 0; m < 5; ++m) o[m + 1] = b.occupations[k][m];
    out.emplace_back(o, v[k]);
  }
  return out;
}

int basis_dimension(int N) {
  if (N < 0) throw DomainError("basis_dimension: N must be >= 0");
  int dim = 0;
  for (int nd = 0; nd <= N; ++nd) {
    for (int t = 0; 3 * t <= nd; ++t) {
      if ((nd - 3 * t) % 2 == 0) ++dim;
    }
  }
  return dim;
}

namespace {

// Applies the d-boson part of a monomial to a block vector of n_from bosons.
void apply_d(const DPart& p, const DBlock& from, const Eigen::VectorXd& v, const L0Basis& basis,
             Eigen::VectorXd& out) {
  for (std::size_t k = 0; k < from.occupations.size(); ++k) {
    if (v[k] == 0.0) continue;
    std::array<int, 5> occ;
    for (int m = 0; m < 5; ++m) occ[m] = from.occupations[k][m];
    double amp = v[k];
    bool ok = true;
    for (int a : p.annihilators) {
      if (occ[a] == 0) {
        ok = false;
        break;
      }
      amp *= std::sqrt(static_cast<double>(occ[a]));
      --occ[a];
    }
    if (!ok) continue;
    for (int c : p.creators) {
      ++occ[c];
      amp *= std::sqrt(static_cast<double>(occ[c]));
    }
    Occupation packed;
    for (int m = 0; m < 5; ++m) {
      if (occ[m] > 255) throw DomainError("boson occupation beyond 255");
      packed[m] = static_cast<std::uint8_t>(occ[m]);
    }
    const int idx = basis.block_index(packed);
    if (idx < 0) throw DomainError("operator leaves the M=0 space");
    out[idx] += amp;
  }
}

const BosonExpr& pair_creation() {
  static const BosonExpr p = scalar_product(TensorOp::d_dagger(), TensorOp::d_dagger());
  return p;
}

const BosonExpr& cubic_creation() {
  static const BosonExpr c = [] {
    const TensorOp dd = TensorOp::d_dagger();
    return couple(couple(dd, dd, 2), dd, 0)[0];
  }();
  return c;
}

// Applies a pure d-boson expression to a block vector.
Eigen::VectorXd apply_d_expr(const BosonExpr& e, int n_from, int n_to, const Eigen::VectorXd& v,
                             const std::vector<DBlock>& blocks, const L0Basis& basis) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(blocks[n_to].occupations.size()));
  for (const auto& [m, c] : e.terms()) {
    Eigen::VectorXd part = Eigen::VectorXd::Zero(out.size());
    apply_d(split(m), blocks[n_from], v, basis, part);
    out += c.real() * part;
  }
  return out;
}

}  // namespace

L0Basis build_basis(int N) {
  if (N < 0) throw DomainError("build_basis: N must be >= 0");
  if (N > 255) throw DomainError("build_basis: N beyond the occupation range");
  L0Basis basis;
  basis.N_ = N;
  auto blocks = std::make_shared<std::vector<DBlock>>();
  auto lookup = std::make_shared<L0Basis::Lookup>();
  for (int n = 0; n <= N; ++n) {
    blocks->push_back(enumerate_block(n));
    const auto& occ = blocks->back().occupations;
    for (std::size_t k = 0; k < occ.size(); ++k) lookup->index.emplace(pack(occ[k]), static_cast<int>(k));
  }
  basis.blocks_ = blocks;
  basis.lookup_ = lookup;

  // Seniority states per n_d: pair-creation lifts of the n_d - 2 states plus,
  // for n_d divisible by 3, one new state of seniority n_d built with the
  // cubic scalar and orthogonalised against the lifts.
  std::vector<std::vector<std::pair<int, Eigen::VectorXd>>> states(N + 1);
  for (int n = 0; n <= N; ++n) {
    if (n == 0) {
      states[0].emplace_back(0, Eigen::VectorXd::Ones(1));
      continue;
    }
    if (n >= 2) {
      for (const auto& [tau, v] : states[n - 2]) {
        Eigen::VectorXd w = apply_d_expr(pair_creation(), n - 2, n, v, *blocks, basis);
        w.normalize();
        states[n].emplace_back(tau, std::move(w));
      }
    }
    if (n % 3 == 0) {
      const auto& prev = states[n - 3];
      auto it = std::find_if(prev.begin(), prev.end(), [&](const auto& s) { return s.first == n - 3; });
      if (it == prev.end()) throw NumericalError("build_basis: missing seniority state");
      Eigen::VectorXd h = apply_d_expr(cubic_creation(), n - 3, n, it->second, *blocks, basis);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& [tau, v] : states[n]) h -= v.dot(h) * v;
      }
      const double norm = h.norm();
      if (!(norm > 1e-8)) throw NumericalError("build_basis: degenerate seniority construction");
      h /= norm;
      // Sign convention: largest component positive.
      Eigen::Index imax = 0;
      h.cwiseAbs().maxCoeff(&imax);
      if (h[imax] < 0) h = -h;
      states[n].emplace_back(n, std::move(h));
    }
    std::sort(states[n].begin(), states[n].end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  for (int n = 0; n <= N; ++n) {
    for (auto& [tau, v] : states[n]) {
      basis.labels_.push_back({n, tau});
      basis.vectors_.push_back(std::move(v));
    }
  }
  return basis;
}

Eigen::MatrixXd operator_matrix(const BosonExpr& op, const L0Basis& basis) {
  if (!op.conserves_number()) throw DomainError("operator_matrix: operator does not conserve boson number");
  const int dim = basis.dimension();
  const int N = basis.N();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);

  // Index ranges of each n_d in the (n_d, tau)-sorted label list.
  std::vector<int> first(N + 2, dim);
  for (int i = dim - 1; i >= 0; --i) first[basis.label(i).n_d] = i;
  for (int n = N; n >= 0; --n) first[n] = std::min(first[n], first[n + 1]);

  for (const auto& [m, c] : op.terms()) {
    if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c))) {
      throw DomainError("operator_matrix: complex coefficients are not supported in the real L=0 basis");
    }
    const DPart p = split(m);
    if (projection(p) != 0) throw DomainError("operator_matrix: operator changes M");
    const int dnd = static_cast<int>(p.creators.size()) - static_cast<int>(p.annihilators.size());
    for (int j = 0; j < dim; ++j) {
      const int nd = basis.label(j).n_d;
      const int ns = N - nd;
      const int nd_to = nd + dnd;
      if (ns < p.s_annihilators || nd < static_cast<int>(p.annihilators.size()) || nd_to < 0 || nd_to > N) continue;
      const double sfac = ln_factorial_ratio_sqrt(ns, p.s_annihilators) *
                          ln_factorial_ratio_sqrt(ns - p.s_annihilators + p.s_creators, p.s_creators);
      Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.block(nd_to).occupations.size()));
      apply_d(p, basis.block(nd), basis.d_vector(j), basis, w);
      for (int i = first[nd_to]; i < first[nd_to + 1]; ++i) {
        M(i, j) += c.real() * sfac * basis.d_vector(i).dot(w);
      }
    }
  }
  return 0.5 * (M + M.transpose());
}

// ---------------------------------------------------------------------------

TensorOp d_pair_dagger(double beta0p, double zeta) {
  const TensorOp sd = TensorOp::s_dagger(), dd = TensorOp::d_dagger();
  return couple(sd, dd, 2).scaled(std::sqrt(2.0) * beta0p) + couple(dd, dd, 2).scaled(std::sqrt(7.0) * zeta);
}

BosonExpr s_pair_dagger(double beta0p) {
  const BosonExpr sd = BosonExpr::creator(kModeS);
  return pair_creation() - (sd * sd) * (beta0p * beta0p);
}

const IbmOperators& ibm_operators() {
  static const IbmOperators ops = [] {
    IbmOperators o;
    const TensorOp sd = TensorOp::s_dagger(), dd = TensorOp::d_dagger();
    o.nd = scalar_product(dd, TensorOp::d_tilde()).pruned();
    o.nd_pairs = (o.nd * o.nd - o.nd).pruned();
    const TensorOp u = couple(sd, dd, 2).scaled(std::sqrt(2.0));
    const TensorOp v = couple(dd, dd, 2).scaled(std::sqrt(7.0));
    const TensorOp ut = u.conjugate_tilde(), vt = v.conjugate_tilde();
    o.uu = scalar_product(u, ut).pruned();
    o.uv = (scalar_product(u, vt) + scalar_product(v, ut)).pruned();
    o.vv = scalar_product(v, vt).pruned();
    const BosonExpr P = pair_creation();
    const BosonExpr s = BosonExpr::annihilator(kModeS), sdag = BosonExpr::creator(kModeS);
    o.pp = (P * P.adjoint()).pruned();
    o.pss = (P * (s * s) + (sdag * sdag) * P.adjoint()).pruned();
    o.ssss = (sdag * sdag * s * s).pruned();
    return o;
  }();
  return ops;
}

BosonExpr hamiltonian_expr(const ModelParams& params) {
  params.validate();
  const double z = params.zeta(), xi = params.xi(), b = params.beta0p;
  const TensorOp D = d_pair_dagger(b, z);
  BosonExpr h = scalar_product(D, D.conjugate_tilde());
  if (z < 1.0) h += ibm_operators().nd_pairs * (2.0 * (1.0 - z * z));
  if (xi > 0.0) {
    const BosonExpr S = s_pair_dagger(b);
    h += (S * S.adjoint()) * xi;
  }
  return h.pruned();
}

HamiltonianTerms compute_hamiltonian_terms(const L0Basis& basis) {
  const IbmOperators& o = ibm_operators();
  HamiltonianTerms t;
  t.N = basis.N();
  t.nd = operator_matrix(o.nd, basis);
  t.nd_pairs = operator_matrix(o.nd_pairs, basis);
  t.uu = operator_matrix(o.uu, basis);
  t.uv = operator_matrix(o.uv, basis);
  t.vv = operator_matrix(o.vv, basis);
  t.pp = operator_matrix(o.pp, basis);
  t.pss = operator_matrix(o.pss, basis);
  t.ssss = operator_matrix(o.ssss, basis);
  return t;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const nlohmann::json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (j[r].size() != static_cast<std::size_t>(n)) throw DomainError("terms cache: ragged matrix");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

void save_terms_cache(const std::string& path, const HamiltonianTerms& t) {
  nlohmann::json j;
  j["format"] = "esqpt-l0-terms-1";
  j["N"] = t.N;
  j["nd"] = matrix_json(t.nd);
  j["nd_pairs"] = matrix_json(t.nd_pairs);
  j["uu"] = matrix_json(t.uu);
  j["uv"] = matrix_json(t.uv);
  j["vv"] = matrix_json(t.vv);
  j["pp"] = matrix_json(t.pp);
  j["pss"] = matrix_json(t.pss);
  j["ssss"] = matrix_json(t.ssss);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write terms cache " + path);
  out << j.dump() << '\n';
}

HamiltonianTerms load_terms_cache(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read terms cache " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "esqpt-l0-terms-1") throw DomainError("terms cache: unknown format");
  HamiltonianTerms t;
  t.N = j.at("N").get<int>();
  t.nd = json_matrix(j.at("nd"));
  t.nd_pairs = json_matrix(j.at("nd_pairs"));
  t.uu = json_matrix(j.at("uu"));
  t.uv = json_matrix(j.at("uv"));
  t.vv = json_matrix(j.at("vv"));
  t.pp = json_matrix(j.at("pp"));
  t.pss = json_matrix(j.at("pss"));
  t.ssss = json_matrix(j.at("ssss"));
  if (t.nd.rows() != basis_dimension(t.N)) throw DomainError("terms cache: dimension does not match N");
  return t;
}

std::shared_ptr<const HamiltonianTerms> hamiltonian_terms(int N, const std::string& cache_dir) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const HamiltonianTerms>> memo;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find(N);
    if (it != memo.end()) return it->second;
  }
  std::shared_ptr<const HamiltonianTerms> t;
  const std::filesystem::path file =
      cache_dir.empty() ? std::filesystem::path() : std::filesystem::path(cache_dir) / ("l0_terms_N" + std::to_string(N) + ".json");
  if (!cache_dir.empty() && std::filesystem::exists(file)) {
    t = std::make_shared<const HamiltonianTerms>(load_terms_cache(file.string()));
  } else {
    t = std::make_shared<const HamiltonianTerms>(compute_hamiltonian_terms(build_basis(N)));
    if (!cache_dir.empty()) {
      std::filesystem::create_directories(cache_dir);
      save_terms_cache(file.string(), *t);
    }
  }
  std::lock_guard<std::mutex> lock(mu);
  return memo.emplace(N, t).first->second;
}

Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const HamiltonianTerms& t) {
  params.validate();
  const Eigen::Index dim = t.nd.rows();
  if (t.N == 0) return Eigen::MatrixXd::Zero(dim, dim);
  const double b = params.beta0p, z = params.zeta(), xi = params.xi(), b2 = b * b;
  Eigen::MatrixXd h = 2.0 * (1.0 - z * z) * t.nd_pairs + b2 * t.uu + b * z * t.uv + z * z * t.vv;
  if (xi > 0.0) h += xi * (t.pp - b2 * t.pss + b2 * b2 * t.ssss);
  h /= static_cast<double>(t.N);
  return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const L0Basis& basis) {
  return build_hamiltonian(params, compute_hamiltonian_terms(basis));
}

Eigen::MatrixXd hamiltonian_lambda_derivative(const ModelParams& params, const HamiltonianTerms& t,
                                              SlopeSide side) {
  params.validate();
  const Eigen::Index dim = t.nd.rows();
  if (t.N == 0) return Eigen::MatrixXd::Zero(dim, dim);
  bool left = params.lambda <= kLambdaCritical;
  if (side == SlopeSide::kLeft) {
    if (params.lambda > kLambdaCritical) throw DomainError("left slope requested above lambda = 1");
    left = true;
  } else if (side == SlopeSide::kRight) {
    if (params.lambda < kLambdaCritical) throw DomainError("right slope requested below lambda = 1");
    left = false;
  }
  const double b = params.beta0p, b2 = b * b;
  Eigen::MatrixXd d;
  if (left) {
    const double z = params.zeta();
    d = -4.0 * z * t.nd_pairs + b * t.uv + 2.0 * z * t.vv;
  } else {
    d = t.pp - b2 * t.pss + b2 * b2 * t.ssss;
  }
  d /= static_cast<double>(t.N);
  return 0.5 * (d + d.transpose());
}

// ---------------------------------------------------------------------------

namespace {

void dump_matrix(const Eigen::MatrixXd& h, const std::string& tag) {
  std::error_code ec;
  const auto path = std::filesystem::temp_directory_path(ec) / ("esqpt_failed_" + tag + ".txt");
  std::ofstream out(path);
  out.precision(17);
  out << h << '\n';
}

// Expectations of `op` in the eigenbasis; inside near-degenerate blocks the
// projected operator is diagonalised instead.
Eigen::VectorXd block_expectations(const Eigen::VectorXd& evals, const Eigen::MatrixXd& evecs,
                                   const Eigen::MatrixXd& op, std::vector<bool>& degenerate) {
  const Eigen::Index n = evals.size();
  Eigen::VectorXd out(n);
  degenerate.assign(n, false);
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i + 1;
    while (j < n && evals[j] - evals[j - 1] <= 1e-9 * scale) ++j;
    const Eigen::MatrixXd v = evecs.middleCols(i, j - i);
    const Eigen::MatrixXd proj = v.transpose() * op * v;
    if (j - i == 1) {
      out[i] = proj(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (proj + proj.transpose()), Eigen::EigenvaluesOnly);
      out.segment(i, j - i) = es.eigenvalues();
      for (Eigen::Index k = i; k < j; ++k) degenerate[k] = true;
    }
    i = j;
  }
  return out;
}

}  // namespace

SpectrumResult diagonalize(const ModelParams& params, int N, const DiagonalizeOptions& options) {
  params.validate();
  if (N < 0) throw DomainError("diagonalize: N must be >= 0");
  if (N > options.max_bosons) {
    throw DomainError("diagonalize: N = " + std::to_string(N) + " exceeds the cap " + std::to_string(options.max_bosons));
  }
  SpectrumResult r;
  r.params = params;
  r.N = N;
  r.terms = hamiltonian_terms(N, options.cache_dir);
  const Eigen::MatrixXd h = build_hamiltonian(params, *r.terms);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) {
    dump_matrix(h, "N" + std::to_string(N));
    throw NumericalError("diagonalize: eigensolver did not converge (matrix dumped to the temp directory)");
  }
  r.eigenvalues = es.eigenvalues();
  const Eigen::MatrixXd& vecs = es.eigenvectors();
  std::vector<bool> unused;
  r.slopes = block_expectations(r.eigenvalues, vecs, hamiltonian_lambda_derivative(params, *r.terms, options.side),
                                r.degenerate);
  r.nd_expectation = (vecs.transpose() * r.terms->nd * vecs).diagonal();
  if (options.keep_vectors) r.eigenvectors = vecs;
  return r;
}

Eigen::VectorXd hf_slopes(const ModelParams& params, int N, SlopeSide side) {
  DiagonalizeOptions o;
  o.side = side;
  return diagonalize(params, N, o).slopes;
}

SlopePair hf_slopes_both(const ModelParams& params, int N) {
  SlopePair p;
  if (params.lambda < kLambdaCritical) {
    p.left = p.right = hf_slopes(params, N, SlopeSide::kLeft);
  } else if (params.lambda > kLambdaCritical) {
    p.left = p.right = hf_slopes(params, N, SlopeSide::kRight);
  } else {
    p.left = hf_slopes(params, N, SlopeSide::kLeft);
    p.right = hf_slopes(params, N, SlopeSide::kRight);
  }
  return p;
}

double quantum_energy_scale(int N) {
  if (N <= 0) throw DomainError("quantum_energy_scale: N must be positive");
  return 2.0 * N;
}

OscillatoryGrid oscillatory_density(const SpectrumResult& spectrum, const DensityGrid& smooth,
                                    const OscillatoryOptions& options) {
  if (spectrum.N != smooth.reference_n) {
    throw DomainError("oscillatory_density: smooth grid is normalised to a different N");
  }
  if (!(options.c > 0.0) || !(options.sigma_max > 0.0)) throw DomainError("oscillatory_density: bad width rule");
  const double scale = quantum_energy_scale(spectrum.N);
  OscillatoryGrid g;
  const int bins = smooth.bins();
  for (int b = 0; b < bins; ++b) {
    const double e = smooth.center(b);
    const double rho = smooth.rho[b];
    const double sigma = rho > 0.0 ? std::min(options.c / rho, options.sigma_max) : options.sigma_max;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) {
      const double u = (e - spectrum.eigenvalues[i] / scale) / sigma;
      if (std::abs(u) < 10.0) sum += std::exp(-0.5 * u * u);
    }
    sum /= sigma * std::sqrt(2.0 * std::numbers::pi);
    g.e_centers.push_back(e);
    g.rho_smooth.push_back(rho);
    g.rho_osc.push_back(sum - rho);
    g.sigma.push_back(sigma);
  }
  return g;
}

}  // namespace esqpt
