#include "esqpt/boson_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "esqpt/clebsch_gordan.hpp"

namespace esqpt {

std::string mode_name(int mode) {
  if (mode == kModeS) return "s";
  if (mode >= 1 && mode < kModes) return "d" + std::to_string(d_projection(mode));
  throw DomainError("unknown boson mode " + std::to_string(mode));
}

namespace {

void check_mode(int mode) {
  if (mode < 0 || mode >= kModes) throw DomainError("boson mode out of range: " + std::to_string(mode));
}

Word word_of(const Monomial& m) {
  Word w;
  for (int c : m.creators) w.push_back({c, true});
  for (int a : m.annihilators) w.push_back({a, false});
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------

BosonExpr BosonExpr::scalar(Complex c) {
  BosonExpr e;
  e.add(Monomial{}, c);
  return e;
}

BosonExpr BosonExpr::creator(int mode) {
  check_mode(mode);
  return monomial(Monomial{{mode}, {}});
}

BosonExpr BosonExpr::annihilator(int mode) {
  check_mode(mode);
  return monomial(Monomial{{}, {mode}});
}

BosonExpr BosonExpr::number(int mode) {
  check_mode(mode);
  return monomial(Monomial{{mode}, {mode}});
}

BosonExpr BosonExpr::monomial(const Monomial& m, Complex c) {
  Monomial sorted = m;
  std::sort(sorted.creators.begin(), sorted.creators.end());
  std::sort(sorted.annihilators.begin(), sorted.annihilators.end());
  BosonExpr e;
  e.add(sorted, c);
  return e;
}

void BosonExpr::add(const Monomial& m, Complex c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
  hermitian_ = conserving_ = false;
}

Complex BosonExpr::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Complex(0.0) : it->second;
}

BosonExpr BosonExpr::adjoint() const {
  // (b+_C b_A)^+ = b+_A b_C, still normal-ordered.
  BosonExpr e;
  for (const auto& [m, c] : terms_) e.add(Monomial{m.annihilators, m.creators}, std::conj(c));
  return e;
}

bool BosonExpr::is_hermitian(double tol) const { return distance(adjoint()) <= tol; }

bool BosonExpr::conserves_number() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const auto& t) { return t.first.creators.size() == t.first.annihilators.size(); });
}

int BosonExpr::max_operator_count() const {
  int n = 0;
  for (const auto& [m, c] : terms_) n = std::max(n, m.operator_count());
  return n;
}

BosonExpr BosonExpr::pruned(double tol) const {
  BosonExpr e;
  for (const auto& [m, c] : terms_) {
    if (std::abs(c) > tol) e.terms_.emplace(m, c);
  }
  return e;
}

double BosonExpr::distance(const BosonExpr& other) const {
  double d = 0.0;
  for (const auto& [m, c] : terms_) d = std::max(d, std::abs(c - other.coefficient(m)));
  for (const auto& [m, c] : other.terms_) {
    if (!terms_.count(m)) d = std::max(d, std::abs(c));
  }
  return d;
}

BosonExpr& BosonExpr::mark_hermitian(double tol) {
  if (!is_hermitian(tol)) throw DomainError("expression is not Hermitian");
  hermitian_ = true;
  return *this;
}

BosonExpr& BosonExpr::mark_number_conserving() {
  if (!conserves_number()) throw DomainError("expression does not conserve boson number");
  conserving_ = true;
  return *this;
}

BosonExpr& BosonExpr::operator+=(const BosonExpr& o) {
  for (const auto& [m, c] : o.terms_) add(m, c);
  return *this;
}

BosonExpr& BosonExpr::operator-=(const BosonExpr& o) {
  for (const auto& [m, c] : o.terms_) add(m, -c);
  return *this;
}

BosonExpr& BosonExpr::operator*=(Complex c) {
  if (c == 0.0) {
    terms_.clear();
  } else {
    for (auto& [m, v] : terms_) v *= c;
  }
  hermitian_ = conserving_ = false;
  return *this;
}

BosonExpr operator*(const BosonExpr& a, const BosonExpr& b) {
  RawExpr raw;
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      Word w = word_of(ma);
      const Word wb = word_of(mb);
      w.insert(w.end(), wb.begin(), wb.end());
      raw.push_back({ca * cb, std::move(w)});
    }
  }
  return normal_order(raw);
}

// ---------------------------------------------------------------------------

BosonExpr normal_order(const RawExpr& expr) {
  BosonExpr out;
  std::vector<RawTerm> stack(expr.rbegin(), expr.rend());
  while (!stack.empty()) {
    RawTerm t = std::move(stack.back());
    stack.pop_back();
    if (t.coefficient == 0.0) continue;
    // First annihilator that is immediately followed by a creator.
    std::size_t i = 0;
    while (i + 1 < t.word.size() && !(!t.word[i].dagger && t.word[i + 1].dagger)) ++i;
    if (i + 1 >= t.word.size()) {
      Monomial m;
      for (const auto& l : t.word) {
        check_mode(l.mode);
        (l.dagger ? m.creators : m.annihilators).push_back(l.mode);
      }
      out += BosonExpr::monomial(m, t.coefficient);
      continue;
    }
    // b_k b+_l = b+_l b_k + delta_kl
    if (t.word[i].mode == t.word[i + 1].mode) {
      RawTerm contracted{t.coefficient, {}};
      contracted.word.reserve(t.word.size() - 2);
      for (std::size_t k = 0; k < t.word.size(); ++k) {
        if (k != i && k != i + 1) contracted.word.push_back(t.word[k]);
      }
      stack.push_back(std::move(contracted));
    }
    std::swap(t.word[i], t.word[i + 1]);
    stack.push_back(std::move(t));
  }
  return out;
}

BosonExpr normal_order(const Word& word) { return normal_order(RawExpr{RawTerm{1.0, word}}); }

RawExpr parse_operator(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);

  RawExpr out;
  RawTerm current;
  bool have_content = false;
  double sign = 1.0;
  auto flush = [&]() {
    if (!have_content) throw DomainError("parse_operator: empty term in '" + text + "'");
    current.coefficient *= sign;
    out.push_back(std::move(current));
    current = RawTerm{};
    have_content = false;
  };
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const std::string& tok = tokens[k];
    if (tok == "+" || tok == "-") {
      if (have_content) flush();
      else if (!out.empty() || k > 0) throw DomainError("parse_operator: dangling operator sign");
      sign = tok == "-" ? -1.0 : 1.0;
      continue;
    }
    if (tok == "*") continue;
    if (tok == "i") {
      current.coefficient *= Complex(0.0, 1.0);
      have_content = true;
      continue;
    }
    if (tok[0] == 's' || tok[0] == 'd') {
      bool dagger = tok.size() > 1 && tok.back() == '+';
      std::string body = dagger ? tok.substr(0, tok.size() - 1) : tok;
      int mode = -1;
      if (body == "s") {
        mode = kModeS;
      } else if (body[0] == 'd' && body.size() >= 2) {
        std::size_t used = 0;
        int mu = 0;
        try {
          mu = std::stoi(body.substr(1), &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == body.size() - 1 && mu >= -2 && mu <= 2) mode = d_mode(mu);
      }
      if (mode < 0) throw DomainError("parse_operator: bad ladder token '" + tok + "'");
      current.word.push_back({mode, dagger});
      have_content = true;
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw DomainError("parse_operator: bad token '" + tok + "'");
    current.coefficient *= v;
    have_content = true;
  }
  if (have_content) flush();
  return out;
}

// ---------------------------------------------------------------------------

TensorOp::TensorOp(int rank, std::vector<BosonExpr> components) : rank_(rank), components_(std::move(components)) {
  if (rank < 0 || components_.size() != static_cast<std::size_t>(2 * rank + 1)) {
    throw DomainError("TensorOp: component count must equal 2 rank + 1");
  }
}

namespace {
double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }
}  // namespace

TensorOp TensorOp::tilde() const {
  std::vector<BosonExpr> c;
  for (int m = -rank_; m <= rank_; ++m) c.push_back((*this)[-m] * parity(rank_ + m));
  return TensorOp(rank_, std::move(c));
}

TensorOp TensorOp::conjugate_tilde() const {
  std::vector<BosonExpr> c;
  for (int m = -rank_; m <= rank_; ++m) c.push_back((*this)[-m].adjoint() * parity(rank_ + m));
  return TensorOp(rank_, std::move(c));
}

TensorOp TensorOp::scaled(Complex f) const {
  std::vector<BosonExpr> c = components_;
  for (auto& e : c) e *= f;
  return TensorOp(rank_, std::move(c));
}

TensorOp TensorOp::operator+(const TensorOp& o) const {
  if (o.rank_ != rank_) throw DomainError("TensorOp: adding tensors of different rank");
  std::vector<BosonExpr> c = components_;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.components_[i];
  return TensorOp(rank_, std::move(c));
}

TensorOp TensorOp::s_dagger() { return TensorOp(0, {BosonExpr::creator(kModeS)}); }

TensorOp TensorOp::d_dagger() {
  std::vector<BosonExpr> c;
  for (int mu = -2; mu <= 2; ++mu) c.push_back(BosonExpr::creator(d_mode(mu)));
  return TensorOp(2, std::move(c));
}

TensorOp TensorOp::s_tilde() { return TensorOp(0, {BosonExpr::annihilator(kModeS)}); }

TensorOp TensorOp::d_tilde() {
  std::vector<BosonExpr> c;
  for (int mu = -2; mu <= 2; ++mu) c.push_back(BosonExpr::annihilator(d_mode(-mu)) * parity(mu));
  return TensorOp(2, std::move(c));
}

TensorOp couple(const TensorOp& a, const TensorOp& b, int rank) {
  if (rank < std::abs(a.rank() - b.rank()) || rank > a.rank() + b.rank()) {
    throw DomainError("couple: rank " + std::to_string(rank) + " not allowed for " + std::to_string(a.rank()) +
                      " x " + std::to_string(b.rank()));
  }
  std::vector<BosonExpr> c;
  for (int m = -rank; m <= rank; ++m) {
    BosonExpr comp;
    for (int ma = -a.rank(); ma <= a.rank(); ++ma) {
      const int mb = m - ma;
      if (std::abs(mb) > b.rank()) continue;
      const double cg = clebsch_gordan(a.rank(), ma, b.rank(), mb, rank, m);
      if (cg == 0.0) continue;
      comp += (a[ma] * b[mb]) * cg;
    }
    c.push_back(std::move(comp));
  }
  return TensorOp(rank, std::move(c));
}

BosonExpr scalar_product(const TensorOp& a, const TensorOp& b) {
  if (a.rank() != b.rank()) throw DomainError("scalar_product: rank mismatch");
  const int l = a.rank();
  return couple(a, b, 0)[0] * (parity(l) * std::sqrt(2.0 * l + 1.0));
}

// ---------------------------------------------------------------------------

std::array<Complex, kModes> PhaseFunction::amplitudes(int f, const Eigen::VectorXd& qp) {
  if (qp.size() != 2 * f) throw DomainError("phase function expects " + std::to_string(2 * f) + " coordinates");
  const double r2 = qp.squaredNorm();
  if (r2 > 2.0 * (1.0 + 1e-12)) throw DomainError("phase point outside the ball R^2 <= 2");
  std::array<Complex, kModes> a{};
  a[kModeS] = std::sqrt(std::max(0.0, 1.0 - 0.5 * r2));
  if (f == 5) {
    for (int k = 0; k < 5; ++k) a[1 + k] = Complex(qp[k], qp[5 + k]) / std::sqrt(2.0);
  } else {
    // Intrinsic L=0 plane: d_0 carries (x, px), d_{+-2} share (y, py).
    a[d_mode(0)] = Complex(qp[0], qp[2]) / std::sqrt(2.0);
    a[d_mode(2)] = a[d_mode(-2)] = Complex(qp[1], qp[3]) / 2.0;
  }
  return a;
}

Complex PhaseFunction::evaluate_complex(const Eigen::VectorXd& qp) const {
  const auto a = amplitudes(f_, qp);
  Complex sum = 0.0;
  for (const auto& [m, c] : terms_) {
    Complex t = c;
    for (int k : m.creators) t *= std::conj(a[k]);
    for (int k : m.annihilators) t *= a[k];
    sum += t;
  }
  return sum;
}

double PhaseFunction::operator()(double x, double y, double px, double py) const {
  if (f_ != 2) throw DomainError("four-coordinate evaluation requires f = 2");
  Eigen::VectorXd v(4);
  v << x, y, px, py;
  return (*this)(v);
}

PhaseFunction classical_map(const BosonExpr& expr, int f, ClassicalScaling scaling) {
  if (f != 2 && f != 5) throw DomainError("classical_map: f must be 5 (all d modes) or 2 (L=0 plane)");
  if (!expr.conserves_number()) throw DomainError("classical_map: expression does not conserve boson number");
  if (expr.max_operator_count() > 4) throw UnsupportedError("classical_map: monomials beyond two-body");
  std::vector<std::pair<Monomial, Complex>> terms;
  for (const auto& [m, c] : expr.terms()) {
    const std::size_t body = m.creators.size();
    // Lower-order pieces vanish in the energy per boson.
    if (body == 0) continue;
    if (scaling == ClassicalScaling::kTwoBodyOverN && body < 2) continue;
    terms.emplace_back(m, c);
  }
  return PhaseFunction(f, std::move(terms));
}

}  // namespace esqpt
