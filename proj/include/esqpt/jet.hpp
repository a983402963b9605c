#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace esqpt {

/// Forward-mode second-order jet over four independent variables.
///
/// Carries a value together with its gradient and Hessian so that any
/// function written generically over the scalar type yields exact first and
/// second derivatives in a single evaluation.
struct Jet {
  double v = 0.0;
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

  static Jet variable(double value, int index) {
    Jet j(value);
    j.g[index] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    h = v * o.h + o.v * h + g * o.g.transpose() + o.g * g.transpose();
    g = v * o.g + o.v * g;
    v *= o.v;
    return *this;
  }
  Jet& operator*=(double s) {
    v *= s;
    g *= s;
    h *= s;
    return *this;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator+(Jet a, double b) { a.v += b; return a; }
inline Jet operator+(double a, Jet b) { b.v += a; return b; }
inline Jet operator-(Jet a, double b) { a.v -= b; return a; }
inline Jet operator-(double a, const Jet& b) {
  Jet r = b;
  r *= -1.0;
  r.v += a;
  return r;
}
inline Jet operator-(Jet a) { return a *= -1.0; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }

inline Jet sqrt(const Jet& a) {
  const double f = std::sqrt(a.v);
  const double d1 = 0.5 / f;
  const double d2 = -0.25 / (f * a.v);
  Jet r(f);
  r.g = d1 * a.g;
  r.h = d1 * a.h + d2 * a.g * a.g.transpose();
  return r;
}

}  // namespace esqpt
