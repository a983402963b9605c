#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace esqpt {

/// Van der Corput radical inverse of `index` in the given prime base.
inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Point `index` of the 4-D Halton sequence (bases 2, 3, 5, 7).
inline std::array<double, 4> halton4(std::uint64_t index) {
  return {radical_inverse(index, 2), radical_inverse(index, 3), radical_inverse(index, 5),
          radical_inverse(index, 7)};
}

/// Maps four uniforms on [0,1) to a point of S^3 (uniform measure).
inline Eigen::Vector4d unit_sphere4(double u1, double u2, double u3) {
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double t1 = 2.0 * std::numbers::pi * u2;
  const double t2 = 2.0 * std::numbers::pi * u3;
  return {a * std::cos(t1), a * std::sin(t1), b * std::cos(t2), b * std::sin(t2)};
}

/// Maps four uniforms to the 4-ball of the given radius (uniform measure:
/// radius ~ u^{1/4}).
inline Eigen::Vector4d ball4(const std::array<double, 4>& u, double radius) {
  return radius * std::pow(u[0], 0.25) * unit_sphere4(u[1], u[2], u[3]);
}

}  // namespace esqpt
