#pragma once

#include <array>
#include <cmath>

#include "gaze2d/dual.hpp"
#include "gaze2d/vec.hpp"

namespace gaze2d {

// Rodrigues formula: rotation matrix for the rotation vector r (angle
// ||r|| about r/||r||). Written as M = I + A.[r]x + B.[r]x^2 with
// A = sin(th)/th and B = (1-cos th)/th^2, both even in th, so below the
// 1e-8 angle cutoff they are evaluated as series in th^2. That keeps the
// r = 0 case (the calibration initial state) exact and keeps derivatives
// well defined through the cutoff.
template <class T>
inline Mat3T<T> rodrigues(const Vec3T<T>& r) {
  using std::sin;
  using std::cos;
  using std::sqrt;
  using gaze2d::sin;
  using gaze2d::cos;
  using gaze2d::sqrt;

  const T theta2 = dot(r, r);
  T a, b;
  if (value(theta2) < 1e-16) {
    a = 1.0 - theta2 * (1.0 / 6.0) + theta2 * theta2 * (1.0 / 120.0);
    b = 0.5 - theta2 * (1.0 / 24.0) + theta2 * theta2 * (1.0 / 720.0);
  } else {
    const T theta = sqrt(theta2);
    a = sin(theta) / theta;
    b = (1.0 - cos(theta)) / theta2;
  }

  const T& x = r.x;
  const T& y = r.y;
  const T& z = r.z;
  Mat3T<T> m;
  m(0, 0) = 1.0 - b * (y * y + z * z);
  m(0, 1) = -(a * z) + b * (x * y);
  m(0, 2) = a * y + b * (x * z);
  m(1, 0) = a * z + b * (x * y);
  m(1, 1) = 1.0 - b * (x * x + z * z);
  m(1, 2) = -(a * x) + b * (y * z);
  m(2, 0) = -(a * y) + b * (x * z);
  m(2, 1) = a * x + b * (y * z);
  m(2, 2) = 1.0 - b * (x * x + y * y);
  return m;
}

// Partials dM/dr_k as three matrices, k = 0,1,2.
inline std::array<Mat3, 3> rodrigues_jacobian(const Vec3& r) {
  using D = Dual<3>;
  const Vec3T<D> rd{D::seeded(r.x, 0), D::seeded(r.y, 1), D::seeded(r.z, 2)};
  const Mat3T<D> md = rodrigues(rd);
  std::array<Mat3, 3> out;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 9; ++i) out[k].m[i] = md.m[i].d[k];
  return out;
}

}  // namespace gaze2d
