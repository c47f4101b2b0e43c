#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

#include "gaze2d/dual.hpp"
#include "gaze2d/errors.hpp"

namespace gaze2d {

// Units convention, fixed project-wide: lengths in millimeters, angles in
// radians. Direction vectors are dimensionless.

template <class T>
struct Vec3T {
  T x{}, y{}, z{};
};

using Vec3 = Vec3T<double>;

template <class T>
inline Vec3T<T> operator+(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <class T>
inline Vec3T<T> operator-(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <class T, class S>
inline Vec3T<T> operator*(const Vec3T<T>& a, const S& s) {
  return {a.x * s, a.y * s, a.z * s};
}
template <class T>
inline Vec3T<T> operator-(const Vec3T<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <class T>
inline T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
template <class T>
inline Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
template <class T>
inline T norm(const Vec3T<T>& a) {
  using std::sqrt;
  using gaze2d::sqrt;
  return sqrt(dot(a, a));
}

inline bool all_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

template <std::size_t N>
inline Vec3T<Dual<N>> lift(const Vec3& v) {
  return {Dual<N>(v.x), Dual<N>(v.y), Dual<N>(v.z)};
}

// Unit-length direction. Constructed through normalize() or, where unit
// length is guaranteed by construction (rotations, sign flips), through
// trusted().
template <class T>
struct Unit3T : Vec3T<T> {
  static Unit3T trusted(const Vec3T<T>& v) { return Unit3T{v}; }
  const Vec3T<T>& vec() const { return *this; }

 private:
  explicit Unit3T(const Vec3T<T>& v) : Vec3T<T>(v) {}
};

using UnitVec3 = Unit3T<double>;

// Normalizes v. Throws DegenerateVector for near-zero input. The double
// path returns already-unit inputs unchanged, which makes the operation
// bitwise idempotent; the threshold (1e-14) sits far above worst-case
// rounding of a freshly normalized vector and far below every tolerance
// used elsewhere. Dual inputs always divide so the derivative is the
// tangent-space projector, not the identity.
template <class T>
inline Unit3T<T> normalize(const Vec3T<T>& v) {
  const T n = norm(v);
  if (value(n) <= 1e-12) {
    throw DegenerateVector("normalize: vector norm below 1e-12");
  }
  if constexpr (std::is_same_v<T, double>) {
    if (std::abs(n - 1.0) <= 1e-14) return Unit3T<T>::trusted(v);
  }
  const T inv = 1.0 / n;
  return Unit3T<T>::trusted({v.x * inv, v.y * inv, v.z * inv});
}

// 3x3 matrix, row-major: m[3*row + col].
template <class T>
struct Mat3T {
  std::array<T, 9> m{};

  T& operator()(int r, int c) { return m[3 * r + c]; }
  const T& operator()(int r, int c) const { return m[3 * r + c]; }

  static Mat3T identity() {
    Mat3T out;
    out.m = {T(1.0), T(0.0), T(0.0), T(0.0), T(1.0), T(0.0), T(0.0), T(0.0), T(1.0)};
    return out;
  }

  Mat3T transposed() const {
    Mat3T out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out(r, c) = (*this)(c, r);
    return out;
  }

  Vec3T<T> col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
  Vec3T<T> row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
};

using Mat3 = Mat3T<double>;

template <class T>
inline Vec3T<T> operator*(const Mat3T<T>& a, const Vec3T<T>& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

template <class T>
inline Mat3T<T> operator*(const Mat3T<T>& a, const Mat3T<T>& b) {
  Mat3T<T> out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
  return out;
}

// Multiply by the transpose without materializing it.
template <class T>
inline Vec3T<T> transposed_times(const Mat3T<T>& a, const Vec3T<T>& v) {
  return {a(0, 0) * v.x + a(1, 0) * v.y + a(2, 0) * v.z,
          a(0, 1) * v.x + a(1, 1) * v.y + a(2, 1) * v.z,
          a(0, 2) * v.x + a(1, 2) * v.y + a(2, 2) * v.z};
}

inline double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline double frobenius_distance(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) {
    const double d = a.m[i] - b.m[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace gaze2d
