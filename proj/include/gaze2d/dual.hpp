#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace gaze2d {

// Forward-mode scalar: a value plus N partial derivatives, propagated
// through arithmetic. Seeding variable k means d[k] = 1 at the input;
// after evaluating an expression, d[k] holds the exact partial w.r.t.
// that input. Used with N = 3 (rotation vectors), 6 (adapter), 9
// (projection) and 12 (full parameter set).
template <std::size_t N>
struct Dual {
  double v{0.0};
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit constant lift

  static Dual seeded(double value, std::size_t k) {
    Dual x(value);
    x.d[k] = 1.0;
    return x;
  }

  Dual operator-() const {
    Dual r(-v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
    v *= inv;
    return *this;
  }
};

template <std::size_t N>
inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
inline Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
inline Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <std::size_t N>
inline Dual<N> operator+(Dual<N> a, double b) { a.v += b; return a; }
template <std::size_t N>
inline Dual<N> operator+(double a, Dual<N> b) { b.v += a; return b; }
template <std::size_t N>
inline Dual<N> operator-(Dual<N> a, double b) { a.v -= b; return a; }
template <std::size_t N>
inline Dual<N> operator-(double a, const Dual<N>& b) { return Dual<N>(a) - b; }
template <std::size_t N>
inline Dual<N> operator*(Dual<N> a, double b) {
  a.v *= b;
  for (std::size_t i = 0; i < N; ++i) a.d[i] *= b;
  return a;
}
template <std::size_t N>
inline Dual<N> operator*(double a, Dual<N> b) { return b * a; }
template <std::size_t N>
inline Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N>
inline Dual<N> operator/(double a, const Dual<N>& b) { return Dual<N>(a) / b; }

template <std::size_t N>
inline bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.v < b.v; }
template <std::size_t N>
inline bool operator<(const Dual<N>& a, double b) { return a.v < b; }
template <std::size_t N>
inline bool operator>(const Dual<N>& a, double b) { return a.v > b; }

template <std::size_t N>
inline Dual<N> sqrt(const Dual<N>& x) {
  Dual<N> r(std::sqrt(x.v));
  const double s = 0.5 / r.v;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = s * x.d[i];
  return r;
}

template <std::size_t N>
inline Dual<N> sin(const Dual<N>& x) {
  Dual<N> r(std::sin(x.v));
  const double c = std::cos(x.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = c * x.d[i];
  return r;
}

template <std::size_t N>
inline Dual<N> cos(const Dual<N>& x) {
  Dual<N> r(std::cos(x.v));
  const double s = -std::sin(x.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = s * x.d[i];
  return r;
}

template <std::size_t N>
inline Dual<N> abs(const Dual<N>& x) {
  return x.v < 0.0 ? -x : x;
}

// Scalar-agnostic value extraction for branching in templated code.
inline double value(double x) { return x; }
template <std::size_t N>
inline double value(const Dual<N>& x) { return x.v; }

}  // namespace gaze2d
