#pragma once

#include <array>

#include "gaze2d/dual.hpp"
#include "gaze2d/geometry.hpp"
#include "gaze2d/vec.hpp"

namespace gaze2d {

// Six-parameter stand-in for fine-tuning the 3D gaze network: a learnable
// rotation applied to the frozen base prediction plus a learnable bias,
// renormalized. Its rotation component is exactly the coordinate-system
// drift the alignment module recovers.
struct GazeAdapter {
  Vec3 delta{};  // rotation vector, radians.axis, kept with ||delta|| < pi
  Vec3 bias{};

  static GazeAdapter identity() { return {}; }
  bool is_identity() const {
    return delta.x == 0.0 && delta.y == 0.0 && delta.z == 0.0 &&
           bias.x == 0.0 && bias.y == 0.0 && bias.z == 0.0;
  }
};

// normalize(R(delta).base + bias). Bias is applied before renormalization
// so the output stays on the unit sphere. Throws DegenerateVector when the
// sum has near-zero norm.
template <class T>
inline Unit3T<T> adapt(const Unit3T<T>& base, const Vec3T<T>& delta,
                       const Vec3T<T>& bias) {
  const Mat3T<T> rot = rodrigues(delta);
  return normalize(rot * base.vec() + bias);
}

// Same, with the per-sample rotation hoisted out (delta fixed over a batch).
template <class T>
inline Unit3T<T> adapt_rotated(const Unit3T<T>& base, const Mat3T<T>& rot,
                               const Vec3T<T>& bias) {
  return normalize(rot * base.vec() + bias);
}

inline UnitVec3 adapt(const UnitVec3& base, const GazeAdapter& a) {
  return adapt(base, a.delta, a.bias);
}

// Partials of the adapted direction w.r.t. (delta0..2, bias0..2): rows are
// output components, columns the six parameters.
struct AdaptJacobian {
  std::array<std::array<double, 6>, 3> d{};
};

inline AdaptJacobian adapt_jacobian(const UnitVec3& base, const GazeAdapter& a) {
  using D = Dual<6>;
  const Vec3T<D> delta{D::seeded(a.delta.x, 0), D::seeded(a.delta.y, 1),
                       D::seeded(a.delta.z, 2)};
  const Vec3T<D> bias{D::seeded(a.bias.x, 3), D::seeded(a.bias.y, 4),
                      D::seeded(a.bias.z, 5)};
  const Unit3T<D> out = adapt(Unit3T<D>::trusted(lift<6>(base.vec())), delta, bias);
  AdaptJacobian j;
  j.d[0] = out.x.d;
  j.d[1] = out.y.d;
  j.d[2] = out.z.d;
  return j;
}

}  // namespace gaze2d
