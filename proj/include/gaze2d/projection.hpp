#pragma once

#include <array>
#include <cmath>

#include "gaze2d/dual.hpp"
#include "gaze2d/errors.hpp"
#include "gaze2d/geometry.hpp"
#include "gaze2d/vec.hpp"

namespace gaze2d {

// Below this |g.n| the ray is treated as parallel to the screen; the ray
// parameter s ~ 1/(g.n) and its gradients blow up past it.
inline constexpr double kParallelEps = 1e-6;

// 2D point in the screen frame, millimeters. The screen frame is defined
// by the pose: origin at t, axes = first two columns of R, normal
// (third column) pointing out of the screen toward the user.
struct ScreenPoint {
  double u{0.0}, v{0.0};
};

inline double l1_distance(const ScreenPoint& a, const ScreenPoint& b) {
  return std::abs(a.u - b.u) + std::abs(a.v - b.v);
}
inline double euclidean_distance(const ScreenPoint& a, const ScreenPoint& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}

// Screen-to-camera rigid transform: rotation vector r (radians.axis) and
// translation t (mm). R and n are derived once on construction.
struct ScreenPose {
  Vec3 r{};
  Vec3 t{};
  Mat3 R = Mat3::identity();
  UnitVec3 n = UnitVec3::trusted({0.0, 0.0, 1.0});

  ScreenPose() = default;
  ScreenPose(const Vec3& r_, const Vec3& t_)
      : r(r_), t(t_), R(rodrigues(r_)), n(UnitVec3::trusted(R.col(2))) {}
};

struct PixelSpec {
  double ppi{96.0};
  double origin_u_px{0.0};
  double origin_v_px{0.0};
};

// Templated working frame so the same projection code runs on doubles and
// on dual numbers (pose entering as differentiable variables).
template <class T>
struct FrameT {
  Mat3T<T> R;
  Vec3T<T> n;
  Vec3T<T> t;
};

template <class T>
inline FrameT<T> make_frame(const Vec3T<T>& r, const Vec3T<T>& t) {
  FrameT<T> f;
  f.R = rodrigues(r);
  f.n = f.R.col(2);
  f.t = t;
  return f;
}

inline FrameT<double> as_frame(const ScreenPose& pose) {
  return {pose.R, pose.n.vec(), pose.t};
}

template <class T>
struct RayHitT {
  Vec3T<T> point;
  T s;
  bool behind_origin;
};

// Ray-plane intersection p = o + s.g with s = ((t-o).n)/(g.n). A negative
// s is flagged, not rejected: early in optimization the learnable plane
// may sit behind the face and a hard error would stall the descent.
template <class T>
inline RayHitT<T> intersect_ray_plane(const Vec3T<T>& o, const Unit3T<T>& g,
                                      const FrameT<T>& f) {
  const T denom = dot(g.vec(), f.n);
  if (std::abs(value(denom)) <= kParallelEps) {
    throw RayParallelToScreen("intersect_ray_plane: |g.n| <= 1e-6");
  }
  const T s = dot(f.t - o, f.n) / denom;
  if (!std::isfinite(value(s))) {
    throw RayParallelToScreen("intersect_ray_plane: non-finite ray parameter");
  }
  return {o + g.vec() * s, s, value(s) < 0.0};
}

inline RayHitT<double> intersect_ray_plane(const Vec3& o, const UnitVec3& g,
                                           const ScreenPose& pose) {
  return intersect_ray_plane(o, g, as_frame(pose));
}

template <class T>
struct ScreenPointT {
  T u, v;
};

// Camera coords -> screen coords, q = R^T (p - t); the screen point is
// (q.x, q.y). For points on the plane q.z vanishes.
template <class T>
inline ScreenPointT<T> camera_to_screen(const Vec3T<T>& p3d, const FrameT<T>& f) {
  const Vec3T<T> q = transposed_times(f.R, p3d - f.t);
  return {q.x, q.y};
}

inline ScreenPoint camera_to_screen(const Vec3& p3d, const ScreenPose& pose) {
  const auto q = camera_to_screen(p3d, as_frame(pose));
  return {q.u, q.v};
}

template <class T>
inline Vec3T<T> screen_to_camera(const ScreenPointT<T>& p, const FrameT<T>& f) {
  return f.R * Vec3T<T>{p.u, p.v, T(0.0)} + f.t;
}

inline Vec3 screen_to_camera(const ScreenPoint& p, const ScreenPose& pose) {
  return screen_to_camera(ScreenPointT<double>{p.u, p.v}, as_frame(pose));
}

template <class T>
struct ProjectionT {
  ScreenPointT<T> point;
  T s;
  bool behind_origin;
};

template <class T>
inline ProjectionT<T> project_full(const Unit3T<T>& g, const Vec3T<T>& o,
                                   const FrameT<T>& f) {
  const RayHitT<T> hit = intersect_ray_plane(o, g, f);
  return {camera_to_screen(hit.point, f), hit.s, hit.behind_origin};
}

struct Projection {
  ScreenPoint point;
  double s;
  bool behind_origin;
};

inline Projection project_full(const UnitVec3& g, const Vec3& o,
                               const ScreenPose& pose) {
  const auto pr = project_full(g, o, as_frame(pose));
  return {{pr.point.u, pr.point.v}, pr.s, pr.behind_origin};
}

inline ScreenPoint project(const UnitVec3& g, const Vec3& o, const ScreenPose& pose) {
  return project_full(g, o, pose).point;
}

// Unit direction from o toward the 3D location of screen point p.
template <class T>
inline Unit3T<T> inverse_project(const ScreenPointT<T>& p, const Vec3T<T>& o,
                                 const FrameT<T>& f) {
  const Vec3T<T> d = screen_to_camera(p, f) - o;
  if (value(norm(d)) <= 1e-9) {
    throw DegenerateVector("inverse_project: origin coincides with screen point");
  }
  return normalize(d);
}

inline UnitVec3 inverse_project(const ScreenPoint& p, const Vec3& o,
                                const ScreenPose& pose) {
  return inverse_project(ScreenPointT<double>{p.u, p.v}, o, as_frame(pose));
}

inline std::array<double, 2> to_pixels(const ScreenPoint& p, const PixelSpec& spec) {
  const double scale = spec.ppi / 25.4;
  return {p.u * scale + spec.origin_u_px, p.v * scale + spec.origin_v_px};
}

// Partials of (u, v) w.r.t. (r0,r1,r2, t0,t1,t2, g0,g1,g2), g taken as a
// free 3-vector at the evaluation point.
struct ProjectionJacobian {
  std::array<double, 9> du{};
  std::array<double, 9> dv{};
};

inline ProjectionJacobian projection_jacobian(const UnitVec3& g, const Vec3& o,
                                              const ScreenPose& pose) {
  using D = Dual<9>;
  const Vec3T<D> r{D::seeded(pose.r.x, 0), D::seeded(pose.r.y, 1), D::seeded(pose.r.z, 2)};
  const Vec3T<D> t{D::seeded(pose.t.x, 3), D::seeded(pose.t.y, 4), D::seeded(pose.t.z, 5)};
  const Vec3T<D> gd{D::seeded(g.x, 6), D::seeded(g.y, 7), D::seeded(g.z, 8)};
  const auto frame = make_frame(r, t);
  const auto pr = project_full(Unit3T<D>::trusted(gd), lift<9>(o), frame);
  ProjectionJacobian out;
  out.du = pr.point.u.d;
  out.dv = pr.point.v.d;
  return out;
}

}  // namespace gaze2d
