#include "gaze2d/alignment.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gaze2d/errors.hpp"

namespace gaze2d {

AlignmentTransform solve_alignment(std::span<const AnchorPair> anchors) {
  if (anchors.size() < 3) {
    throw DegenerateAnchors("solve_alignment: need at least 3 anchor pairs");
  }

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (const AnchorPair& a : anchors) {
    const Eigen::Vector3d d(a.drifted.x, a.drifted.y, a.drifted.z);
    const Eigen::Vector3d r(a.reference.x, a.reference.y, a.reference.z);
    h += d * r.transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-9 * s(0)) {
    throw DegenerateAnchors("solve_alignment: cross-covariance rank < 2");
  }

  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d diag(1.0, 1.0, 1.0);
  diag(2) = ((v * u.transpose()).determinant() < 0.0) ? -1.0 : 1.0;
  const Eigen::Matrix3d t = v * diag.asDiagonal() * u.transpose();

  AlignmentTransform out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.T(r, c) = t(r, c);
  return out;
}

}  // namespace gaze2d
