#pragma once

#include <span>
#include <vector>

#include "gaze2d/vec.hpp"

namespace gaze2d {

// One (drifted, reference) direction pair observed on the same input:
// the fine-tuned model's prediction and the frozen base prediction.
struct AnchorPair {
  Vec3 drifted;
  Vec3 reference;
};

// Proper rotation mapping the drifted (unknown) coordinate system back to
// the reference (camera) system.
struct AlignmentTransform {
  Mat3 T = Mat3::identity();

  static AlignmentTransform identity() { return {}; }

  UnitVec3 apply(const UnitVec3& g) const { return UnitVec3::trusted(T * g.vec()); }
  UnitVec3 apply_inverse(const UnitVec3& g) const {
    return UnitVec3::trusted(transposed_times(T, g.vec()));
  }
};

// Solves min_T sum_i ||T.drifted_i - reference_i|| over SO(3) via SVD of
// the accumulated cross-covariance H = sum_i drifted_i.reference_i^T:
// with H = U S V^T, T = V diag(1,1,det(VU^T)) U^T. The determinant factor
// forbids reflections. Throws DegenerateAnchors for fewer than 3 pairs or
// when H has rank < 2 (second singular value at zero relative to the
// first), which happens e.g. for all-collinear reference directions.
AlignmentTransform solve_alignment(std::span<const AnchorPair> anchors);

}  // namespace gaze2d
