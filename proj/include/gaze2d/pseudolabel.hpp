#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gaze2d/alignment.hpp"
#include "gaze2d/projection.hpp"

namespace gaze2d {

// Mirror of horizontal image flipping in gaze space: negate x. Exact
// (sign flip only) and an involution.
template <class T>
inline Unit3T<T> flip_gaze(const Unit3T<T>& g) {
  return Unit3T<T>::trusted({-g.x, g.y, g.z});
}

struct PseudoLabel {
  std::int64_t sample_id{0};
  ScreenPoint p{};
  int epoch{0};
  bool valid{false};
  std::string reason;  // set when invalid
};

// Dynamic pseudo-label for a flipped sample:
//   Q(p) = P( T^-1 . F( T . P^-1(p, o) ), o, pose ).
// With T = I this reduces to P(F(P^-1(p))) on the same code path. A failed
// stage (parallel ray, degenerate vector) yields valid = false with the
// reason recorded; the caller masks such samples out of the flipped loss
// for the epoch instead of aborting.
PseudoLabel pseudo_label(const ScreenPoint& p, const Vec3& o, const ScreenPose& pose,
                         const AlignmentTransform& t, std::int64_t sample_id = 0,
                         int epoch = 0);

// Mirrored-origin experiment variant: the gaze is still reconstructed from
// the original origin, but the flipped direction is re-projected from the
// mirrored one, Q(p) = P(T^-1.F(T.P^-1(p, o)), mirror_x(o), pose).
PseudoLabel pseudo_label_mirrored(const ScreenPoint& p, const Vec3& o,
                                  const ScreenPose& pose, const AlignmentTransform& t,
                                  std::int64_t sample_id = 0, int epoch = 0);

// Per-sample pseudo-label history across epochs, exportable as CSV with
// columns sample_id,epoch,u_mm,v_mm,valid.
class TrajectoryLog {
 public:
  struct Row {
    std::int64_t sample_id;
    int epoch;
    double u_mm;
    double v_mm;
    bool valid;
  };

  // Appends one label; returns false (and leaves the log unchanged) if the
  // epoch is not strictly greater than the sample's last logged epoch.
  bool append(const PseudoLabel& label);

  const std::vector<Row>& rows() const { return rows_; }
  std::string to_csv() const;
  void write_csv(const std::string& path) const;

 private:
  std::vector<Row> rows_;
  std::unordered_map<std::int64_t, int> last_epoch_;
};

}  // namespace gaze2d
