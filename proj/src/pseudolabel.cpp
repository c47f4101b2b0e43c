#include "gaze2d/pseudolabel.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gaze2d/errors.hpp"

namespace gaze2d {

namespace {

PseudoLabel pseudo_label_chain(const ScreenPoint& p, const Vec3& o_inverse,
                               const Vec3& o_project, const ScreenPose& pose,
                               const AlignmentTransform& t, std::int64_t sample_id,
                               int epoch) {
  PseudoLabel out;
  out.sample_id = sample_id;
  out.epoch = epoch;
  try {
    const UnitVec3 g = inverse_project(p, o_inverse, pose);
    const UnitVec3 g_cam = t.apply(g);
    const UnitVec3 g_flip = flip_gaze(g_cam);
    const UnitVec3 g_back = t.apply_inverse(g_flip);
    out.p = project(g_back, o_project, pose);
    out.valid = true;
  } catch (const Error& e) {
    out.valid = false;
    out.reason = e.what();
  }
  return out;
}

}  // namespace

PseudoLabel pseudo_label(const ScreenPoint& p, const Vec3& o, const ScreenPose& pose,
                         const AlignmentTransform& t, std::int64_t sample_id,
                         int epoch) {
  return pseudo_label_chain(p, o, o, pose, t, sample_id, epoch);
}

PseudoLabel pseudo_label_mirrored(const ScreenPoint& p, const Vec3& o,
                                  const ScreenPose& pose, const AlignmentTransform& t,
                                  std::int64_t sample_id, int epoch) {
  return pseudo_label_chain(p, o, {-o.x, o.y, o.z}, pose, t, sample_id, epoch);
}

bool TrajectoryLog::append(const PseudoLabel& label) {
  auto it = last_epoch_.find(label.sample_id);
  if (it != last_epoch_.end() && label.epoch <= it->second) return false;
  last_epoch_[label.sample_id] = label.epoch;
  rows_.push_back({label.sample_id, label.epoch, label.p.u, label.p.v, label.valid});
  return true;
}

namespace {

void append_double(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, res.ptr);
}

}  // namespace

std::string TrajectoryLog::to_csv() const {
  std::string out = "sample_id,epoch,u_mm,v_mm,valid\n";
  for (const Row& r : rows_) {
    out += std::to_string(r.sample_id);
    out += ',';
    out += std::to_string(r.epoch);
    out += ',';
    append_double(out, r.u_mm);
    out += ',';
    append_double(out, r.v_mm);
    out += ',';
    out += r.valid ? '1' : '0';
    out += '\n';
  }
  return out;
}

void TrajectoryLog::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << to_csv();
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace gaze2d
