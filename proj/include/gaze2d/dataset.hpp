#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaze2d/projection.hpp"
#include "gaze2d/vec.hpp"

namespace gaze2d {

enum class Split { kTrain, kTest };

inline const char* to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

// One calibration sample: gaze origin, frozen base predictions (original
// image, flipped image, K jitter variants) and the 2D screen label. Images
// themselves are out of scope; the record is what the 3D network would
// have produced for them.
struct GazeSample {
  std::int64_t sample_id{0};
  int subject_id{0};
  Split split{Split::kTrain};
  Vec3 o{};                        // face center, camera frame, mm
  UnitVec3 g_base = UnitVec3::trusted({0.0, 0.0, -1.0});
  UnitVec3 g_base_flipped = UnitVec3::trusted({0.0, 0.0, -1.0});
  std::vector<UnitVec3> jitter;    // K variants
  ScreenPoint label{};             // mm, screen frame
};

struct Dataset {
  std::vector<GazeSample> samples;
  int n_jitter{0};

  std::vector<int> subject_ids() const;
  std::vector<const GazeSample*> subject_split(int subject_id, Split split) const;
};

// CSV schema (header mandatory, UTF-8, LF newlines, '.' decimal point):
//   sample_id,subject_id,split,ox_mm,oy_mm,oz_mm,gbx,gby,gbz,gfx,gfy,gfz,
//   j1_x,j1_y,j1_z,...,jK_x,jK_y,jK_z,pu_mm,pv_mm
// Direction triples must be unit-norm within 1e-6. Reads renormalize them,
// which is a bitwise no-op for files this library wrote. Malformed input
// raises SchemaError with a line number.
Dataset read_samples_csv(const std::string& path);
void write_samples_csv(const std::string& path, const Dataset& data);

std::string format_double(double x);   // shortest round-trip decimal
double parse_double(const std::string& field, int line_no, const char* col);

}  // namespace gaze2d
