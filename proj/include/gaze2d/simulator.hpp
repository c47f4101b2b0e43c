#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "gaze2d/dataset.hpp"
#include "gaze2d/projection.hpp"

namespace gaze2d {

struct Box3 {
  Vec3 min{};
  Vec3 max{};
};

// Synthetic scene: a known screen pose, gaze targets on the screen
// rectangle, face centers in a box in front of it, and a simulated
// pre-trained network whose predictions are the true gaze rotated by a
// fixed drift plus per-component Gaussian noise. Color jitter is stood in
// for by prediction noise (images are out of scope); jitter_sigma sets the
// spread the uncertainty loss has to shrink.
struct SceneSpec {
  // Bezel-camera geometry: a few degrees of screen tilt and a few cm of
  // offset, the regime the 80-epoch schedule can actually traverse.
  ScreenPose true_pose{Vec3{0.04, -0.06, 0.03}, Vec3{30.0, -40.0, 50.0}};
  double screen_w_mm{400.0};
  double screen_h_mm{300.0};
  int n_subjects{3};
  int samples_per_subject{80};
  int train_per_subject{60};
  Box3 origin_box{{-100.0, -80.0, 450.0}, {100.0, 80.0, 650.0}};
  // Rotational drift of the simulated network; keeping the default axis on
  // x makes the flip operator commute with the drift, which is what the
  // flipped-sample pseudo-labels need to converge to the oracle.
  Vec3 drift{5.0 * 0.017453292519943295, 0.0, 0.0};
  double noise_sigma{0.005};
  double jitter_sigma{0.005};
  int n_jitter{4};
  std::uint64_t seed{1};

  void validate() const;  // throws InvalidSpec
};

struct SimOutput {
  Dataset data;
  SceneSpec spec;  // echoed; written to the truth sidecar
};

// Deterministic given spec.seed. Targets are uniform on the centered
// screen rectangle, origins uniform in origin_box, g_true by inverse
// projection of the label, g_base = normalize(R_drift (g_true + eps)),
// flipped prediction g_base_flipped = normalize(R_drift (F(g_true) + eps'))
// so the simulated network is exactly flip-equivariant up to noise.
SimOutput generate(const SceneSpec& spec);

// Ground-truth label for the flipped image, computable only with the true
// pose: P(F(P^-1(p, o)), o) in the true camera frame.
ScreenPoint oracle_flipped_label(const ScreenPoint& p, const Vec3& o,
                                 const ScreenPose& true_pose);

struct BaselineResult {
  double mean_mm{0.0};
  int n_used{0};
  int n_invalid{0};
  int n_behind{0};
};

// Mean Euclidean error of projecting the frozen base predictions through
// the given pose, no fine-tuning. Pass the true pose for the
// direct-projection reference, the default pose for the no-finetune
// initialization baseline.
BaselineResult direct_projection_baseline(std::span<const GazeSample* const> samples,
                                          const ScreenPose& pose);
BaselineResult direct_projection_baseline(const Dataset& data, const ScreenPose& pose);

// Scene JSON round-trip (all fields, defaults applied for absent keys).
SceneSpec scene_from_json_text(const std::string& text);
std::string scene_to_json_text(const SceneSpec& spec);
std::string truth_json_text(const SceneSpec& spec);
ScreenPose pose_from_truth_json_text(const std::string& text);

}  // namespace gaze2d
