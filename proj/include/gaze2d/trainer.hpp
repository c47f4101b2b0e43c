#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaze2d/adapter.hpp"
#include "gaze2d/alignment.hpp"
#include "gaze2d/dataset.hpp"
#include "gaze2d/pseudolabel.hpp"
#include "gaze2d/projection.hpp"

namespace gaze2d {

// Loss weights and schedule. Defaults are the reference recipe: N=10, K=4,
// 80 epochs, lr 0.001 with a 5-epoch linear warmup, decaying to 0.0005
// after epoch 60, loss weights 1 / 0.4 / 0.25.
struct TrainConfig {
  int n_samples{10};
  int n_jitter{4};
  int epochs{80};
  double lr_init{0.001};
  int warmup_epochs{5};
  double lr_after_decay{0.0005};
  int decay_epoch{60};
  double w_main{1.0};
  double w_flip{0.4};
  double w_unc{0.25};
  std::uint64_t seed{1};

  // Ablation and experiment switches.
  bool use_flip{true};
  bool use_unc{true};
  bool use_alignment{true};
  bool mirror_origin{false};  // mirror o.x for the flipped-sample branch
  bool freeze_pose{false};    // known-pose mode: r, t stay at init_pose
  ScreenPose init_pose{};     // default: r = t = (0,0,0)

  void validate() const;  // throws InvalidSpec
};

// The twelve learnable scalars: screen pose (r, t) and adapter (delta, bias).
struct Params {
  Vec3 r{};
  Vec3 t{};
  Vec3 delta{};
  Vec3 bias{};

  std::array<double, 12> to_array() const;
  static Params from_array(const std::array<double, 12>& a);
  ScreenPose pose() const { return ScreenPose(r, t); }
  GazeAdapter adapter() const { return {delta, bias}; }
};

// Temporal weight for the uncertainty variance term, tau = (t-1)/t.
inline double temporal_weight(int epoch) {
  return static_cast<double>(epoch - 1) / static_cast<double>(epoch);
}

double lr_schedule(int epoch, const TrainConfig& cfg);

struct LossBreakdown {
  double main{0.0};       // sum of L1 residuals, mm
  double flip{0.0};       // sum of L1 residuals vs pseudo-labels, mm
  double unc{0.0};        // (1/NK)-normalized uncertainty loss
  double unc_var{0.0};    // tau-weighted variance contribution inside unc
  double total{0.0};      // weighted combination
  int main_skipped{0};
  int flip_skipped{0};
  int unc_skipped{0};
  int behind_origin{0};
  // Smallest |residual| over every L1 component and L2 norm in the loss;
  // the finite-difference harness skips states close to a kink.
  double min_abs_residual{0.0};
};

// Per-spec loss surfaces, exposed individually for tests and tooling.
// loss_flip regenerates the pseudo-labels from (pose, t) internally.
double loss_main(std::span<const GazeSample* const> batch, const ScreenPose& pose,
                 const GazeAdapter& adapter);
double loss_flip(std::span<const GazeSample* const> batch, const ScreenPose& pose,
                 const GazeAdapter& adapter, const AlignmentTransform& t);
double loss_uncertainty(std::span<const GazeSample* const> batch, const ScreenPose& pose,
                        const GazeAdapter& adapter, double tau);

// Epoch helpers, also used by the gradient checker. Anchors pair the
// adapted base predictions (drifted) with the raw base predictions
// (reference); they are recomputed every epoch since the adapter keeps
// moving. Returns identity when alignment is disabled or underdetermined.
AlignmentTransform solve_epoch_alignment(std::span<const GazeSample* const> batch,
                                         const GazeAdapter& adapter, bool enabled,
                                         bool* degenerate = nullptr);
std::vector<PseudoLabel> make_pseudo_labels(std::span<const GazeSample* const> batch,
                                            const ScreenPose& pose,
                                            const AlignmentTransform& t, int epoch,
                                            bool mirror_origin);

// Evaluates the full weighted loss at params, with the pseudo-labels held
// constant, optionally filling the exact gradient w.r.t. the 12 scalars.
// This frozen-label loss is the function the optimizer steps on; no
// gradient flows through the label generation.
LossBreakdown epoch_loss(std::span<const GazeSample* const> batch,
                         const std::vector<PseudoLabel>& labels, const Params& params,
                         double tau, const TrainConfig& cfg,
                         std::array<double, 12>* grad_out);

struct EpochRecord {
  int epoch{0};
  double lr{0.0};
  double tau{0.0};
  LossBreakdown loss;
  Params params;  // state entering the epoch
};

struct TrainReport {
  TrainConfig config;
  Params final_params;
  AlignmentTransform final_alignment;
  std::vector<EpochRecord> epochs;
  TrajectoryLog trajectory;
  int alignment_degenerate_epochs{0};
  std::vector<std::int64_t> train_ids;
};

// Joint few-shot optimization of pose and adapter under the three losses.
// Per epoch: recompute anchors and solve T, regenerate pseudo-labels,
// evaluate the weighted loss and its gradient, take one Adam step
// (beta1 = 0.9, beta2 = 0.999) on all 12 scalars. Deterministic given the
// batch and config. Throws AllSamplesInvalid / NonFiniteLoss.
TrainReport train(std::span<const GazeSample* const> batch, const TrainConfig& cfg);
TrainReport train(const std::vector<GazeSample>& batch, const TrainConfig& cfg);

}  // namespace gaze2d
