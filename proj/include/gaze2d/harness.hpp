#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaze2d/dataset.hpp"
#include "gaze2d/metrics.hpp"
#include "gaze2d/simulator.hpp"
#include "gaze2d/trainer.hpp"

namespace gaze2d {

// Seeded choice of n training samples from a subject's train pool. Trial
// indices give distinct resampled subsets for repeatability studies; the
// chosen samples are returned in sample-id order so downstream training is
// order-deterministic.
std::vector<GazeSample> select_train_subset(const Dataset& data, int subject_id, int n,
                                            std::uint64_t seed, int trial);

// Person-specific calibration: one training run per subject present in the
// data, all with the same config. `trial` varies the train subset.
CalibrationReport calibrate_all(const Dataset& data, const TrainConfig& cfg,
                                int trial = 0);

struct SweepRow {
  int n{0};
  int trial{0};
  double mean_error_mm{0.0};
  double wall_seconds{0.0};
};

// Sample-count sweep: for every n in n_list and every trial, calibrate on a
// distinct resampled subset and evaluate on the test split.
std::vector<SweepRow> run_sweep(const Dataset& data, const TrainConfig& cfg,
                                const std::vector<int>& n_list, int trials);

std::string sweep_to_csv_text(const std::vector<SweepRow>& rows);

// Trajectory export with oracle columns: every logged pseudo-label plus
// the flipped-image ground truth from the true pose and their distance.
std::string trajectory_with_oracle_csv(const Dataset& data,
                                       const CalibrationReport& calibration,
                                       const ScreenPose& true_pose);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gaze2d
