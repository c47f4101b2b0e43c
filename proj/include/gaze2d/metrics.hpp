#pragma once

#include <string>
#include <vector>

#include "gaze2d/dataset.hpp"
#include "gaze2d/trainer.hpp"

namespace gaze2d {

// One calibration run per subject in the data (person-specific few-shot
// fitting), bundled with the shared config.
struct SubjectCalibration {
  int subject_id{0};
  TrainReport report;
};

struct CalibrationReport {
  TrainConfig config;
  std::vector<SubjectCalibration> subjects;

  const SubjectCalibration* find(int subject_id) const;
};

std::string calibration_to_json_text(const CalibrationReport& report);
CalibrationReport calibration_from_json_text(const std::string& text);

// Per-epoch losses of every subject, box-plot/curve-ready.
std::string losses_to_csv_text(const CalibrationReport& report);

std::string train_config_to_json_text(const TrainConfig& cfg);
TrainConfig train_config_from_json_text(const std::string& text);

struct SubjectMetrics {
  int subject_id{0};
  double mean_mm{0.0};
  int n_used{0};
  int n_invalid{0};
  int n_behind{0};
};

// Euclidean-distance metric on the test split: per-subject means and their
// unweighted average. Invalid projections are excluded and counted.
struct MetricsReport {
  std::vector<SubjectMetrics> subjects;
  double overall_mean_mm{0.0};
  int invalid_total{0};
};

MetricsReport evaluate(const Dataset& data, const CalibrationReport& calibration,
                       Split split = Split::kTest);

std::string metrics_to_json_text(const MetricsReport& m);

// Per-sample predictions for external plotting; px columns appear when a
// pixel spec is supplied.
std::string predictions_to_csv_text(const Dataset& data,
                                    const CalibrationReport& calibration, Split split,
                                    const PixelSpec* px);

}  // namespace gaze2d
