#include "gaze2d/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "gaze2d/errors.hpp"
#include "gaze2d/rng.hpp"

namespace gaze2d {

std::vector<GazeSample> select_train_subset(const Dataset& data, int subject_id, int n,
                                            std::uint64_t seed, int trial) {
  std::vector<const GazeSample*> pool = data.subject_split(subject_id, Split::kTrain);
  if (static_cast<int>(pool.size()) < n) {
    throw InsufficientData("subject " + std::to_string(subject_id) + " has " +
                           std::to_string(pool.size()) + " train samples, need " +
                           std::to_string(n));
  }
  std::sort(pool.begin(), pool.end(),
            [](const GazeSample* a, const GazeSample* b) {
              return a->sample_id < b->sample_id;
            });

  // Seeded index permutation; a fresh generator per (subject, trial) keeps
  // subsets independent of evaluation order.
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(derive_seed(seed, 0x5eedu + static_cast<std::uint64_t>(subject_id)),
                      static_cast<std::uint64_t>(trial)));
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(idx[i], idx[pick(rng)]);
  }

  idx.resize(static_cast<std::size_t>(n));
  std::sort(idx.begin(), idx.end());
  std::vector<GazeSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(*pool[i]);
  return out;
}

CalibrationReport calibrate_all(const Dataset& data, const TrainConfig& cfg,
                                int trial) {
  CalibrationReport report;
  report.config = cfg;
  for (int subject_id : data.subject_ids()) {
    const auto subset = select_train_subset(data, subject_id, cfg.n_samples,
                                            cfg.seed, trial);
    SubjectCalibration sc;
    sc.subject_id = subject_id;
    sc.report = train(subset, cfg);
    report.subjects.push_back(std::move(sc));
  }
  return report;
}

std::vector<SweepRow> run_sweep(const Dataset& data, const TrainConfig& cfg,
                                const std::vector<int>& n_list, int trials) {
  if (n_list.empty() || trials < 1) {
    throw InvalidSpec("sweep: need a non-empty n list and trials >= 1");
  }
  const int n_max = *std::max_element(n_list.begin(), n_list.end());
  for (int subject_id : data.subject_ids()) {
    if (static_cast<int>(data.subject_split(subject_id, Split::kTrain).size()) < n_max) {
      throw InsufficientData("sweep: subject " + std::to_string(subject_id) +
                             " cannot supply " + std::to_string(n_max) +
                             " train samples");
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(n_list.size() * static_cast<std::size_t>(trials));
  for (int n : n_list) {
    for (int trial = 0; trial < trials; ++trial) {
      TrainConfig run_cfg = cfg;
      run_cfg.n_samples = n;
      const auto start = std::chrono::steady_clock::now();
      const CalibrationReport cal = calibrate_all(data, run_cfg, trial);
      const auto stop = std::chrono::steady_clock::now();
      const MetricsReport metrics = evaluate(data, cal, Split::kTest);
      SweepRow row;
      row.n = n;
      row.trial = trial;
      row.mean_error_mm = metrics.overall_mean_mm;
      row.wall_seconds = std::chrono::duration<double>(stop - start).count();
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_to_csv_text(const std::vector<SweepRow>& rows) {
  std::string out = "n,trial,mean_error_mm,wall_seconds\n";
  for (const SweepRow& r : rows) {
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    out += format_double(r.mean_error_mm);
    out += ',';
    out += format_double(r.wall_seconds);
    out += '\n';
  }
  return out;
}

std::string trajectory_with_oracle_csv(const Dataset& data,
                                       const CalibrationReport& calibration,
                                       const ScreenPose& true_pose) {
  std::unordered_map<std::int64_t, const GazeSample*> by_id;
  for (const auto& s : data.samples) by_id[s.sample_id] = &s;

  std::string out =
      "sample_id,epoch,u_mm,v_mm,valid,oracle_u_mm,oracle_v_mm,dist_mm\n";
  for (const auto& subject : calibration.subjects) {
    for (const auto& row : subject.report.trajectory.rows()) {
      const auto it = by_id.find(row.sample_id);
      if (it == by_id.end()) {
        throw SchemaError("trajectory: sample " + std::to_string(row.sample_id) +
                          " not present in the dataset");
      }
      const GazeSample& s = *it->second;
      out += std::to_string(row.sample_id);
      out += ',';
      out += std::to_string(row.epoch);
      out += ',';
      out += format_double(row.u_mm);
      out += ',';
      out += format_double(row.v_mm);
      out += ',';
      out += row.valid ? '1' : '0';
      try {
        const ScreenPoint oracle = oracle_flipped_label(s.label, s.o, true_pose);
        out += ',';
        out += format_double(oracle.u);
        out += ',';
        out += format_double(oracle.v);
        out += ',';
        out += row.valid
                   ? format_double(euclidean_distance({row.u_mm, row.v_mm}, oracle))
                   : std::string();
      } catch (const Error&) {
        out += ",,,";  // oracle itself is degenerate here
      }
      out += '\n';
    }
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace gaze2d
