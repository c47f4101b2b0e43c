#include "gaze2d/metrics.hpp"

#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "gaze2d/errors.hpp"

namespace gaze2d {

namespace {

using nlohmann::json;

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& a, const char* what) {
  if (!a.is_array() || a.size() != 3) {
    throw SchemaError(std::string("report json: '") + what + "' must be a 3-array");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json mat_to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  }
  return rows;
}

Mat3 mat_from_json(const json& a, const char* what) {
  if (!a.is_array() || a.size() != 3) {
    throw SchemaError(std::string("report json: '") + what + "' must be a 3x3 array");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = a[r];
    if (!row.is_array() || row.size() != 3) {
      throw SchemaError(std::string("report json: '") + what + "' must be a 3x3 array");
    }
    for (int c = 0; c < 3; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

json params_to_json(const Params& p) {
  json j;
  j["r"] = vec_to_json(p.r);
  j["t"] = vec_to_json(p.t);
  j["delta"] = vec_to_json(p.delta);
  j["bias"] = vec_to_json(p.bias);
  return j;
}

Params params_from_json(const json& j) {
  Params p;
  p.r = vec_from_json(j.at("r"), "r");
  p.t = vec_from_json(j.at("t"), "t");
  p.delta = vec_from_json(j.at("delta"), "delta");
  p.bias = vec_from_json(j.at("bias"), "bias");
  return p;
}

json config_to_json(const TrainConfig& cfg) {
  json j;
  j["n_samples"] = cfg.n_samples;
  j["n_jitter"] = cfg.n_jitter;
  j["epochs"] = cfg.epochs;
  j["lr_init"] = cfg.lr_init;
  j["warmup_epochs"] = cfg.warmup_epochs;
  j["lr_after_decay"] = cfg.lr_after_decay;
  j["decay_epoch"] = cfg.decay_epoch;
  j["w_main"] = cfg.w_main;
  j["w_flip"] = cfg.w_flip;
  j["w_unc"] = cfg.w_unc;
  j["seed"] = cfg.seed;
  j["use_flip"] = cfg.use_flip;
  j["use_unc"] = cfg.use_unc;
  j["use_alignment"] = cfg.use_alignment;
  j["mirror_origin"] = cfg.mirror_origin;
  j["freeze_pose"] = cfg.freeze_pose;
  j["init_pose_r"] = vec_to_json(cfg.init_pose.r);
  j["init_pose_t"] = vec_to_json(cfg.init_pose.t);
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.n_samples = j.value("n_samples", cfg.n_samples);
  cfg.n_jitter = j.value("n_jitter", cfg.n_jitter);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.lr_init = j.value("lr_init", cfg.lr_init);
  cfg.warmup_epochs = j.value("warmup_epochs", cfg.warmup_epochs);
  cfg.lr_after_decay = j.value("lr_after_decay", cfg.lr_after_decay);
  cfg.decay_epoch = j.value("decay_epoch", cfg.decay_epoch);
  cfg.w_main = j.value("w_main", cfg.w_main);
  cfg.w_flip = j.value("w_flip", cfg.w_flip);
  cfg.w_unc = j.value("w_unc", cfg.w_unc);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.use_flip = j.value("use_flip", cfg.use_flip);
  cfg.use_unc = j.value("use_unc", cfg.use_unc);
  cfg.use_alignment = j.value("use_alignment", cfg.use_alignment);
  cfg.mirror_origin = j.value("mirror_origin", cfg.mirror_origin);
  cfg.freeze_pose = j.value("freeze_pose", cfg.freeze_pose);
  Vec3 ir{}, it{};
  if (j.contains("init_pose_r")) ir = vec_from_json(j.at("init_pose_r"), "init_pose_r");
  if (j.contains("init_pose_t")) it = vec_from_json(j.at("init_pose_t"), "init_pose_t");
  cfg.init_pose = ScreenPose(ir, it);
  return cfg;
}

}  // namespace

const SubjectCalibration* CalibrationReport::find(int subject_id) const {
  for (const auto& s : subjects) {
    if (s.subject_id == subject_id) return &s;
  }
  return nullptr;
}

std::string train_config_to_json_text(const TrainConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

TrainConfig train_config_from_json_text(const std::string& text) {
  try {
    return config_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config json: ") + e.what());
  }
}

std::string calibration_to_json_text(const CalibrationReport& report) {
  json j;
  j["config"] = config_to_json(report.config);
  json subjects = json::array();
  for (const auto& s : report.subjects) {
    json sj;
    sj["subject_id"] = s.subject_id;
    sj["train_ids"] = s.report.train_ids;
    sj["final"] = params_to_json(s.report.final_params);
    sj["final"]["T"] = mat_to_json(s.report.final_alignment.T);
    sj["alignment_degenerate_epochs"] = s.report.alignment_degenerate_epochs;
    json epochs = json::array();
    for (const auto& e : s.report.epochs) {
      json ej;
      ej["epoch"] = e.epoch;
      ej["lr"] = e.lr;
      ej["tau"] = e.tau;
      ej["loss_main"] = e.loss.main;
      ej["loss_flip"] = e.loss.flip;
      ej["loss_unc"] = e.loss.unc;
      ej["loss_unc_var"] = e.loss.unc_var;
      ej["loss_total"] = e.loss.total;
      ej["main_skipped"] = e.loss.main_skipped;
      ej["flip_skipped"] = e.loss.flip_skipped;
      ej["unc_skipped"] = e.loss.unc_skipped;
      ej["behind_origin"] = e.loss.behind_origin;
      ej["params"] = params_to_json(e.params);
      epochs.push_back(std::move(ej));
    }
    sj["epochs"] = std::move(epochs);
    subjects.push_back(std::move(sj));
  }
  j["subjects"] = std::move(subjects);
  return j.dump(2) + "\n";
}

CalibrationReport calibration_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("report json: ") + e.what());
  }
  CalibrationReport out;
  try {
    out.config = config_from_json(j.at("config"));
    for (const auto& sj : j.at("subjects")) {
      SubjectCalibration s;
      s.subject_id = sj.at("subject_id").get<int>();
      if (sj.contains("train_ids")) {
        s.report.train_ids = sj.at("train_ids").get<std::vector<std::int64_t>>();
      }
      s.report.config = out.config;
      s.report.final_params = params_from_json(sj.at("final"));
      s.report.final_alignment.T = mat_from_json(sj.at("final").at("T"), "T");
      s.report.alignment_degenerate_epochs =
          sj.value("alignment_degenerate_epochs", 0);
      if (sj.contains("epochs")) {
        for (const auto& ej : sj.at("epochs")) {
          EpochRecord e;
          e.epoch = ej.at("epoch").get<int>();
          e.lr = ej.at("lr").get<double>();
          e.tau = ej.at("tau").get<double>();
          e.loss.main = ej.at("loss_main").get<double>();
          e.loss.flip = ej.at("loss_flip").get<double>();
          e.loss.unc = ej.at("loss_unc").get<double>();
          e.loss.unc_var = ej.at("loss_unc_var").get<double>();
          e.loss.total = ej.at("loss_total").get<double>();
          e.loss.main_skipped = ej.at("main_skipped").get<int>();
          e.loss.flip_skipped = ej.at("flip_skipped").get<int>();
          e.loss.unc_skipped = ej.at("unc_skipped").get<int>();
          e.loss.behind_origin = ej.at("behind_origin").get<int>();
          e.params = params_from_json(ej.at("params"));
          s.report.epochs.push_back(e);
        }
      }
      out.subjects.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("report json: ") + e.what());
  }
  return out;
}

std::string losses_to_csv_text(const CalibrationReport& report) {
  std::string out =
      "subject_id,epoch,lr,tau,loss_main,loss_flip,loss_unc,loss_unc_var,loss_total\n";
  for (const auto& s : report.subjects) {
    for (const auto& e : s.report.epochs) {
      out += std::to_string(s.subject_id);
      out += ',';
      out += std::to_string(e.epoch);
      for (double x : {e.lr, e.tau, e.loss.main, e.loss.flip, e.loss.unc,
                       e.loss.unc_var, e.loss.total}) {
        out += ',';
        out += format_double(x);
      }
      out += '\n';
    }
  }
  return out;
}

MetricsReport evaluate(const Dataset& data, const CalibrationReport& calibration,
                       Split split) {
  MetricsReport out;
  double subject_sum = 0.0;
  int subject_count = 0;

  for (int subject_id : data.subject_ids()) {
    const SubjectCalibration* cal = calibration.find(subject_id);
    if (!cal) {
      throw SchemaError("evaluate: report has no parameters for subject " +
                        std::to_string(subject_id));
    }
    const ScreenPose pose = cal->report.final_params.pose();
    const GazeAdapter adapter = cal->report.final_params.adapter();

    SubjectMetrics sm;
    sm.subject_id = subject_id;
    double err_sum = 0.0;
    for (const GazeSample* s : data.subject_split(subject_id, split)) {
      try {
        const UnitVec3 g = adapt(s->g_base, adapter);
        const Projection pr = project_full(g, s->o, pose);
        if (pr.behind_origin) ++sm.n_behind;
        err_sum += euclidean_distance(pr.point, s->label);
        ++sm.n_used;
      } catch (const Error&) {
        ++sm.n_invalid;
      }
    }
    sm.mean_mm = sm.n_used > 0 ? err_sum / sm.n_used : 0.0;
    out.invalid_total += sm.n_invalid;
    if (sm.n_used > 0) {
      subject_sum += sm.mean_mm;
      ++subject_count;
    }
    out.subjects.push_back(sm);
  }
  out.overall_mean_mm = subject_count > 0 ? subject_sum / subject_count : 0.0;
  return out;
}

std::string metrics_to_json_text(const MetricsReport& m) {
  json j;
  json subjects = json::array();
  for (const auto& s : m.subjects) {
    json sj;
    sj["subject_id"] = s.subject_id;
    sj["mean_mm"] = s.mean_mm;
    sj["n_used"] = s.n_used;
    sj["n_invalid"] = s.n_invalid;
    sj["n_behind"] = s.n_behind;
    subjects.push_back(std::move(sj));
  }
  j["subjects"] = std::move(subjects);
  j["overall_mean_mm"] = m.overall_mean_mm;
  j["invalid_total"] = m.invalid_total;
  return j.dump(2) + "\n";
}

std::string predictions_to_csv_text(const Dataset& data,
                                    const CalibrationReport& calibration, Split split,
                                    const PixelSpec* px) {
  std::string out = "sample_id,subject_id,pred_u_mm,pred_v_mm,label_u_mm,label_v_mm,"
                    "error_mm,behind_origin,valid";
  if (px) out += ",pred_u_px,pred_v_px";
  out += '\n';

  for (const GazeSample& s : data.samples) {
    if (s.split != split) continue;
    const SubjectCalibration* cal = calibration.find(s.subject_id);
    if (!cal) continue;
    out += std::to_string(s.sample_id);
    out += ',';
    out += std::to_string(s.subject_id);
    bool valid = true;
    Projection pr{};
    try {
      const UnitVec3 g = adapt(s.g_base, cal->report.final_params.adapter());
      pr = project_full(g, s.o, cal->report.final_params.pose());
    } catch (const Error&) {
      valid = false;
    }
    if (valid) {
      for (double x : {pr.point.u, pr.point.v, s.label.u, s.label.v,
                       euclidean_distance(pr.point, s.label)}) {
        out += ',';
        out += format_double(x);
      }
      out += ',';
      out += pr.behind_origin ? '1' : '0';
      out += ",1";
      if (px) {
        const auto p = to_pixels(pr.point, *px);
        out += ',';
        out += format_double(p[0]);
        out += ',';
        out += format_double(p[1]);
      }
    } else {
      out += ",,,";
      out += format_double(s.label.u);
      out += ',';
      out += format_double(s.label.v);
      out += ",,0,0";
      if (px) out += ",,";
    }
    out += '\n';
  }
  return out;
}

}  // namespace gaze2d
