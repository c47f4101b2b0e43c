#include "gaze2d/simulator.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "gaze2d/errors.hpp"
#include "gaze2d/pseudolabel.hpp"
#include "gaze2d/rng.hpp"

namespace gaze2d {

namespace {

using nlohmann::json;

double origin_coord(double u01, double lo, double hi) { return lo + u01 * (hi - lo); }

}  // namespace

void SceneSpec::validate() const {
  if (!(screen_w_mm > 0.0) || !(screen_h_mm > 0.0)) {
    throw InvalidSpec("screen size must be positive");
  }
  if (n_subjects < 1 || samples_per_subject < 1) {
    throw InvalidSpec("need at least one subject and one sample per subject");
  }
  if (train_per_subject < 1 || train_per_subject >= samples_per_subject) {
    throw InvalidSpec("train_per_subject must be in [1, samples_per_subject)");
  }
  if (noise_sigma < 0.0 || jitter_sigma < 0.0) {
    throw InvalidSpec("noise sigmas must be >= 0");
  }
  if (n_jitter < 1) throw InvalidSpec("n_jitter must be >= 1");
  if (!(origin_box.min.x <= origin_box.max.x && origin_box.min.y <= origin_box.max.y &&
        origin_box.min.z <= origin_box.max.z)) {
    throw InvalidSpec("origin_box min/max are inverted");
  }
  if (!all_finite(true_pose.r) || !all_finite(true_pose.t) || !all_finite(drift)) {
    throw InvalidSpec("non-finite pose or drift");
  }
  // Every box corner must sit on the user side of the screen plane, so all
  // sampled rays meet the screen with a positive ray parameter.
  for (int i = 0; i < 8; ++i) {
    const Vec3 c{(i & 1) ? origin_box.max.x : origin_box.min.x,
                 (i & 2) ? origin_box.max.y : origin_box.min.y,
                 (i & 4) ? origin_box.max.z : origin_box.min.z};
    if (dot(c - true_pose.t, true_pose.n.vec()) <= 0.0) {
      throw InvalidSpec("origin_box reaches behind the screen plane");
    }
  }
}

SimOutput generate(const SceneSpec& spec) {
  spec.validate();

  SimOutput out;
  out.spec = spec;
  out.data.n_jitter = spec.n_jitter;

  const Mat3 r_drift = rodrigues(spec.drift);
  std::int64_t next_id = 0;

  for (int subj = 0; subj < spec.n_subjects; ++subj) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(subj)));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int i = 0; i < spec.samples_per_subject; ++i) {
      GazeSample s;
      s.sample_id = next_id++;
      s.subject_id = subj;
      s.split = (i < spec.train_per_subject) ? Split::kTrain : Split::kTest;

      // Fixed draw order per sample: target, origin, eps, eps', jitter.
      // Sigma scaling happens afterwards so the geometry for a given seed
      // is identical across noise settings.
      const double u = (uni(rng) - 0.5) * spec.screen_w_mm;
      const double v = (uni(rng) - 0.5) * spec.screen_h_mm;
      s.label = {u, v};
      s.o = {origin_coord(uni(rng), spec.origin_box.min.x, spec.origin_box.max.x),
             origin_coord(uni(rng), spec.origin_box.min.y, spec.origin_box.max.y),
             origin_coord(uni(rng), spec.origin_box.min.z, spec.origin_box.max.z)};

      const UnitVec3 g_true = inverse_project(s.label, s.o, spec.true_pose);

      const Vec3 eps{gauss(rng), gauss(rng), gauss(rng)};
      const Vec3 eps_f{gauss(rng), gauss(rng), gauss(rng)};
      s.g_base = normalize(r_drift * (g_true.vec() + eps * spec.noise_sigma));
      s.g_base_flipped =
          normalize(r_drift * (flip_gaze(g_true).vec() + eps_f * spec.noise_sigma));

      s.jitter.reserve(spec.n_jitter);
      for (int k = 0; k < spec.n_jitter; ++k) {
        const Vec3 eta{gauss(rng), gauss(rng), gauss(rng)};
        s.jitter.push_back(normalize(s.g_base.vec() + eta * spec.jitter_sigma));
      }

      out.data.samples.push_back(std::move(s));
    }
  }
  return out;
}

ScreenPoint oracle_flipped_label(const ScreenPoint& p, const Vec3& o,
                                 const ScreenPose& true_pose) {
  const UnitVec3 g = inverse_project(p, o, true_pose);
  return project(flip_gaze(g), o, true_pose);
}

BaselineResult direct_projection_baseline(std::span<const GazeSample* const> samples,
                                          const ScreenPose& pose) {
  BaselineResult res;
  double sum = 0.0;
  for (const GazeSample* s : samples) {
    try {
      const Projection pr = project_full(s->g_base, s->o, pose);
      sum += euclidean_distance(pr.point, s->label);
      res.n_used += 1;
      if (pr.behind_origin) res.n_behind += 1;
    } catch (const Error&) {
      res.n_invalid += 1;
    }
  }
  res.mean_mm = res.n_used > 0 ? sum / res.n_used : 0.0;
  return res;
}

BaselineResult direct_projection_baseline(const Dataset& data, const ScreenPose& pose) {
  std::vector<const GazeSample*> ptrs;
  ptrs.reserve(data.samples.size());
  for (const auto& s : data.samples) ptrs.push_back(&s);
  return direct_projection_baseline(ptrs, pose);
}

namespace {

Vec3 vec_from_json(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("scene json: missing '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw SchemaError(std::string("scene json: '") + key + "' must be a 3-array");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

SceneSpec scene_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scene json: ") + e.what());
  }
  SceneSpec spec;
  try {
    if (j.contains("pose_r")) spec.true_pose = ScreenPose(vec_from_json(j, "pose_r"), spec.true_pose.t);
    if (j.contains("pose_t")) spec.true_pose = ScreenPose(spec.true_pose.r, vec_from_json(j, "pose_t"));
    spec.screen_w_mm = j.value("screen_w_mm", spec.screen_w_mm);
    spec.screen_h_mm = j.value("screen_h_mm", spec.screen_h_mm);
    spec.n_subjects = j.value("n_subjects", spec.n_subjects);
    spec.samples_per_subject = j.value("samples_per_subject", spec.samples_per_subject);
    spec.train_per_subject = j.value("train_per_subject", spec.train_per_subject);
    if (j.contains("origin_box_min")) spec.origin_box.min = vec_from_json(j, "origin_box_min");
    if (j.contains("origin_box_max")) spec.origin_box.max = vec_from_json(j, "origin_box_max");
    if (j.contains("drift")) spec.drift = vec_from_json(j, "drift");
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.jitter_sigma = j.value("jitter_sigma", spec.jitter_sigma);
    spec.n_jitter = j.value("n_jitter", spec.n_jitter);
    spec.seed = j.value("seed", spec.seed);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scene json: ") + e.what());
  }
  return spec;
}

std::string scene_to_json_text(const SceneSpec& spec) {
  json j;
  j["pose_r"] = vec_to_json(spec.true_pose.r);
  j["pose_t"] = vec_to_json(spec.true_pose.t);
  j["screen_w_mm"] = spec.screen_w_mm;
  j["screen_h_mm"] = spec.screen_h_mm;
  j["n_subjects"] = spec.n_subjects;
  j["samples_per_subject"] = spec.samples_per_subject;
  j["train_per_subject"] = spec.train_per_subject;
  j["origin_box_min"] = vec_to_json(spec.origin_box.min);
  j["origin_box_max"] = vec_to_json(spec.origin_box.max);
  j["drift"] = vec_to_json(spec.drift);
  j["noise_sigma"] = spec.noise_sigma;
  j["jitter_sigma"] = spec.jitter_sigma;
  j["n_jitter"] = spec.n_jitter;
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

std::string truth_json_text(const SceneSpec& spec) {
  json j;
  j["pose_r"] = vec_to_json(spec.true_pose.r);
  j["pose_t"] = vec_to_json(spec.true_pose.t);
  j["drift"] = vec_to_json(spec.drift);
  j["screen_w_mm"] = spec.screen_w_mm;
  j["screen_h_mm"] = spec.screen_h_mm;
  j["noise_sigma"] = spec.noise_sigma;
  j["jitter_sigma"] = spec.jitter_sigma;
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

ScreenPose pose_from_truth_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("truth json: ") + e.what());
  }
  return ScreenPose(vec_from_json(j, "pose_r"), vec_from_json(j, "pose_t"));
}

}  // namespace gaze2d
