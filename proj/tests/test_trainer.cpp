#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "gaze2d/gradcheck.hpp"
#include "gaze2d/metrics.hpp"
#include "gaze2d/simulator.hpp"
#include "gaze2d/trainer.hpp"

using namespace gaze2d;

namespace {

// A sample whose base prediction projects to `pred` and whose label is
// `label`, under the identity pose and adapter.
GazeSample sample_with(const ScreenPoint& pred, const ScreenPoint& label,
                       const Vec3& o, std::int64_t id = 0) {
  GazeSample s;
  s.sample_id = id;
  s.o = o;
  s.label = label;
  s.g_base = inverse_project(pred, o, ScreenPose());
  s.g_base_flipped = s.g_base;
  s.jitter = {s.g_base};
  return s;
}

std::vector<const GazeSample*> ptrs(const std::vector<GazeSample>& v) {
  std::vector<const GazeSample*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

std::vector<GazeSample> train_subset(const Dataset& data, int subject, int n) {
  std::vector<GazeSample> out;
  for (const auto& s : data.samples) {
    if (s.subject_id == subject && s.split == Split::kTrain &&
        static_cast<int>(out.size()) < n) {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("lr schedule: warmup, plateau, decay") {
  const TrainConfig cfg;
  CHECK(lr_schedule(1, cfg) == doctest::Approx(0.0002).epsilon(1e-15));
  CHECK(lr_schedule(3, cfg) == doctest::Approx(0.0006).epsilon(1e-15));
  CHECK(lr_schedule(5, cfg) == 0.001);
  CHECK(lr_schedule(6, cfg) == 0.001);
  CHECK(lr_schedule(30, cfg) == 0.001);
  CHECK(lr_schedule(60, cfg) == 0.001);
  CHECK(lr_schedule(61, cfg) == 0.0005);
  CHECK(lr_schedule(70, cfg) == 0.0005);
  CHECK(lr_schedule(80, cfg) == 0.0005);
  CHECK_THROWS_AS(lr_schedule(0, cfg), InvalidSpec);
  CHECK_THROWS_AS(lr_schedule(81, cfg), InvalidSpec);
}

TEST_CASE("temporal weight sequence") {
  CHECK(temporal_weight(1) == 0.0);
  CHECK(temporal_weight(80) == 79.0 / 80.0);
  for (int t = 2; t <= 80; ++t) {
    CHECK(temporal_weight(t) > temporal_weight(t - 1));
  }
}

TEST_CASE("loss_main arithmetic") {
  const ScreenPose pose;
  const GazeAdapter id = GazeAdapter::identity();

  std::vector<GazeSample> exact = {
      sample_with({10.0, -20.0}, {10.0, -20.0}, {0.0, 0.0, 600.0})};
  CHECK(loss_main(ptrs(exact), pose, id) < 1e-9);

  std::vector<GazeSample> off = {
      sample_with({1.0, 2.0}, {0.0, 0.0}, {0.0, 0.0, 600.0})};
  CHECK(loss_main(ptrs(off), pose, id) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("loss_main is zero on the noiseless scene at the true state") {
  SceneSpec spec;
  spec.drift = {0.0, 0.0, 0.0};
  spec.noise_sigma = 0.0;
  spec.jitter_sigma = 0.0;
  spec.seed = 8;
  const SimOutput sim = generate(spec);
  const auto batch = train_subset(sim.data, 0, 10);
  CHECK(loss_main(ptrs(batch), spec.true_pose, GazeAdapter::identity()) < 1e-9);
}

TEST_CASE("loss_main throws when every sample is parallel to the screen") {
  std::vector<GazeSample> bad;
  for (int i = 0; i < 3; ++i) {
    GazeSample s;
    s.sample_id = i;
    s.o = {0.0, 0.0, 600.0};
    s.g_base = UnitVec3::trusted({1.0, 0.0, 0.0});
    s.g_base_flipped = s.g_base;
    s.jitter = {s.g_base};
    s.label = {0.0, 0.0};
    bad.push_back(s);
  }
  CHECK_THROWS_AS(loss_main(ptrs(bad), ScreenPose(), GazeAdapter::identity()),
                  AllSamplesInvalid);
}

TEST_CASE("loss_flip arithmetic against a fixed pseudo-label") {
  const ScreenPose pose;
  const GazeAdapter id = GazeAdapter::identity();
  const AlignmentTransform t = AlignmentTransform::identity();

  // label (-3,-4) mirrors to the pseudo-label (3,-4); the flipped-image
  // prediction points at (0,0), so the L1 distance is 7.
  std::vector<GazeSample> batch = {
      sample_with({0.0, 0.0}, {-3.0, -4.0}, {0.0, 0.0, 600.0})};
  CHECK(loss_flip(ptrs(batch), pose, id, t) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("loss_flip vanishes on the noiseless scene at the true state") {
  SceneSpec spec;
  spec.drift = {0.0, 0.0, 0.0};
  spec.noise_sigma = 0.0;
  spec.jitter_sigma = 0.0;
  spec.seed = 9;
  const SimOutput sim = generate(spec);
  const auto batch = train_subset(sim.data, 0, 10);
  const double lf = loss_flip(ptrs(batch), spec.true_pose, GazeAdapter::identity(),
                              AlignmentTransform::identity());
  CHECK(lf < 1e-9);
}

TEST_CASE("loss_flip skips samples with an invalid pseudo-label") {
  const ScreenPose pose;
  const GazeAdapter id = GazeAdapter::identity();
  const AlignmentTransform t = AlignmentTransform::identity();

  std::vector<GazeSample> batch = {
      sample_with({0.0, 0.0}, {-3.0, -4.0}, {0.0, 0.0, 600.0}, 0),
      // origin sits on the screen plane at the label point: the inverse
      // projection inside Q degenerates and the sample must be masked
      sample_with({0.0, 0.0}, {5.0, 0.0}, {5.0, 0.0, 0.0}, 1),
  };
  const auto labels = make_pseudo_labels(ptrs(batch), pose, t, 1, false);
  CHECK(labels[0].valid);
  CHECK_FALSE(labels[1].valid);
  CHECK(loss_flip(ptrs(batch), pose, id, t) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("loss_uncertainty hand-expanded K=2 example") {
  const ScreenPose pose;
  const GazeAdapter id = GazeAdapter::identity();
  const Vec3 o{0.0, 0.0, 600.0};

  GazeSample s = sample_with({0.0, 0.0}, {0.0, 0.0}, o);
  s.jitter = {inverse_project({1.0, 0.0}, o, pose), inverse_project({-1.0, 0.0}, o, pose)};
  std::vector<GazeSample> batch = {s};

  CHECK(loss_uncertainty(ptrs(batch), pose, id, 0.5) ==
        doctest::Approx(1.5).epsilon(1e-12));
  // tau = 0 keeps only the fit term
  CHECK(loss_uncertainty(ptrs(batch), pose, id, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loss_uncertainty variance term is zero for identical variants") {
  const ScreenPose pose;
  const GazeAdapter id = GazeAdapter::identity();
  const Vec3 o{0.0, 0.0, 600.0};
  GazeSample s = sample_with({7.0, 3.0}, {0.0, 0.0}, o);
  s.jitter = {s.g_base, s.g_base, s.g_base};
  std::vector<GazeSample> batch = {s};
  const double at0 = loss_uncertainty(ptrs(batch), pose, id, 0.0);
  const double at9 = loss_uncertainty(ptrs(batch), pose, id, 0.9);
  CHECK(at0 == at9);  // variance term exactly zero regardless of tau
}

TEST_CASE("training from the truth on a noiseless scene is a fixed point") {
  SceneSpec spec;
  spec.drift = {0.0, 0.0, 0.0};
  spec.noise_sigma = 0.0;
  spec.jitter_sigma = 0.0;
  spec.seed = 12;
  const SimOutput sim = generate(spec);
  const auto batch = train_subset(sim.data, 0, 10);

  TrainConfig cfg;
  cfg.init_pose = spec.true_pose;
  const TrainReport report = train(batch, cfg);

  CHECK(report.epochs.size() == 80);
  CHECK(report.epochs.front().loss.total < 1e-8);
  CHECK(report.epochs.back().loss.main < 1e-6);
  CHECK(std::abs(report.final_params.r.x - spec.true_pose.r.x) < 1e-6);
  CHECK(std::abs(report.final_params.r.y - spec.true_pose.r.y) < 1e-6);
  CHECK(std::abs(report.final_params.r.z - spec.true_pose.r.z) < 1e-6);
  CHECK(std::abs(report.final_params.t.x - spec.true_pose.t.x) < 1e-6);
  CHECK(std::abs(report.final_params.t.y - spec.true_pose.t.y) < 1e-6);
  CHECK(std::abs(report.final_params.t.z - spec.true_pose.t.z) < 1e-6);
  CHECK(norm(report.final_params.delta) < 1e-6);
  CHECK(norm(report.final_params.bias) < 1e-6);
}

TEST_CASE("epoch records carry the schedule and tau sequence") {
  SceneSpec spec;
  spec.seed = 13;
  const SimOutput sim = generate(spec);
  const auto batch = train_subset(sim.data, 0, 10);
  TrainConfig cfg;
  const TrainReport report = train(batch, cfg);

  REQUIRE(report.epochs.size() == 80);
  CHECK(report.epochs[0].tau == 0.0);
  CHECK(report.epochs[0].loss.unc_var == 0.0);  // variance term off at epoch 1
  CHECK(report.epochs[79].tau == 79.0 / 80.0);
  for (const auto& e : report.epochs) {
    CHECK(e.lr == lr_schedule(e.epoch, cfg));
  }
  // rotation parameterization keeps the pose in SO(3) after every step
  for (const auto& e : report.epochs) {
    const Mat3 rot = rodrigues(e.params.r);
    CHECK(frobenius_distance(rot.transposed() * rot, Mat3::identity()) < 1e-12);
  }
  CHECK(norm(report.final_params.delta) < std::numbers::pi);
}

TEST_CASE("training beats the identity-pose baseline on the drifted scene") {
  SceneSpec spec;  // default: 5-degree drift, sigma = 0.005
  spec.seed = 14;
  const SimOutput sim = generate(spec);
  const auto batch = train_subset(sim.data, 0, 10);

  TrainConfig cfg;
  const TrainReport report = train(batch, cfg);

  const auto test = sim.data.subject_split(0, Split::kTest);
  const ScreenPose fitted = report.final_params.pose();
  const GazeAdapter adapter = report.final_params.adapter();
  double fitted_err = 0.0;
  for (const GazeSample* s : test) {
    fitted_err += euclidean_distance(project(adapt(s->g_base, adapter), s->o, fitted),
                                     s->label);
  }
  fitted_err /= static_cast<double>(test.size());

  const BaselineResult identity_pose = direct_projection_baseline(test, ScreenPose());
  CHECK(fitted_err < identity_pose.mean_mm);
  CHECK(fitted_err < 50.0);  // 10% of the 500 mm screen diagonal
}

TEST_CASE("training is deterministic") {
  SceneSpec spec;
  spec.seed = 15;
  const SimOutput sim = generate(spec);
  const auto batch = train_subset(sim.data, 0, 10);
  const TrainConfig cfg;
  const TrainReport a = train(batch, cfg);
  const TrainReport b = train(batch, cfg);

  const auto pa = a.final_params.to_array();
  const auto pb = b.final_params.to_array();
  for (int i = 0; i < 12; ++i) CHECK(pa[i] == pb[i]);
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    CHECK(a.epochs[e].loss.total == b.epochs[e].loss.total);
  }
  REQUIRE(a.trajectory.rows().size() == b.trajectory.rows().size());
  for (std::size_t i = 0; i < a.trajectory.rows().size(); ++i) {
    CHECK(a.trajectory.rows()[i].u_mm == b.trajectory.rows()[i].u_mm);
  }
}

TEST_CASE("non-finite inputs abort with a diagnostic") {
  SceneSpec spec;
  spec.seed = 16;
  const SimOutput sim = generate(spec);
  auto batch = train_subset(sim.data, 0, 10);
  batch[3].label.u = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(batch, TrainConfig{}), NonFiniteLoss);
}

TEST_CASE("train rejects bad configs and starved batches") {
  SceneSpec spec;
  spec.seed = 17;
  const SimOutput sim = generate(spec);
  auto batch = train_subset(sim.data, 0, 10);

  TrainConfig bad;
  bad.decay_epoch = 90;
  CHECK_THROWS_AS(train(batch, bad), InvalidSpec);

  TrainConfig hungry;
  hungry.n_jitter = 99;
  CHECK_THROWS_AS(train(batch, hungry), InsufficientData);
}

TEST_CASE("total-loss gradient matches finite differences via gradcheck") {
  GradcheckOptions opts;
  opts.seed = 2024;
  opts.n_states = 60;
  const GradcheckReport report = run_gradcheck(opts);
  for (const auto& s : report.suites) {
    INFO(s.name, " max scaled err ", s.max_scaled_err);
    CHECK(s.pass);
  }
  CHECK(report.pass);

  GradcheckOptions corrupt = opts;
  corrupt.n_states = 10;
  corrupt.corrupt_jacobian = true;
  CHECK_FALSE(run_gradcheck(corrupt).pass);
}
