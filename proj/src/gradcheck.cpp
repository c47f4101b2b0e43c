#include "gaze2d/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gaze2d/adapter.hpp"
#include "gaze2d/projection.hpp"
#include "gaze2d/rng.hpp"
#include "gaze2d/simulator.hpp"
#include "gaze2d/trainer.hpp"

namespace gaze2d {

namespace {

// scaled error: |a-f| / (max(|a|,|f|) + floor) with floor = abs_tol/rel_tol,
// so "scaled <= rel_tol" is exactly |a-f| <= rel_tol*max + abs_tol.
double scaled_err(double analytic, double fd, double rel_tol, double abs_tol) {
  const double mag = std::max(std::abs(analytic), std::abs(fd));
  return std::abs(analytic - fd) / (mag + abs_tol / rel_tol);
}

Vec3 random_rotation_vector(Rng& rng, double max_angle) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, max_angle);
  Vec3 axis{gauss(rng), gauss(rng), gauss(rng)};
  const double n = std::sqrt(dot(axis, axis));
  if (n < 1e-12) return {max_angle, 0.0, 0.0};
  return axis * (uni(rng) / n);
}

struct ProjState {
  ScreenPose pose;
  Vec3 o;
  UnitVec3 g = UnitVec3::trusted({0.0, 0.0, -1.0});
};

ProjState random_projection_state(Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (;;) {
    const Vec3 r = random_rotation_vector(rng, 0.5);
    const Vec3 t{(uni(rng) - 0.5) * 300.0, (uni(rng) - 0.5) * 300.0, uni(rng) * 150.0};
    const ScreenPose pose(r, t);
    const Vec3 o{(uni(rng) - 0.5) * 240.0, (uni(rng) - 0.5) * 240.0,
                 350.0 + uni(rng) * 350.0};
    const ScreenPoint target{(uni(rng) - 0.5) * 440.0, (uni(rng) - 0.5) * 340.0};
    ProjState st{pose, o};
    try {
      st.g = inverse_project(target, o, pose);
    } catch (const Error&) {
      continue;
    }
    if (std::abs(dot(st.g.vec(), pose.n.vec())) <= 1e-3) continue;
    return st;
  }
}

SuiteResult check_projection(Rng& rng, const GradcheckOptions& opts) {
  SuiteResult res{"projection_jacobian", opts.n_states, 0.0, 1e-4, false};
  const double h = opts.fd_step;
  const double corrupt = opts.corrupt_jacobian ? 1e-2 : 0.0;

  for (int s = 0; s < opts.n_states; ++s) {
    const ProjState st = random_projection_state(rng);
    const ProjectionJacobian jac = projection_jacobian(st.g, st.o, st.pose);

    for (int k = 0; k < 9; ++k) {
      const auto eval = [&](double sign) {
        Vec3 r = st.pose.r;
        Vec3 t = st.pose.t;
        Vec3 g = st.g.vec();
        double* slot = k < 3 ? (&r.x + k) : (k < 6 ? (&t.x + (k - 3)) : (&g.x + (k - 6)));
        *slot += sign * h;
        return project(UnitVec3::trusted(g), st.o, ScreenPose(r, t));
      };
      const ScreenPoint plus = eval(1.0);
      const ScreenPoint minus = eval(-1.0);
      const double fd_u = (plus.u - minus.u) / (2.0 * h);
      const double fd_v = (plus.v - minus.v) / (2.0 * h);
      res.max_scaled_err = std::max(
          res.max_scaled_err, scaled_err(jac.du[k] + corrupt, fd_u, 1e-4, 1e-7));
      res.max_scaled_err = std::max(
          res.max_scaled_err, scaled_err(jac.dv[k] + corrupt, fd_v, 1e-4, 1e-7));
    }
  }
  res.pass = res.max_scaled_err <= res.tolerance;
  return res;
}

SuiteResult check_adapter(Rng& rng, const GradcheckOptions& opts) {
  SuiteResult res{"adapt_jacobian", opts.n_states, 0.0, 1e-4, false};
  const double h = opts.fd_step;
  const double corrupt = opts.corrupt_jacobian ? 1e-2 : 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  for (int s = 0; s < opts.n_states; ++s) {
    const UnitVec3 base = normalize(Vec3{gauss(rng), gauss(rng), gauss(rng)});
    GazeAdapter a;
    a.delta = random_rotation_vector(rng, 0.5);
    a.bias = Vec3{gauss(rng), gauss(rng), gauss(rng)} * (0.2 * uni(rng));
    const AdaptJacobian jac = adapt_jacobian(base, a);

    for (int k = 0; k < 6; ++k) {
      const auto eval = [&](double sign) {
        GazeAdapter p = a;
        double* slot = k < 3 ? (&p.delta.x + k) : (&p.bias.x + (k - 3));
        *slot += sign * h;
        return adapt(base, p);
      };
      const UnitVec3 plus = eval(1.0);
      const UnitVec3 minus = eval(-1.0);
      const double fd[3] = {(plus.x - minus.x) / (2.0 * h),
                            (plus.y - minus.y) / (2.0 * h),
                            (plus.z - minus.z) / (2.0 * h)};
      for (int c = 0; c < 3; ++c) {
        res.max_scaled_err = std::max(
            res.max_scaled_err, scaled_err(jac.d[c][k] + corrupt, fd[c], 1e-4, 1e-8));
      }
    }
  }
  res.pass = res.max_scaled_err <= res.tolerance;
  return res;
}

SuiteResult check_total_loss(Rng& rng, const GradcheckOptions& opts) {
  SuiteResult res{"total_loss_gradient", opts.n_states, 0.0, 1e-3, false};
  const double h = opts.fd_step;
  const double corrupt = opts.corrupt_jacobian ? 1e-2 : 0.0;
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  SceneSpec scene;
  scene.n_subjects = 1;
  scene.samples_per_subject = 8;
  scene.train_per_subject = 7;
  scene.seed = derive_seed(opts.seed, 777);
  const SimOutput sim = generate(scene);
  std::vector<const GazeSample*> batch;
  for (const auto& s : sim.data.samples) {
    if (s.split == Split::kTrain) batch.push_back(&s);
  }

  TrainConfig cfg;
  cfg.n_jitter = scene.n_jitter;

  int accepted = 0;
  while (accepted < opts.n_states) {
    Params params;
    params.r = random_rotation_vector(rng, 0.4);
    params.t = {(uni(rng) - 0.5) * 240.0, (uni(rng) - 0.5) * 240.0, uni(rng) * 120.0};
    params.delta = random_rotation_vector(rng, 0.3);
    params.bias = random_rotation_vector(rng, 0.15);
    const double tau = uni(rng);

    std::vector<PseudoLabel> labels;
    LossBreakdown probe;
    try {
      const AlignmentTransform t =
          solve_epoch_alignment(batch, params.adapter(), true, nullptr);
      labels = make_pseudo_labels(batch, params.pose(), t, 1, false);
      probe = epoch_loss(batch, labels, params, tau, cfg, nullptr);
    } catch (const Error&) {
      continue;
    }
    // Skip states where any projection failed or a residual sits on a kink.
    if (probe.main_skipped > 0 || probe.flip_skipped > 0 || probe.unc_skipped > 0) {
      continue;
    }
    if (probe.min_abs_residual < 1e-6) continue;
    ++accepted;

    std::array<double, 12> grad{};
    epoch_loss(batch, labels, params, tau, cfg, &grad);

    auto theta = params.to_array();
    for (int k = 0; k < 12; ++k) {
      const auto eval = [&](double sign) {
        auto th = theta;
        th[k] += sign * h;
        return epoch_loss(batch, labels, Params::from_array(th), tau, cfg, nullptr)
            .total;
      };
      double fd;
      try {
        fd = (eval(1.0) - eval(-1.0)) / (2.0 * h);
      } catch (const Error&) {
        fd = grad[k];  // probe left the valid region; skip this coordinate
      }
      res.max_scaled_err =
          std::max(res.max_scaled_err, scaled_err(grad[k] + corrupt, fd, 1e-3, 1e-5));
    }
  }
  res.pass = res.max_scaled_err <= res.tolerance;
  return res;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& opts) {
  GradcheckReport report;
  {
    Rng rng(derive_seed(opts.seed, 1));
    report.suites.push_back(check_projection(rng, opts));
  }
  {
    Rng rng(derive_seed(opts.seed, 2));
    report.suites.push_back(check_adapter(rng, opts));
  }
  {
    Rng rng(derive_seed(opts.seed, 3));
    report.suites.push_back(check_total_loss(rng, opts));
  }
  report.pass = true;
  for (const auto& s : report.suites) report.pass = report.pass && s.pass;
  return report;
}

void print_gradcheck(const GradcheckReport& report, std::ostream& os) {
  for (const auto& s : report.suites) {
    os << (s.pass ? "[PASS] " : "[FAIL] ") << s.name << ": max scaled error "
       << s.max_scaled_err << " (tolerance " << s.tolerance << ", " << s.n_states
       << " states)\n";
  }
  os << (report.pass ? "gradcheck: all suites passed\n"
                     : "gradcheck: FAILURE\n");
}

}  // namespace gaze2d
