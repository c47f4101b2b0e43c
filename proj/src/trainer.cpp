#include "gaze2d/trainer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gaze2d/errors.hpp"

namespace gaze2d {

namespace {

// L1/L2 terms treat residuals inside this band as sitting exactly on the
// kink: value kept, derivative zero. This is the subgradient-at-zero
// convention made robust to floating-point residue, and it is what makes
// a perfectly fit state an exact stationary point (Adam then leaves it
// bit-for-bit unchanged).
constexpr double kKinkEps = 1e-9;

// Vec3 -> Vec3T<T> lift that also accepts T = double.
template <class T>
Vec3T<T> lift_vec(const Vec3& v) {
  return {T(v.x), T(v.y), T(v.z)};
}

double l1_term(double x) { return std::abs(x); }

template <std::size_t N>
Dual<N> l1_term(const Dual<N>& x) {
  if (std::abs(x.v) <= kKinkEps) return Dual<N>(std::abs(x.v));
  return abs(x);
}

template <class T>
T l1_pair(const ScreenPointT<T>& a, const ScreenPoint& b) {
  return l1_term(a.u - b.u) + l1_term(a.v - b.v);
}

double l2_term(double du, double dv) { return std::sqrt(du * du + dv * dv); }

template <std::size_t N>
Dual<N> l2_term(const Dual<N>& du, const Dual<N>& dv) {
  const Dual<N> sq = du * du + dv * dv;
  const double n = std::sqrt(sq.v);
  if (n <= kKinkEps) return Dual<N>(n);
  Dual<N> out(n);
  const double s = 0.5 / n;
  for (std::size_t i = 0; i < N; ++i) out.d[i] = s * sq.d[i];
  return out;
}

Vec3 mirror_x(const Vec3& o) { return {-o.x, o.y, o.z}; }

template <class T>
struct EvalState {
  FrameT<T> frame;
  Mat3T<T> rot_delta;
  Vec3T<T> bias;
};

template <class T>
EvalState<T> make_eval_state(const Vec3T<T>& r, const Vec3T<T>& t,
                             const Vec3T<T>& delta, const Vec3T<T>& bias) {
  return {make_frame(r, t), rodrigues(delta), bias};
}

template <class T>
struct EvalResult {
  T total{0.0};
  LossBreakdown values;
};

// The weighted epoch loss with pseudo-labels as constants. Samples whose
// projection chain fails are skipped with a count; the behind-origin flag
// is tallied but does not reject the sample.
template <class T>
EvalResult<T> eval_losses(std::span<const GazeSample* const> batch,
                          const std::vector<PseudoLabel>& labels,
                          const EvalState<T>& st, double tau, const TrainConfig& cfg) {
  EvalResult<T> res;
  const int k_use = cfg.n_jitter;

  double min_resid = std::numeric_limits<double>::infinity();
  const auto track = [&min_resid](double r) {
    r = std::abs(r);
    if (r < min_resid) min_resid = r;
  };
  const auto track_pair = [&track](const ScreenPointT<T>& a, const ScreenPoint& b) {
    track(value(a.u) - b.u);
    track(value(a.v) - b.v);
  };

  T main_sum(0.0);
  int main_valid = 0;
  for (const GazeSample* s : batch) {
    try {
      const auto g_ad = adapt_rotated(Unit3T<T>::trusted(lift_vec<T>(s->g_base.vec())),
                                      st.rot_delta, st.bias);
      const auto pr = project_full(g_ad, lift_vec<T>(s->o), st.frame);
      if (pr.behind_origin) ++res.values.behind_origin;
      main_sum += l1_pair(pr.point, s->label);
      track_pair(pr.point, s->label);
      ++main_valid;
    } catch (const Error&) {
      ++res.values.main_skipped;
    }
  }
  if (main_valid == 0) {
    throw AllSamplesInvalid("loss_main: every sample failed to project");
  }
  res.values.main = value(main_sum);
  res.total += cfg.w_main * main_sum;

  if (cfg.use_flip) {
    T flip_sum(0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const GazeSample* s = batch[i];
      if (i >= labels.size() || !labels[i].valid) {
        ++res.values.flip_skipped;
        continue;
      }
      try {
        const Vec3 o = cfg.mirror_origin ? mirror_x(s->o) : s->o;
        const auto g_ad = adapt_rotated(
            Unit3T<T>::trusted(lift_vec<T>(s->g_base_flipped.vec())), st.rot_delta,
            st.bias);
        const auto pr = project_full(g_ad, lift_vec<T>(o), st.frame);
        if (pr.behind_origin) ++res.values.behind_origin;
        flip_sum += l1_pair(pr.point, labels[i].p);
        track_pair(pr.point, labels[i].p);
      } catch (const Error&) {
        ++res.values.flip_skipped;
      }
    }
    res.values.flip = value(flip_sum);
    res.total += cfg.w_flip * flip_sum;
  }

  if (cfg.use_unc) {
    T fit_sum(0.0);
    T var_sum(0.0);
    for (const GazeSample* s : batch) {
      std::vector<ScreenPointT<T>> preds;
      preds.reserve(k_use);
      for (int k = 0; k < k_use; ++k) {
        try {
          const auto g_ad = adapt_rotated(
              Unit3T<T>::trusted(lift_vec<T>(s->jitter[k].vec())), st.rot_delta,
              st.bias);
          const auto pr = project_full(g_ad, lift_vec<T>(s->o), st.frame);
          if (pr.behind_origin) ++res.values.behind_origin;
          fit_sum += l1_pair(pr.point, s->label);
          track_pair(pr.point, s->label);
          preds.push_back(pr.point);
        } catch (const Error&) {
          ++res.values.unc_skipped;
        }
      }
      if (preds.empty()) continue;
      ScreenPointT<T> centroid{T(0.0), T(0.0)};
      for (const auto& p : preds) {
        centroid.u += p.u;
        centroid.v += p.v;
      }
      const double inv = 1.0 / static_cast<double>(preds.size());
      centroid.u = centroid.u * inv;
      centroid.v = centroid.v * inv;
      for (const auto& p : preds) {
        const T d = l2_term(p.u - centroid.u, p.v - centroid.v);
        track(value(d));
        var_sum += d;
      }
    }
    const double norm_nk = 1.0 / (static_cast<double>(batch.size()) * k_use);
    const T unc = (fit_sum + tau * var_sum) * norm_nk;
    res.values.unc = value(unc);
    res.values.unc_var = tau * value(var_sum) * norm_nk;
    res.total += cfg.w_unc * unc;
  }

  res.values.total = value(res.total);
  res.values.min_abs_residual = min_resid;
  return res;
}

Vec3 wrap_rotation_vector(const Vec3& delta) {
  const double theta = std::sqrt(dot(delta, delta));
  if (theta < std::numbers::pi) return delta;
  // Same rotation, principal-range vector: angle theta - 2pi (negative)
  // along the same axis.
  const double scale = (theta - 2.0 * std::numbers::pi) / theta;
  return delta * scale;
}

std::string snapshot(int epoch, const Params& p, const LossBreakdown& loss) {
  std::ostringstream os;
  os << "epoch " << epoch << " r=(" << p.r.x << "," << p.r.y << "," << p.r.z << ")"
     << " t=(" << p.t.x << "," << p.t.y << "," << p.t.z << ")"
     << " delta=(" << p.delta.x << "," << p.delta.y << "," << p.delta.z << ")"
     << " bias=(" << p.bias.x << "," << p.bias.y << "," << p.bias.z << ")"
     << " main=" << loss.main << " flip=" << loss.flip << " unc=" << loss.unc;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (n_samples < 1 || n_jitter < 1 || epochs < 1) {
    throw InvalidSpec("train config: counts must be positive");
  }
  if (!(lr_init > 0.0) || !(lr_after_decay > 0.0)) {
    throw InvalidSpec("train config: learning rates must be positive");
  }
  if (warmup_epochs < 1 || decay_epoch < 1 || decay_epoch >= epochs) {
    throw InvalidSpec("train config: need 1 <= decay_epoch < epochs");
  }
  if (w_main < 0.0 || w_flip < 0.0 || w_unc < 0.0) {
    throw InvalidSpec("train config: loss weights must be >= 0");
  }
}

std::array<double, 12> Params::to_array() const {
  return {r.x, r.y, r.z, t.x, t.y, t.z, delta.x, delta.y, delta.z, bias.x, bias.y, bias.z};
}

Params Params::from_array(const std::array<double, 12>& a) {
  Params p;
  p.r = {a[0], a[1], a[2]};
  p.t = {a[3], a[4], a[5]};
  p.delta = {a[6], a[7], a[8]};
  p.bias = {a[9], a[10], a[11]};
  return p;
}

double lr_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 1 || epoch > cfg.epochs) {
    throw InvalidSpec("lr_schedule: epoch out of range");
  }
  if (epoch <= cfg.warmup_epochs) {
    return cfg.lr_init * static_cast<double>(epoch) /
           static_cast<double>(cfg.warmup_epochs);
  }
  if (epoch <= cfg.decay_epoch) return cfg.lr_init;
  return cfg.lr_after_decay;
}

double loss_main(std::span<const GazeSample* const> batch, const ScreenPose& pose,
                 const GazeAdapter& adapter) {
  TrainConfig cfg;
  cfg.use_flip = false;
  cfg.use_unc = false;
  const auto st = make_eval_state<double>(pose.r, pose.t, adapter.delta, adapter.bias);
  return eval_losses<double>(batch, {}, st, 0.0, cfg).values.main;
}

double loss_flip(std::span<const GazeSample* const> batch, const ScreenPose& pose,
                 const GazeAdapter& adapter, const AlignmentTransform& t) {
  TrainConfig cfg;
  cfg.use_unc = false;
  const auto labels = make_pseudo_labels(batch, pose, t, 1, cfg.mirror_origin);
  const auto st = make_eval_state<double>(pose.r, pose.t, adapter.delta, adapter.bias);
  return eval_losses<double>(batch, labels, st, 0.0, cfg).values.flip;
}

double loss_uncertainty(std::span<const GazeSample* const> batch, const ScreenPose& pose,
                        const GazeAdapter& adapter, double tau) {
  if (batch.empty()) throw InvalidSpec("loss_uncertainty: empty batch");
  TrainConfig cfg;
  cfg.use_flip = false;
  cfg.n_jitter = static_cast<int>(batch.front()->jitter.size());
  for (const GazeSample* s : batch) {
    if (static_cast<int>(s->jitter.size()) != cfg.n_jitter) {
      throw InvalidSpec("loss_uncertainty: inconsistent jitter counts");
    }
  }
  const auto st = make_eval_state<double>(pose.r, pose.t, adapter.delta, adapter.bias);
  return eval_losses<double>(batch, {}, st, tau, cfg).values.unc;
}

AlignmentTransform solve_epoch_alignment(std::span<const GazeSample* const> batch,
                                         const GazeAdapter& adapter, bool enabled,
                                         bool* degenerate) {
  if (degenerate) *degenerate = false;
  if (!enabled) return AlignmentTransform::identity();
  std::vector<AnchorPair> anchors;
  anchors.reserve(batch.size());
  for (const GazeSample* s : batch) {
    try {
      anchors.push_back({adapt(s->g_base, adapter).vec(), s->g_base.vec()});
    } catch (const DegenerateVector&) {
      // adapter collapsed this direction; leave it out of the fit
    }
  }
  try {
    return solve_alignment(anchors);
  } catch (const DegenerateAnchors&) {
    if (degenerate) *degenerate = true;
    return AlignmentTransform::identity();
  }
}

std::vector<PseudoLabel> make_pseudo_labels(std::span<const GazeSample* const> batch,
                                            const ScreenPose& pose,
                                            const AlignmentTransform& t, int epoch,
                                            bool mirror_origin) {
  std::vector<PseudoLabel> out;
  out.reserve(batch.size());
  for (const GazeSample* s : batch) {
    out.push_back(mirror_origin
                      ? pseudo_label_mirrored(s->label, s->o, pose, t, s->sample_id,
                                              epoch)
                      : pseudo_label(s->label, s->o, pose, t, s->sample_id, epoch));
  }
  return out;
}

LossBreakdown epoch_loss(std::span<const GazeSample* const> batch,
                         const std::vector<PseudoLabel>& labels, const Params& params,
                         double tau, const TrainConfig& cfg,
                         std::array<double, 12>* grad_out) {
  if (!grad_out) {
    const auto st =
        make_eval_state<double>(params.r, params.t, params.delta, params.bias);
    return eval_losses<double>(batch, labels, st, tau, cfg).values;
  }
  using D = Dual<12>;
  const Vec3T<D> r{D::seeded(params.r.x, 0), D::seeded(params.r.y, 1),
                   D::seeded(params.r.z, 2)};
  const Vec3T<D> t{D::seeded(params.t.x, 3), D::seeded(params.t.y, 4),
                   D::seeded(params.t.z, 5)};
  const Vec3T<D> delta{D::seeded(params.delta.x, 6), D::seeded(params.delta.y, 7),
                       D::seeded(params.delta.z, 8)};
  const Vec3T<D> bias{D::seeded(params.bias.x, 9), D::seeded(params.bias.y, 10),
                      D::seeded(params.bias.z, 11)};
  const auto st = make_eval_state<D>(r, t, delta, bias);
  const auto res = eval_losses<D>(batch, labels, st, tau, cfg);
  *grad_out = res.total.d;
  return res.values;
}

TrainReport train(std::span<const GazeSample* const> batch, const TrainConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(batch.size()) < 1) {
    throw InsufficientData("train: empty batch");
  }
  for (const GazeSample* s : batch) {
    if (static_cast<int>(s->jitter.size()) < cfg.n_jitter) {
      throw InsufficientData("train: sample " + std::to_string(s->sample_id) +
                             " has fewer jitter variants than config n_jitter");
    }
  }

  TrainReport report;
  report.config = cfg;
  for (const GazeSample* s : batch) report.train_ids.push_back(s->sample_id);

  Params params;
  params.r = cfg.init_pose.r;
  params.t = cfg.init_pose.t;

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  std::array<double, 12> m{};
  std::array<double, 12> v{};
  // The optimizer works on the translation in meters (Adam steps are
  // lr-sized regardless of gradient scale, and a millimeter-scale step
  // budget of epochs*lr could never cross a screen-offset distance).
  // Equivalent to reparameterizing theta[3..5] = t/1000; externally t
  // stays in mm.
  std::array<double, 12> step_scale;
  step_scale.fill(1.0);
  step_scale[3] = step_scale[4] = step_scale[5] = 1000.0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const ScreenPose pose = params.pose();
    const GazeAdapter adapter = params.adapter();

    bool degenerate = false;
    const AlignmentTransform t =
        solve_epoch_alignment(batch, adapter, cfg.use_alignment, &degenerate);
    if (degenerate) ++report.alignment_degenerate_epochs;

    const auto labels =
        make_pseudo_labels(batch, pose, t, epoch, cfg.mirror_origin);
    for (const PseudoLabel& l : labels) report.trajectory.append(l);

    const double tau = temporal_weight(epoch);
    std::array<double, 12> grad{};
    const LossBreakdown loss = epoch_loss(batch, labels, params, tau, cfg, &grad);

    bool finite = std::isfinite(loss.total);
    for (double g : grad) finite = finite && std::isfinite(g);
    if (!finite) {
      throw NonFiniteLoss("train: non-finite loss or gradient at " +
                          snapshot(epoch, params, loss));
    }

    const double lr = lr_schedule(epoch, cfg);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.tau = tau;
    rec.loss = loss;
    rec.params = params;
    report.epochs.push_back(rec);

    if (cfg.freeze_pose) {
      for (int i = 0; i < 6; ++i) grad[i] = 0.0;
    }

    auto theta = params.to_array();
    const double bc1 = 1.0 - std::pow(kBeta1, epoch);
    const double bc2 = 1.0 - std::pow(kBeta2, epoch);
    for (int i = 0; i < 12; ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= lr * step_scale[i] * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
    params = Params::from_array(theta);
    params.delta = wrap_rotation_vector(params.delta);
  }

  report.final_params = params;
  report.final_alignment =
      solve_epoch_alignment(batch, params.adapter(), cfg.use_alignment, nullptr);
  return report;
}

TrainReport train(const std::vector<GazeSample>& batch, const TrainConfig& cfg) {
  std::vector<const GazeSample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& s : batch) ptrs.push_back(&s);
  return train(ptrs, cfg);
}

}  // namespace gaze2d
