// gaze2d: screen-pose calibration and 2D point-of-regard experiments on
// synthetic scenes.
//
// Subcommands:
//   simulate    generate a synthetic scene CSV (+ truth sidecar)
//   calibrate   fit screen pose and adapter per subject, write a report
//   evaluate    Euclidean-distance metrics of a report on a data split
//   sweep       sample-count / repeatability sweep, CSV output
//   trajectory  pseudo-label trajectories with oracle distances
//   gradcheck   finite-difference validation of all analytic gradients
//
// Exit codes: 0 success, 1 verification/runtime failure, 2 usage or schema
// error. GAZE2D_LOG={quiet,info} controls stderr chatter.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaze2d/errors.hpp"
#include "gaze2d/gradcheck.hpp"
#include "gaze2d/harness.hpp"
#include "gaze2d/metrics.hpp"
#include "gaze2d/simulator.hpp"

namespace {

bool log_enabled() {
  const char* v = std::getenv("GAZE2D_LOG");
  return !(v && std::string(v) == "quiet");
}

void log_info(const std::string& msg) {
  if (log_enabled()) std::cerr << "[gaze2d] " << msg << "\n";
}

struct CalibrateFlags {
  bool no_flip{false};
  bool no_unc{false};
  bool no_alignment{false};
  bool mirror_origin{false};
  std::string known_pose_path;
  int n_override{0};
  std::int64_t seed_override{-1};
  int trial{0};
};

void add_calibrate_flags(CLI::App* cmd, CalibrateFlags* flags) {
  cmd->add_flag("--no-flip", flags->no_flip, "Disable the flipped-sample loss");
  cmd->add_flag("--no-unc", flags->no_unc, "Disable the jitter uncertainty loss");
  cmd->add_flag("--no-alignment", flags->no_alignment,
                "Generate pseudo-labels without the alignment rotation");
  cmd->add_flag("--mirror-origin", flags->mirror_origin,
                "Mirror the gaze origin x for the flipped-sample branch");
  cmd->add_option("--known-pose", flags->known_pose_path,
                  "truth.json path; fixes the pose to the true one");
  cmd->add_option("-n,--n-samples", flags->n_override,
                  "Override the training-set size from the config");
  cmd->add_option("--seed", flags->seed_override, "Override the config seed");
  cmd->add_option("--trial", flags->trial,
                  "Trial index for resampled train subsets");
}

gaze2d::TrainConfig load_config(const std::string& path, const CalibrateFlags& flags) {
  gaze2d::TrainConfig cfg;
  if (!path.empty()) {
    cfg = gaze2d::train_config_from_json_text(gaze2d::read_text_file(path));
  }
  if (flags.no_flip) cfg.use_flip = false;
  if (flags.no_unc) cfg.use_unc = false;
  if (flags.no_alignment) cfg.use_alignment = false;
  if (flags.mirror_origin) cfg.mirror_origin = true;
  if (flags.n_override > 0) cfg.n_samples = flags.n_override;
  if (flags.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed_override);
  if (!flags.known_pose_path.empty()) {
    cfg.init_pose = gaze2d::pose_from_truth_json_text(
        gaze2d::read_text_file(flags.known_pose_path));
    cfg.freeze_pose = true;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"screen-pose calibration and 2D point-of-regard experiments"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scene");
  std::string sim_spec_path, sim_out, sim_truth;
  sim_cmd->add_option("--spec", sim_spec_path, "Scene spec JSON (defaults built in)");
  sim_cmd->add_option("--out", sim_out, "Output sample CSV")->required();
  sim_cmd->add_option("--truth", sim_truth,
                      "Truth sidecar path (default: <out>.truth.json)");

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit pose and adapter per subject");
  std::string cal_data, cal_config, cal_out, cal_traj, cal_losses;
  CalibrateFlags cal_flags;
  cal_cmd->add_option("--data", cal_data, "Sample CSV")->required();
  cal_cmd->add_option("--config", cal_config, "Train config JSON (defaults built in)");
  cal_cmd->add_option("--out", cal_out, "Output report JSON")->required();
  cal_cmd->add_option("--trajectory", cal_traj, "Pseudo-label trajectory CSV");
  cal_cmd->add_option("--loss-csv", cal_losses, "Per-epoch loss CSV");
  add_calibrate_flags(cal_cmd, &cal_flags);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Metrics of a report on a split");
  std::string eval_data, eval_report, eval_out, eval_pred, eval_split = "test";
  double eval_ppi = 0.0;
  std::vector<double> eval_origin_px;
  eval_cmd->add_option("--data", eval_data, "Sample CSV")->required();
  eval_cmd->add_option("--report", eval_report, "Calibration report JSON")->required();
  eval_cmd->add_option("--out", eval_out, "Metrics JSON (stdout if omitted)");
  eval_cmd->add_option("--predictions", eval_pred, "Per-sample prediction CSV");
  eval_cmd->add_option("--split", eval_split, "Split to evaluate: train|test")
      ->check(CLI::IsMember({"train", "test"}));
  eval_cmd->add_option("--ppi", eval_ppi, "Emit pixel coordinates at this PPI");
  eval_cmd->add_option("--origin-px", eval_origin_px,
                       "Pixel origin offset u0 v0 (with --ppi)")
      ->expected(2);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Sample-count / repeatability sweep");
  std::string sweep_data, sweep_config, sweep_out;
  std::vector<int> sweep_n_list = {3, 5, 10, 20, 50};
  int sweep_trials = 10;
  CalibrateFlags sweep_flags;
  sweep_cmd->add_option("--data", sweep_data, "Sample CSV")->required();
  sweep_cmd->add_option("--config", sweep_config, "Train config JSON");
  sweep_cmd->add_option("--out", sweep_out, "Output sweep CSV")->required();
  sweep_cmd->add_option("--n-list", sweep_n_list, "Training-set sizes");
  sweep_cmd->add_option("--trials", sweep_trials, "Resampled trials per size");
  add_calibrate_flags(sweep_cmd, &sweep_flags);

  // trajectory
  auto* traj_cmd =
      app.add_subcommand("trajectory", "Pseudo-label trajectories vs oracle");
  std::string traj_data, traj_config, traj_truth, traj_out;
  CalibrateFlags traj_flags;
  traj_cmd->add_option("--data", traj_data, "Sample CSV")->required();
  traj_cmd->add_option("--config", traj_config, "Train config JSON");
  traj_cmd->add_option("--truth", traj_truth, "truth.json with the true pose")
      ->required();
  traj_cmd->add_option("--out", traj_out, "Output trajectory CSV")->required();
  add_calibrate_flags(traj_cmd, &traj_flags);

  // gradcheck
  auto* grad_cmd =
      app.add_subcommand("gradcheck", "Finite-difference gradient validation");
  std::uint64_t grad_seed = 1;
  int grad_states = 1000;
  bool grad_corrupt = false;
  grad_cmd->add_option("--seed", grad_seed, "RNG seed");
  grad_cmd->add_option("--states", grad_states, "States per suite");
  grad_cmd->add_flag("--corrupt-jacobian", grad_corrupt,
                     "Bias the analytic side (self-test of the checker)")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim_cmd) {
      gaze2d::SceneSpec spec;
      if (!sim_spec_path.empty()) {
        spec = gaze2d::scene_from_json_text(gaze2d::read_text_file(sim_spec_path));
      }
      const gaze2d::SimOutput out = gaze2d::generate(spec);
      gaze2d::write_samples_csv(sim_out, out.data);
      const std::string truth_path =
          sim_truth.empty() ? sim_out + ".truth.json" : sim_truth;
      gaze2d::write_text_file(truth_path, gaze2d::truth_json_text(out.spec));
      log_info("wrote " + std::to_string(out.data.samples.size()) + " samples to " +
               sim_out + " (truth: " + truth_path + ")");
    } else if (*cal_cmd) {
      const gaze2d::TrainConfig cfg = load_config(cal_config, cal_flags);
      const gaze2d::Dataset data = gaze2d::read_samples_csv(cal_data);
      const gaze2d::CalibrationReport report =
          gaze2d::calibrate_all(data, cfg, cal_flags.trial);
      gaze2d::write_text_file(cal_out, gaze2d::calibration_to_json_text(report));
      if (!cal_traj.empty()) {
        std::string csv = "sample_id,epoch,u_mm,v_mm,valid\n";
        for (const auto& subject : report.subjects) {
          const std::string full = subject.report.trajectory.to_csv();
          csv += full.substr(full.find('\n') + 1);
        }
        gaze2d::write_text_file(cal_traj, csv);
      }
      if (!cal_losses.empty()) {
        gaze2d::write_text_file(cal_losses, gaze2d::losses_to_csv_text(report));
      }
      log_info("calibrated " + std::to_string(report.subjects.size()) +
               " subject(s) -> " + cal_out);
    } else if (*eval_cmd) {
      const gaze2d::Dataset data = gaze2d::read_samples_csv(eval_data);
      const gaze2d::CalibrationReport report =
          gaze2d::calibration_from_json_text(gaze2d::read_text_file(eval_report));
      const gaze2d::Split split =
          eval_split == "train" ? gaze2d::Split::kTrain : gaze2d::Split::kTest;
      const gaze2d::MetricsReport metrics = gaze2d::evaluate(data, report, split);
      const std::string text = gaze2d::metrics_to_json_text(metrics);
      if (eval_out.empty()) {
        std::cout << text;
      } else {
        gaze2d::write_text_file(eval_out, text);
      }
      if (!eval_pred.empty()) {
        gaze2d::PixelSpec px;
        const gaze2d::PixelSpec* px_ptr = nullptr;
        if (eval_ppi > 0.0) {
          px.ppi = eval_ppi;
          if (eval_origin_px.size() == 2) {
            px.origin_u_px = eval_origin_px[0];
            px.origin_v_px = eval_origin_px[1];
          }
          px_ptr = &px;
        }
        gaze2d::write_text_file(
            eval_pred, gaze2d::predictions_to_csv_text(data, report, split, px_ptr));
      }
      log_info("overall mean error " +
               gaze2d::format_double(metrics.overall_mean_mm) + " mm");
    } else if (*sweep_cmd) {
      const gaze2d::TrainConfig cfg = load_config(sweep_config, sweep_flags);
      const gaze2d::Dataset data = gaze2d::read_samples_csv(sweep_data);
      const auto rows = gaze2d::run_sweep(data, cfg, sweep_n_list, sweep_trials);
      gaze2d::write_text_file(sweep_out, gaze2d::sweep_to_csv_text(rows));
      log_info("sweep wrote " + std::to_string(rows.size()) + " rows to " + sweep_out);
    } else if (*traj_cmd) {
      const gaze2d::TrainConfig cfg = load_config(traj_config, traj_flags);
      const gaze2d::Dataset data = gaze2d::read_samples_csv(traj_data);
      const gaze2d::ScreenPose true_pose =
          gaze2d::pose_from_truth_json_text(gaze2d::read_text_file(traj_truth));
      const gaze2d::CalibrationReport report =
          gaze2d::calibrate_all(data, cfg, traj_flags.trial);
      gaze2d::write_text_file(
          traj_out, gaze2d::trajectory_with_oracle_csv(data, report, true_pose));
      log_info("trajectories -> " + traj_out);
    } else if (*grad_cmd) {
      gaze2d::GradcheckOptions opts;
      opts.seed = grad_seed;
      opts.n_states = grad_states;
      opts.corrupt_jacobian = grad_corrupt;
      const gaze2d::GradcheckReport report = gaze2d::run_gradcheck(opts);
      gaze2d::print_gradcheck(report, std::cout);
      return report.pass ? 0 : 1;
    }
  } catch (const gaze2d::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gaze2d::InvalidSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gaze2d::InsufficientData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gaze2d::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gaze2d::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
