// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "flipnerf/flipnerf.h"

namespace {

int report(fn_status s) {
  if (s == FN_OK) return 0;
  std::fprintf(stderr, "flipnerf: %s\n", fn_last_error());
  if (s == FN_NUMERIC_ERROR && fn_last_error_iteration() >= 0) {
    std::fprintf(stderr, "flipnerf: numeric failure at iteration %d\n", fn_last_error_iteration());
  }
  return s == FN_INTERNAL_ERROR ? FN_DATA_ERROR : static_cast<int>(s);
}

struct DatasetHandle {
  fn_dataset* ds = nullptr;
  ~DatasetHandle() { fn_dataset_close(ds); }
};

struct RunHandle {
  fn_run* run = nullptr;
  ~RunHandle() { fn_run_close(run); }
};

fn_split parse_split(const std::string& s) {
  if (s == "train") return FN_SPLIT_TRAIN;
  if (s == "upper") return FN_SPLIT_UPPER;
  return FN_SPLIT_TEST;
}

void print_progress(int iteration, double loss, void* user) {
  const int every = *static_cast<const int*>(user);
  if (every > 0 && iteration % every == 0) std::fprintf(stderr, "iter %6d  loss %.6f\n", iteration, loss);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flipnerf: flipped-observation radiance field toolkit"};
  app.require_subcommand(1);

  std::string scene;
  std::string out;
  std::string data;
  std::string run_dir;
  std::string plane = "auto";
  std::string split = "test";
  std::string variance;
  int size = 64;
  int config_n = 1;
  int pose_index = 0;
  int log_every = 100;
  std::uint64_t synth_seed = 0;

  fn_train_options topts;
  fn_train_options_init(&topts);
  std::string mode = topts.mode;
  std::string variance_weighting = "squared";
  bool inputs_photometric = false;

  auto* synth = app.add_subcommand("synth", "Generate an oracle dataset");
  synth->add_option("--scene", scene, "Scene name")->required()->check(CLI::IsMember({"sphere-checker", "sphere-asym"}));
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--size", size, "Image side in pixels")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Seed (generation is deterministic)");

  auto* configs = app.add_subcommand("make-configs", "Write the 8 ring configurations");
  configs->add_option("--data", data, "Dataset directory")->required();
  configs->add_option("--out", out, "Output directory")->required();

  auto* flip = app.add_subcommand("flip-poses", "Estimate flipped poses for one configuration");
  flip->add_option("--data", data, "Dataset directory")->required();
  flip->add_option("--config-n", config_n, "Configuration 1..8")->required()->check(CLI::Range(1, 8));
  flip->add_option("--plane", plane, "auto, geometric, x=0, y=0, z=0 or a,b,c,d")->capture_default_str();
  flip->add_option("--out", out, "Output transforms file")->required();

  auto* train = app.add_subcommand("train", "Train a radiance field");
  train->add_option("--data", data, "Dataset directory")->required();
  train->add_option("--config-n", config_n, "Configuration 1..8")->required()->check(CLI::Range(1, 8));
  train->add_option("--mode", mode, "Experiment mode")
      ->required()
      ->check(CLI::IsMember({"baseline", "baseline-u", "flip", "flip-u", "upper"}));
  train->add_option("--out", out, "Run directory")->required();
  train->add_option("--iters", topts.iters, "Total iterations")->capture_default_str();
  train->add_option("--warmup", topts.warmup, "Iterations before the uncertainty loss")->capture_default_str();
  train->add_option("--seed", topts.seed, "Seed")->capture_default_str();
  train->add_option("--grid", topts.grid, "Voxel grid resolution")->capture_default_str();
  train->add_option("--rays", topts.rays, "Rays per batch")->capture_default_str();
  train->add_option("--beta-min-sq", topts.beta_min_sq, "Variance floor")->capture_default_str();
  train->add_option("--reg-w", topts.reg_w, "Density regularizer weight")->capture_default_str();
  train->add_option("--samples", topts.samples, "Samples per ray")->capture_default_str();
  train->add_option("--plane", plane, "Mirror plane for flipped poses")->capture_default_str();
  train->add_option("--lr-field", topts.lr_field, "Field learning rate")->capture_default_str();
  train->add_option("--lr-pose", topts.lr_pose, "Pose learning rate")->capture_default_str();
  train->add_option("--pose-noise-deg", topts.pose_noise_deg, "Perturb flipped poses by this rotation")
      ->capture_default_str();
  train->add_option("--variance-weighting", variance_weighting, "squared or linear")
      ->check(CLI::IsMember({"squared", "linear"}))
      ->capture_default_str();
  train->add_flag("--inputs-photometric", inputs_photometric,
                  "flip-u: keep plain squared error on input rays after warmup");
  train->add_option("--log-every", log_every, "Progress interval, 0 for silence")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score a run on a split");
  eval->add_option("--run", run_dir, "Run directory")->required();
  eval->add_option("--data", data, "Dataset directory")->required();
  eval->add_option("--split", split, "Split")->required()->check(CLI::IsMember({"test", "train", "upper"}));
  eval->add_option("--out", out, "Output CSV")->required();

  auto* render = app.add_subcommand("render", "Render a training pose of a run");
  render->add_option("--run", run_dir, "Run directory")->required();
  render->add_option("--pose-index", pose_index, "Observation index")->required();
  render->add_option("--out", out, "Output PNG")->required();
  render->add_option("--variance", variance, "Variance PNG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return FN_USAGE_ERROR;
  }

  if (synth->parsed()) return report(fn_synth(scene.c_str(), out.c_str(), size, synth_seed));

  if (render->parsed()) {
    RunHandle run;
    if (fn_status s = fn_run_open(run_dir.c_str(), &run.run); s != FN_OK) return report(s);
    return report(fn_render(run.run, pose_index, out.c_str(), variance.empty() ? nullptr : variance.c_str()));
  }

  DatasetHandle ds;
  if (fn_status s = fn_dataset_open(data.c_str(), &ds.ds); s != FN_OK) return report(s);

  if (configs->parsed()) return report(fn_make_configs(ds.ds, out.c_str()));
  if (flip->parsed()) return report(fn_flip_poses(ds.ds, config_n, plane.c_str(), out.c_str()));
  if (train->parsed()) {
    topts.config_n = config_n;
    topts.mode = mode.c_str();
    topts.plane = plane.c_str();
    topts.variance_linear = variance_weighting == "linear";
    topts.inputs_photometric = inputs_photometric ? 1 : 0;
    const int s = report(fn_train(ds.ds, &topts, out.c_str(), print_progress, &log_every));
    if (s == 0) std::printf("wrote %s\n", out.c_str());
    return s;
  }
  if (eval->parsed()) {
    RunHandle run;
    if (fn_status s = fn_run_open(run_dir.c_str(), &run.run); s != FN_OK) return report(s);
    fn_eval_summary summary{};
    const int s = report(fn_eval(run.run, ds.ds, parse_split(split), out.c_str(), &summary));
    if (s == 0) {
      std::printf("%s: %d views, mean PSNR %.3f dB, mean SSIM %.4f\n", split.c_str(), summary.views,
                  summary.mean_psnr_db, summary.mean_ssim);
    }
    return s;
  }
  return FN_USAGE_ERROR;
}
