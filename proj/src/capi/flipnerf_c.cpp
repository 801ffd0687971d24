// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/flipnerf.h"

#include <exception>
#include <fstream>
#include <new>
#include <string>

#include <json.hpp>

#include "flipnerf/dataio.hpp"
#include "flipnerf/error.hpp"
#include "flipnerf/evaluate.hpp"
#include "flipnerf/scene.hpp"
#include "flipnerf/trainer.hpp"

struct fn_dataset {
  flipnerf::Dataset ds;
};

struct fn_run {
  flipnerf::LoadedRun run;
};

namespace {

namespace fs = std::filesystem;
using flipnerf::ErrorKind;
using nlohmann::json;

thread_local std::string g_last_error;
thread_local int g_last_iteration = -1;

fn_status status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NumericFailure:
    case ErrorKind::NonpositiveVariance:
      return FN_NUMERIC_ERROR;
    case ErrorKind::UnknownMode:
    case ErrorKind::InvalidArgument:
    case ErrorKind::PixelOutOfRange:
    case ErrorKind::LengthMismatch:
      return FN_USAGE_ERROR;
    default:
      return FN_DATA_ERROR;
  }
}

fn_status fail(fn_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
fn_status guarded(F&& f) {
  g_last_error.clear();
  g_last_iteration = -1;
  try {
    f();
    return FN_OK;
  } catch (const flipnerf::NumericFailure& e) {
    g_last_iteration = e.iteration();
    return fail(FN_NUMERIC_ERROR, e.what());
  } catch (const flipnerf::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const json::exception& e) {
    return fail(FN_DATA_ERROR, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(FN_DATA_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FN_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(FN_INTERNAL_ERROR, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw flipnerf::Error(ErrorKind::InvalidArgument, what);
}

flipnerf::Split to_split(fn_split s) {
  switch (s) {
    case FN_SPLIT_TRAIN: return flipnerf::Split::Train;
    case FN_SPLIT_TEST: return flipnerf::Split::Test;
    case FN_SPLIT_UPPER: return flipnerf::Split::Upper;
  }
  throw flipnerf::Error(ErrorKind::InvalidArgument, "unknown split");
}

void check_config_n(int n) {
  if (n < 1 || n > flipnerf::kConfigCount) {
    throw flipnerf::Error(ErrorKind::InvalidArgument, "config-n must be in 1..8, got " + std::to_string(n));
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw flipnerf::Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
}

}  // namespace

extern "C" {

const char* fn_last_error(void) { return g_last_error.c_str(); }

int fn_last_error_iteration(void) { return g_last_iteration; }

fn_status fn_synth(const char* scene, const char* out_dir, int size, uint64_t seed) {
  (void)seed;
  return guarded([&] {
    require(scene && out_dir, "scene and out_dir are required");
    require(size >= 11, "size must be at least 11");
    flipnerf::RingSpec ring;
    ring.size = size;
    flipnerf::generate_synthetic_dataset(flipnerf::make_scene(scene), ring, out_dir);
  });
}

fn_status fn_dataset_open(const char* dir, fn_dataset** out) {
  return guarded([&] {
    require(dir && out, "dir and out are required");
    *out = nullptr;
    auto* h = new fn_dataset{flipnerf::load_nerf_synthetic(dir)};
    *out = h;
  });
}

void fn_dataset_close(fn_dataset* ds) { delete ds; }

fn_status fn_dataset_view_count(const fn_dataset* ds, fn_split split, int config_n, int* count) {
  return guarded([&] {
    require(ds && count, "dataset and count are required");
    check_config_n(config_n);
    *count = static_cast<int>(flipnerf::views_for(ds->ds, to_split(split), config_n).size());
  });
}

fn_status fn_make_configs(const fn_dataset* ds, const char* out_dir) {
  return guarded([&] {
    require(ds && out_dir, "dataset and out_dir are required");
    const auto configs = flipnerf::make_configs(ds->ds.train.size());
    for (const auto& c : configs) {
      write_file(fs::path(out_dir) / ("config_" + std::to_string(c.n) + ".json"), json(c.indices).dump() + "\n");
    }
  });
}

fn_status fn_flip_poses(const fn_dataset* ds, int config_n, const char* plane, const char* out_file) {
  return guarded([&] {
    require(ds && out_file, "dataset and out_file are required");
    check_config_n(config_n);
    flipnerf::ScheduleOptions opts;
    opts.config_n = config_n;
    opts.plane = flipnerf::PlaneChoice::parse(plane ? plane : "auto");
    flipnerf::TrainConfig cfg;
    cfg.mode = flipnerf::Mode::Flip;
    const auto roster = flipnerf::assemble_observations(ds->ds, cfg.mode, opts, cfg);
    const auto inputs = flipnerf::views_for(ds->ds, flipnerf::Split::Train, config_n);
    json frames = json::array();
    for (size_t k = 0; k < roster.flipped_estimates.size(); ++k) {
      const auto pose = ds->ds.normalization.undo(roster.flipped_estimates[k]);
      frames.push_back({{"file_path", inputs[k].file_path},
                        {"flip_horizontal", true},
                        {"transform_matrix", flipnerf::pose_to_json(pose)}});
    }
    json doc = {{"camera_angle_x", ds->ds.camera_angle_x}, {"frames", frames}};
    if (roster.plane) {
      const auto& p = *roster.plane;
      doc["mirror_plane"] = {p.normal.x(), p.normal.y(), p.normal.z(), -p.offset};
    }
    write_file(out_file, doc.dump(2) + "\n");
  });
}

void fn_train_options_init(fn_train_options* opts) {
  if (!opts) return;
  const flipnerf::TrainConfig d;
  opts->config_n = 1;
  opts->mode = "flip-u";
  opts->plane = "auto";
  opts->iters = d.total_iters;
  opts->warmup = d.warmup_iters;
  opts->seed = d.seed;
  opts->grid = d.grid_resolution;
  opts->rays = d.rays_per_batch;
  opts->samples = d.n_samples;
  opts->beta_min_sq = d.beta_min_sq;
  opts->reg_w = d.reg_weight;
  opts->lr_field = d.lr_field;
  opts->lr_pose = d.lr_pose;
  opts->pose_noise_deg = 0.0;
  opts->init_density_raw = d.init_density_raw;
  opts->variance_linear = 0;
  opts->inputs_photometric = d.inputs_at_beta_min ? 0 : 1;
}

fn_status fn_train(const fn_dataset* ds, const fn_train_options* opts, const char* out_dir, fn_progress_fn progress,
                   void* user) {
  return guarded([&] {
    require(ds && opts && out_dir, "dataset, options and out_dir are required");
    check_config_n(opts->config_n);
    flipnerf::TrainConfig cfg;
    cfg.mode = flipnerf::parse_mode(opts->mode ? opts->mode : "");
    cfg.total_iters = opts->iters;
    cfg.warmup_iters = opts->warmup;
    cfg.seed = opts->seed;
    cfg.grid_resolution = opts->grid;
    cfg.rays_per_batch = opts->rays;
    cfg.n_samples = opts->samples;
    cfg.beta_min_sq = opts->beta_min_sq;
    cfg.reg_weight = opts->reg_w;
    cfg.lr_field = opts->lr_field;
    cfg.lr_pose = opts->lr_pose;
    cfg.init_density_raw = opts->init_density_raw;
    cfg.weighting = opts->variance_linear ? flipnerf::VarianceWeighting::Linear : flipnerf::VarianceWeighting::Squared;
    cfg.inputs_at_beta_min = opts->inputs_photometric == 0;
    cfg.validate();
    flipnerf::ScheduleOptions sched;
    sched.config_n = opts->config_n;
    sched.plane = flipnerf::PlaneChoice::parse(opts->plane ? opts->plane : "auto");
    sched.pose_noise_deg = opts->pose_noise_deg;
    if (progress) {
      sched.on_step = [&](int it, const flipnerf::LossBreakdown& l) { progress(it, l.total, user); };
    }
    const auto run = flipnerf::run_schedule(ds->ds, sched, cfg);
    flipnerf::save_run(run, out_dir);
  });
}

fn_status fn_run_open(const char* run_dir, fn_run** out) {
  return guarded([&] {
    require(run_dir && out, "run_dir and out are required");
    *out = nullptr;
    *out = new fn_run{flipnerf::load_run(run_dir)};
  });
}

void fn_run_close(fn_run* run) { delete run; }

fn_status fn_run_observation_count(const fn_run* run, int* count) {
  return guarded([&] {
    require(run && count, "run and count are required");
    *count = static_cast<int>(run->run.poses.size());
  });
}

fn_status fn_eval(fn_run* run, const fn_dataset* ds, fn_split split, const char* out_csv, fn_eval_summary* summary) {
  return guarded([&] {
    require(run && ds && out_csv, "run, dataset and out_csv are required");
    const auto report = flipnerf::evaluate(run->run, ds->ds, to_split(split));
    flipnerf::write_report(report, run->run, out_csv);
    if (summary) {
      summary->views = static_cast<int>(report.views.size());
      summary->mean_psnr_db = report.mean_psnr;
      summary->mean_ssim = report.mean_ssim;
    }
  });
}

fn_status fn_render(fn_run* run, int pose_index, const char* rgb_png, const char* variance_png) {
  return guarded([&] {
    require(run && rgb_png, "run and rgb_png are required");
    flipnerf::render_run_view(run->run, pose_index, rgb_png, variance_png ? fs::path(variance_png) : fs::path());
  });
}

}  // extern "C"
