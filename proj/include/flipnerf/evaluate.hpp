// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "flipnerf/dataio.hpp"
#include "flipnerf/field.hpp"
#include "flipnerf/renderer.hpp"
#include "flipnerf/trainer.hpp"

namespace flipnerf {

/// A trained run read back from disk.
struct LoadedRun {
  std::filesystem::path dir;
  nlohmann::json manifest;
  TrainConfig config;
  FieldParams field;
  int config_n = 1;
  std::vector<Pose> poses;  // final pose of each training observation
  std::vector<CameraIntrinsics> intrinsics;
};

LoadedRun load_run(const std::filesystem::path& dir);

struct ViewMetrics {
  int view_id = 0;
  std::string file_path;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricsReport {
  std::string mode;
  int config_n = 1;
  Split split = Split::Test;
  double wall_s = 0.0;  // training wall clock of the run
  std::vector<ViewMetrics> views;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

/// Renders every view of the split with midpoint sampling and scores it.
MetricsReport evaluate(const LoadedRun& run, const Dataset& ds, Split split);

/// Fixed-schema CSV: mode,config_n,view_id,psnr_db,ssim,wall_s,lpips.
std::string metrics_csv(const MetricsReport& report);
nlohmann::json metrics_json(const MetricsReport& report);

/// Writes the CSV, a JSON summary next to it (same stem, .json), and an
/// "evaluations" entry in the run manifest.
void write_report(const MetricsReport& report, LoadedRun& run, const std::filesystem::path& csv_path);

/// Renders training observation k of the run. Writes the RGB PNG and, when
/// variance_path is non-empty, the variance map scaled by its maximum; the
/// scaling is stored under "renders" in the run manifest.
RenderedImage render_run_view(LoadedRun& run, int k, const std::filesystem::path& rgb_path,
                              const std::filesystem::path& variance_path);

}  // namespace flipnerf
