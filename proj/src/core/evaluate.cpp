// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flipnerf/error.hpp"
#include "flipnerf/metrics.hpp"

namespace flipnerf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedTransforms, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
}

void save_manifest(const LoadedRun& run) {
  write_text(run.dir / "manifest.json", run.manifest.dump(2) + "\n");
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

LoadedRun load_run(const fs::path& dir) {
  LoadedRun run;
  run.dir = dir;
  run.manifest = read_json(dir / "manifest.json");
  try {
    run.config = config_from_json(run.manifest.at("config"));
    run.config_n = run.manifest.at("config_n").get<int>();
    for (const auto& o : run.manifest.at("observations")) {
      run.poses.push_back(pose_from_json(o.at("final_pose")));
      const auto& in = o.at("intrinsics");
      CameraIntrinsics intr;
      intr.width = in.at("width").get<int>();
      intr.height = in.at("height").get<int>();
      intr.focal = in.at("focal").get<double>();
      intr.cx = in.at("cx").get<double>();
      intr.cy = in.at("cy").get<double>();
      run.intrinsics.push_back(intr);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedTransforms, (dir / "manifest.json").string() + ": " + e.what());
  }
  run.field = load_checkpoint(dir / run.manifest.value("checkpoint", std::string("field.ckpt")));
  return run;
}

MetricsReport evaluate(const LoadedRun& run, const Dataset& ds, Split split) {
  const auto views = views_for(ds, split, run.config_n);
  if (views.empty()) {
    throw Error(ErrorKind::EmptySplit, std::string("split '") + to_string(split) + "' has no views");
  }
  MetricsReport report;
  report.mode = run.manifest.value("mode", std::string(to_string(run.config.mode)));
  report.config_n = run.config_n;
  report.split = split;
  report.wall_s = run.manifest.value("wall_clock_s", 0.0);
  report.views.resize(views.size());
  const RenderConfig rc = run.config.render_config(false);
  for (size_t i = 0; i < views.size(); ++i) {
    const View& v = views[i];
    const RenderedImage r = render_image(run.field, v.pose, v.intr, rc);
    ViewMetrics& m = report.views[i];
    m.view_id = static_cast<int>(i);
    m.file_path = v.file_path;
    m.psnr_db = psnr(r.rgb, v.image);
    m.ssim = ssim(r.rgb, v.image);
  }
  for (const auto& m : report.views) {
    report.mean_psnr += m.psnr_db;
    report.mean_ssim += m.ssim;
  }
  report.mean_psnr /= static_cast<double>(report.views.size());
  report.mean_ssim /= static_cast<double>(report.views.size());
  return report;
}

std::string metrics_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << "mode,config_n,view_id,psnr_db,ssim,wall_s,lpips\n";
  for (const auto& m : report.views) {
    os << report.mode << ',' << report.config_n << ',' << m.view_id << ',' << fmt(m.psnr_db, 6) << ','
       << fmt(m.ssim, 6) << ',' << fmt(report.wall_s, 3) << ",\n";
  }
  return os.str();
}

json metrics_json(const MetricsReport& report) {
  json rows = json::array();
  for (const auto& m : report.views) {
    rows.push_back({{"view_id", m.view_id}, {"file_path", m.file_path}, {"psnr_db", m.psnr_db}, {"ssim", m.ssim}});
  }
  return json{{"mode", report.mode},
              {"config_n", report.config_n},
              {"split", to_string(report.split)},
              {"wall_s", report.wall_s},
              {"mean_psnr_db", report.mean_psnr},
              {"mean_ssim", report.mean_ssim},
              {"views", rows},
              {"notes",
               {"ssim is single-scale on luma Y = 0.299R + 0.587G + 0.114B, 11x11 Gaussian window, sigma 1.5",
                "psnr is capped at 99 dB",
                "lpips is left empty: it needs a pretrained perceptual network",
                "wall_s is the training wall clock recorded in the run manifest"}}};
}

void write_report(const MetricsReport& report, LoadedRun& run, const fs::path& csv_path) {
  write_text(csv_path, metrics_csv(report));
  fs::path side = csv_path;
  side.replace_extension(".json");
  const json j = metrics_json(report);
  write_text(side, j.dump(2) + "\n");
  json entry = {{"split", to_string(report.split)},
                {"csv", fs::absolute(csv_path).string()},
                {"mean_psnr_db", report.mean_psnr},
                {"mean_ssim", report.mean_ssim}};
  run.manifest["evaluations"][to_string(report.split)] = entry;
  save_manifest(run);
}

RenderedImage render_run_view(LoadedRun& run, int k, const fs::path& rgb_path, const fs::path& variance_path) {
  if (k < 0 || static_cast<size_t>(k) >= run.poses.size()) {
    throw Error(ErrorKind::InvalidArgument, "pose index " + std::to_string(k) + " out of range [0, " +
                                                std::to_string(run.poses.size()) + ")");
  }
  const auto uk = static_cast<size_t>(k);
  RenderedImage r = render_image(run.field, run.poses[uk], run.intrinsics[uk], run.config.render_config(false));
  write_png(rgb_path, r.rgb);
  json entry = {{"pose_index", k}, {"rgb", fs::absolute(rgb_path).string()}};
  if (!variance_path.empty()) {
    const double vmax = *std::max_element(r.variance.data.begin(), r.variance.data.end());
    const double scale = vmax > 0.0 ? 1.0 / vmax : 1.0;
    Image scaled = r.variance;
    for (auto& x : scaled.data) x *= scale;
    write_png(variance_path, scaled);
    entry["variance"] = fs::absolute(variance_path).string();
    entry["variance_normalization"] = {{"formula", "pixel = variance * scale + offset"},
                                       {"scale", scale},
                                       {"offset", 0.0}};
  }
  run.manifest["renders"][std::to_string(k)] = entry;
  save_manifest(run);
  return r;
}

}  // namespace flipnerf
