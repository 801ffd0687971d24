// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "flipnerf/error.hpp"
#include "flipnerf/evaluate.hpp"
#include "flipnerf/metrics.hpp"
#include "flipnerf/trainer.hpp"
#include "support.hpp"

using namespace flipnerf;
namespace fs = std::filesystem;

namespace {

Image random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h, 3);
  for (double& x : img.data) x = u(rng);
  return img;
}

Image add_noise(const Image& img, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, sd);
  Image out = img;
  for (double& x : out.data) x = std::clamp(x + n(rng), 0.0, 1.0);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("psnr examples") {
  Image a(2, 1, 3, 0.5);
  CHECK(psnr(a, a) == kPsnrCap);
  Image b(2, 1, 3, 0.6);
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
  Image c = a;
  for (int ch = 0; ch < 3; ++ch) c.at(0, 0, ch) = 0.7;
  CHECK(psnr(a, c) == doctest::Approx(16.989700043360187).epsilon(1e-9));
  CHECK_THROWS_AS(psnr(a, Image(1, 2, 3)), Error);
}

TEST_CASE("psnr is symmetric and falls as noise grows") {
  std::mt19937_64 rng(7);
  const Image img = random_image(rng, 16, 16);
  double last = kPsnrCap;
  for (double sd : {0.01, 0.03, 0.1, 0.3}) {
    const Image noisy = add_noise(img, sd, rng);
    CHECK(psnr(img, noisy) == psnr(noisy, img));
    CHECK(psnr(img, noisy) < last);
    last = psnr(img, noisy);
  }
}

TEST_CASE("ssim examples") {
  std::mt19937_64 rng(8);
  const Image img = random_image(rng, 16, 13);
  CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
  const double c1 = 1e-4;
  CHECK(ssim(Image(12, 12, 3, 0.0), Image(12, 12, 3, 1.0)) == doctest::Approx(c1 / (1 + c1)).epsilon(1e-9));
  const Image noisy = add_noise(img, 0.1, rng);
  CHECK(ssim(img, noisy) == doctest::Approx(ssim(noisy, img)).epsilon(1e-12));
  CHECK(ssim(img, noisy) < ssim(img, add_noise(img, 0.02, rng)));
  CHECK(ssim(img, noisy) < 1.0);

  try {
    ssim(Image(10, 20, 3), Image(10, 20, 3));
    FAIL("expected ImageTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ImageTooSmall);
  }
  try {
    ssim(Image(12, 12, 3), Image(13, 12, 3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("evaluation of a saved run is deterministic") {
  const fs::path root = flipnerf::testing::scratch_dir("eval");
  RingSpec ring;
  ring.size = 12;
  const Dataset ds = generate_synthetic_dataset(make_scene("sphere-checker"), ring, root / "data");

  TrainConfig cfg;
  cfg.mode = Mode::Flip;
  cfg.grid_resolution = 6;
  cfg.n_samples = 8;
  cfg.rays_per_batch = 32;
  cfg.total_iters = 4;
  cfg.warmup_iters = 2;
  cfg.log_every = 2;
  ScheduleOptions opts;
  const RunResult run = run_schedule(ds, opts, cfg);
  save_run(run, root / "run");

  LoadedRun loaded = load_run(root / "run");
  CHECK(loaded.config_n == 1);
  CHECK(loaded.poses.size() == 16);
  CHECK(loaded.field.data() == run.state.field.data());

  const MetricsReport a = evaluate(loaded, ds, Split::Test);
  const MetricsReport b = evaluate(load_run(root / "run"), ds, Split::Test);
  CHECK(metrics_csv(a) == metrics_csv(b));
  REQUIRE(a.views.size() == 8);
  double sum = 0.0;
  for (const auto& v : a.views) sum += v.psnr_db;
  CHECK(a.mean_psnr == doctest::Approx(sum / 8).epsilon(1e-12));
  CHECK(a.mode == "flip");

  const std::string csv = metrics_csv(a);
  CHECK(csv.rfind("mode,config_n,view_id,psnr_db,ssim,wall_s,lpips\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);

  write_report(a, loaded, root / "metrics.csv");
  CHECK(slurp(root / "metrics.csv") == csv);
  const auto summary = nlohmann::json::parse(slurp(root / "metrics.json"));
  CHECK(summary.at("views").size() == 8);
  const auto manifest = nlohmann::json::parse(slurp(root / "run" / "manifest.json"));
  CHECK(manifest.at("evaluations").contains("test"));

  const RenderedImage r = render_run_view(loaded, 0, root / "rgb.png", root / "var.png");
  CHECK(fs::exists(root / "rgb.png"));
  CHECK(fs::exists(root / "var.png"));
  CHECK(r.rgb.width == 12);
}
