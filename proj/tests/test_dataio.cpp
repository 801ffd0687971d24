// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "flipnerf/dataio.hpp"
#include "flipnerf/error.hpp"
#include "flipnerf/image.hpp"
#include "flipnerf/scene.hpp"
#include "support.hpp"

using namespace flipnerf;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace

TEST_CASE("focal length from the horizontal field of view") {
  CHECK(focal_from_angle(800, 0.6911112070083618) == doctest::Approx(1111.1110311937682).epsilon(1e-12));
  CHECK(focal_from_angle(2, M_PI / 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dataset configurations") {
  CHECK(make_config(1).indices == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(make_config(2).indices == std::vector<int>{3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(make_config(8).indices == std::vector<int>{15, 16, 1, 2, 3, 4, 5, 6});
  CHECK(make_config(8).zero_based() == std::vector<int>{14, 15, 0, 1, 2, 3, 4, 5});
  const auto all = make_configs(16);
  REQUIRE(all.size() == 8);
  for (size_t k = 0; k < all.size(); ++k) CHECK(all[k].n == static_cast<int>(k) + 1);
  CHECK(kind_of([] { make_configs(15); }) == ErrorKind::WrongCount);
  CHECK(kind_of([] { make_config(0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { make_config(9); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("flipping an observation") {
  Observation obs;
  obs.image = Image(3, 2, 3);
  for (size_t i = 0; i < obs.image.data.size(); ++i) obs.image.data[i] = static_cast<double>(i) / 17.0;
  obs.intr = {3, 2, 5.0, 1.2, 1.0};
  obs.label = "ring_00";
  const Observation f = flip_observation(obs);
  CHECK(f.intr.cx == doctest::Approx(1.8));
  CHECK(f.intr.cy == 1.0);
  CHECK(f.is_flipped);
  CHECK(f.pose_trainable);
  CHECK(f.label == "ring_00_flipped");
  for (int v = 0; v < 2; ++v) {
    for (int u = 0; u < 3; ++u) {
      for (int c = 0; c < 3; ++c) CHECK(f.image.at(u, v, c) == obs.image.at(2 - u, v, c));
    }
  }
  CHECK(mirror_horizontal(mirror_horizontal(obs.image)) == obs.image);
  CHECK(kind_of([&] { flip_observation(f); }) == ErrorKind::AlreadyFlipped);
}

TEST_CASE("PNG round trip") {
  const fs::path dir = flipnerf::testing::scratch_dir("png");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image rgb(7, 5, 3);
  for (double& x : rgb.data) x = u(rng);
  const Image q = quantize_8bit(rgb);
  write_png(dir / "a.png", q);
  CHECK(read_png(dir / "a.png") == q);
  CHECK(max_abs_diff(q, rgb) <= 0.5 / 255 + 1e-12);

  Image gray(4, 4, 1, 0.5);
  write_png(dir / "g.png", gray);
  const Image g = read_png(dir / "g.png");
  CHECK(g.channels == 3);
  CHECK(g.at(3, 3, 2) == doctest::Approx(128.0 / 255));

  CHECK(kind_of([&] { read_png(dir / "missing.png"); }) == ErrorKind::MissingFile);
  write_text(dir / "junk.png", "not a png");
  CHECK(kind_of([&] { read_png(dir / "junk.png"); }) == ErrorKind::ImageDecodeError);
}

TEST_CASE("loader rejects malformed inputs") {
  const fs::path dir = flipnerf::testing::scratch_dir("loader");
  CHECK(kind_of([&] { load_nerf_synthetic(dir); }) == ErrorKind::MissingFile);

  write_text(dir / "transforms_train.json", "{ not json");
  CHECK(kind_of([&] { load_nerf_synthetic(dir); }) == ErrorKind::MalformedTransforms);

  write_text(dir / "transforms_train.json", R"({"frames": []})");
  CHECK(kind_of([&] { load_nerf_synthetic(dir); }) == ErrorKind::MalformedTransforms);

  write_text(dir / "transforms_train.json",
             R"({"camera_angle_x": 0.7, "frames": [{"file_path": "./train/r_0", "transform_matrix": [[1,0,0],[0,1,0],[0,0,1]]}]})");
  CHECK(kind_of([&] { load_nerf_synthetic(dir); }) == ErrorKind::MalformedTransforms);

  write_text(dir / "transforms_train.json",
             R"({"camera_angle_x": 0.7, "frames": [{"file_path": "./train/r_0", "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,4],[0,0,0,1]]}]})");
  CHECK(kind_of([&] { load_nerf_synthetic(dir); }) == ErrorKind::MissingFile);

  fs::create_directories(dir / "train");
  write_png(dir / "train" / "r_0.png", Image(4, 4, 3, 0.25));
  const Dataset ds = load_nerf_synthetic(dir);
  REQUIRE(ds.train.size() == 1);
  CHECK(ds.test.empty());
  CHECK(ds.train[0].intr.width == 4);
  CHECK(ds.train[0].intr.cx == 2.0);
  CHECK(kind_of([&] { views_for(ds, Split::Train, 1); }) == ErrorKind::WrongCount);
}

TEST_CASE("synthetic scenes") {
  const SyntheticScene sym = make_scene("sphere-checker");
  const SyntheticScene asym = make_scene("sphere-asym");
  std::mt19937_64 rng(6);
  int disagree = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vec3 x = flipnerf::testing::random_unit(rng) * 0.9;
    const Vec3 m = reflect_across_plane(x, sym.mirror);
    CHECK(sym.color_at(x) == sym.color_at(m));
    CHECK(sym.intersect(Vec3(0, 0, 4), (x - Vec3(0, 0, 4)).normalized()).has_value() ==
          sym.intersect(Vec3(0, 0, 4), (m - Vec3(0, 0, 4)).normalized()).has_value());
    disagree += asym.color_at(x) != asym.color_at(m);
  }
  CHECK(disagree > 500);
  CHECK(kind_of([] { make_scene("teapot"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("flipped renders of a mirror-symmetric scene match the rendered flipped pose") {
  const SyntheticScene scene = make_scene("sphere-checker");
  RingSpec ring;
  std::vector<Pose> poses;
  for (int i = 0; i < kRingSize; ++i) poses.push_back(ring_pose(ring, i));
  const auto flipped = estimate_flipped_poses(poses, scene.mirror);
  const double f = focal_from_angle(32, ring.camera_angle_x);
  for (int i = 0; i < kRingSize; i += 3) {
    Observation obs;
    obs.intr = {32, 32, f, 16.0, 16.0};
    obs.image = quantize_8bit(synth_scene_render(scene, poses[static_cast<size_t>(i)], obs.intr));
    const Observation fo = flip_observation(obs);
    const Image truth = quantize_8bit(synth_scene_render(scene, flipped[static_cast<size_t>(i)], fo.intr));
    CHECK(max_abs_diff(fo.image, truth) <= 2.0 / 255);
  }
}

TEST_CASE("generated dataset round-trips through the loader") {
  const fs::path dir = flipnerf::testing::scratch_dir("synth");
  RingSpec ring;
  ring.size = 16;
  const Dataset gen = generate_synthetic_dataset(make_scene("sphere-asym"), ring, dir);
  const Dataset ds = load_nerf_synthetic(dir);
  REQUIRE(ds.train.size() == 16);
  REQUIRE(ds.test.size() == 8);
  REQUIRE(ds.upper.size() == 8);
  CHECK(ds.scene_name == "sphere-asym");
  CHECK(ds.arc_config_n == 1);
  REQUIRE(ds.declared_mirror.has_value());
  for (size_t i = 0; i < ds.train.size(); ++i) {
    CHECK(ds.train[i].image == gen.train[i].image);
    CHECK((ds.train[i].pose.translation - gen.train[i].pose.translation).norm() <= 1e-9);
    CHECK((ds.train[i].pose.rotation - gen.train[i].pose.rotation).norm() <= 1e-9);
    CHECK(ds.train[i].pose.translation.norm() <= kNormalizedCameraRadius + 1e-9);
  }
  // Config 1's held-out arc is the file split; other configs use the opposite ring views.
  CHECK(views_for(ds, Split::Test, 1).front().file_path == ds.test.front().file_path);
  const auto test3 = views_for(ds, Split::Test, 3);
  REQUIRE(test3.size() == 8);
  CHECK(test3.front().file_path == ds.train[12].file_path);
  const auto train8 = views_for(ds, Split::Train, 8);
  CHECK(train8.front().file_path == ds.train[14].file_path);
  CHECK(parse_split("upper") == Split::Upper);
  CHECK(kind_of([] { parse_split("val"); }) == ErrorKind::InvalidArgument);
}
