// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flipnerf/geometry.hpp"
#include "flipnerf/image.hpp"
#include "flipnerf/renderer.hpp"
#include "flipnerf/scene.hpp"

namespace flipnerf {

enum class Split { Train, Test, Upper };

const char* to_string(Split s);
Split parse_split(std::string_view s);

/// One training or evaluation image with its camera.
struct Observation {
  Image image;
  Pose pose;
  CameraIntrinsics intr;
  bool is_flipped = false;
  bool pose_trainable = false;
  std::string label;
};

struct View {
  std::string file_path;  // as written in the transforms file
  Image image;
  Pose pose;  // normalized scene coordinates
  CameraIntrinsics intr;
};

/// Maps source coordinates into the field box: p' = scale * (p - offset).
struct SceneNormalization {
  double scale = 1.0;
  Vec3 offset = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (p - offset); }
  Vec3 undo(const Vec3& p) const { return p / scale + offset; }
  Pose apply(const Pose& p) const { return {p.rotation, apply(p.translation)}; }
  Pose undo(const Pose& p) const { return {p.rotation, undo(p.translation)}; }
  Plane apply(const Plane& pl) const { return {pl.normal, scale * (pl.offset - pl.normal.dot(offset))}; }
};

struct Dataset {
  std::filesystem::path root;
  std::vector<View> train;
  std::vector<View> test;
  std::vector<View> upper;
  double camera_angle_x = 0.0;
  SceneNormalization normalization;
  /// Mirror plane declared by a generated scene (normalized coordinates).
  std::optional<Plane> declared_mirror;
  std::string scene_name;
  /// Config whose unobserved arc the test/upper files were generated for.
  std::optional<int> arc_config_n;

  const std::vector<View>& split(Split s) const;
};

/// Cameras are rescaled about the origin so their centers fit within this radius.
inline constexpr double kNormalizedCameraRadius = 4.0;

/// Reads transforms_train.json (required) plus transforms_test.json and
/// transforms_upper.json when present, with the images they reference.
Dataset load_nerf_synthetic(const std::filesystem::path& dir);

double focal_from_angle(int width, double camera_angle_x);

struct TransformsFrame {
  std::string file_path;
  Pose pose;
};

void write_transforms(const std::filesystem::path& path, double camera_angle_x,
                      const std::vector<TransformsFrame>& frames);

/// One dataset configuration: 8 consecutive ring indices starting at
/// 2n - 1, wrapping modulo 16. Indices are 1-based.
struct DatasetConfig {
  int n = 1;
  std::vector<int> indices;

  std::vector<int> zero_based() const;
};

inline constexpr int kRingSize = 16;
inline constexpr int kConfigCount = 8;
inline constexpr int kViewsPerConfig = 8;

DatasetConfig make_config(int n);
std::vector<DatasetConfig> make_configs(std::size_t ring_count);

/// Mirrors the image and the principal point; the pose is left for
/// estimate_flipped_poses to fill in.
Observation flip_observation(const Observation& obs);

struct RingSpec {
  int count = kRingSize;
  double radius = 4.0;
  double height = 0.0;
  int size = 64;
  double camera_angle_x = 0.6911112070083618;
  /// Azimuth of ring view 0; a quarter of the spacing keeps no view on the mirror plane.
  double phase_deg = 5.625;
};

/// Camera-to-world pose on the ring looking at the origin.
Pose ring_pose(const RingSpec& ring, int index);

/// Renders the ring (train), the arc opposite config 1 (test) and the
/// ground-truth views nearest to that arc (upper), writes PNGs, transforms
/// files and scene.json under dir, and returns the dataset as the loader
/// would see it.
Dataset generate_synthetic_dataset(const SyntheticScene& scene, const RingSpec& ring,
                                   const std::filesystem::path& dir);

/// Views evaluated or trained on for a split under config n: train is the
/// config's inputs; test and upper come from their files when these were
/// generated for config n, otherwise from the ring views opposite the inputs.
std::vector<View> views_for(const Dataset& ds, Split split, int config_n);

}  // namespace flipnerf
