// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flipnerf/geometry.hpp"
#include "flipnerf/image.hpp"
#include "flipnerf/renderer.hpp"

namespace flipnerf {

struct SpherePrimitive {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct BoxPrimitive {
  Vec3 lo = Vec3::Constant(-0.5);
  Vec3 hi = Vec3::Constant(0.5);
};

enum class ScenePattern {
  Mirrored,    // color depends on |y| only through the mirror-invariant azimuth
  Asymmetric,  // signed azimuth: the two halves disagree
};

/// Analytic oracle scene made of spheres and axis-aligned boxes with a
/// position-based albedo.
struct SyntheticScene {
  std::string name;
  std::vector<SpherePrimitive> spheres;
  std::vector<BoxPrimitive> boxes;
  ScenePattern pattern = ScenePattern::Mirrored;
  Plane mirror{Vec3::UnitY(), 0.0};
  Vec3 background = Vec3::Ones();

  Vec3 color_at(const Vec3& x) const;
  /// Nearest hit distance along the ray with t > 0, if any.
  std::optional<double> intersect(const Vec3& origin, const Vec3& dir) const;
};

/// "sphere-checker" (mirror-symmetric about the xz-plane) or "sphere-asym".
SyntheticScene make_scene(std::string_view name);

/// Per-pixel analytic ray cast through pixel_ray(); background where nothing is hit.
Image synth_scene_render(const SyntheticScene& scene, const Pose& pose, const CameraIntrinsics& intr);

}  // namespace flipnerf
