// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "flipnerf/error.hpp"
#include "flipnerf/parallel.hpp"

namespace flipnerf {

namespace {

const std::array<Vec3, 7> kPalette = {
    Vec3(0.85, 0.20, 0.15), Vec3(0.95, 0.80, 0.20), Vec3(0.20, 0.55, 0.85), Vec3(0.15, 0.70, 0.30),
    Vec3(0.60, 0.25, 0.70), Vec3(0.95, 0.55, 0.15), Vec3(0.10, 0.15, 0.30),
};

std::optional<double> hit_sphere(const SpherePrimitive& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double t0 = -b - root;
  if (t0 > 0.0) return t0;
  const double t1 = -b + root;
  if (t1 > 0.0) return t1;
  return std::nullopt;
}

std::optional<double> hit_box(const BoxPrimitive& box, const Vec3& o, const Vec3& d) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < box.lo[a] || o[a] > box.hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.lo[a] - o[a]) / d[a];
    double t1 = (box.hi[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
  }
  if (tmax < tmin || tmax <= 0.0) return std::nullopt;
  return tmin > 0.0 ? tmin : tmax;
}

}  // namespace

Vec3 SyntheticScene::color_at(const Vec3& x) const {
  constexpr double kStripe = M_PI / 6.0;
  const int band = static_cast<int>(std::floor((x.z() + 1.0) / 0.25));
  int stripe = 0;
  if (pattern == ScenePattern::Mirrored) {
    // atan2(|y|, x) is identical for x and its mirror image across y = 0.
    const double az = std::atan2(std::abs(x.y()), x.x());
    stripe = std::min(5, static_cast<int>(std::floor(az / kStripe)));
  } else {
    const double az = std::atan2(x.y(), x.x()) + M_PI;
    stripe = std::min(11, static_cast<int>(std::floor(az / kStripe)));
  }
  const int idx = ((stripe + 2 * band) % 7 + 7) % 7;
  return kPalette[static_cast<size_t>(idx)];
}

std::optional<double> SyntheticScene::intersect(const Vec3& origin, const Vec3& dir) const {
  std::optional<double> best;
  for (const auto& s : spheres) {
    if (auto t = hit_sphere(s, origin, dir); t && (!best || *t < *best)) best = t;
  }
  for (const auto& b : boxes) {
    if (auto t = hit_box(b, origin, dir); t && (!best || *t < *best)) best = t;
  }
  return best;
}

SyntheticScene make_scene(std::string_view name) {
  SyntheticScene scene;
  scene.name = std::string(name);
  // Both layouts are symmetric about y = 0 in shape; only the albedo differs.
  scene.spheres.push_back({Vec3(0.0, 0.0, 0.15), 0.55});
  scene.boxes.push_back({Vec3(-0.25, -0.3, -0.8), Vec3(0.75, 0.3, -0.35)});
  scene.mirror = Plane{Vec3::UnitY(), 0.0};
  if (name == "sphere-checker") {
    scene.pattern = ScenePattern::Mirrored;
  } else if (name == "sphere-asym") {
    scene.pattern = ScenePattern::Asymmetric;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown scene '" + std::string(name) +
                                                "' (expected sphere-checker or sphere-asym)");
  }
  return scene;
}

Image synth_scene_render(const SyntheticScene& scene, const Pose& pose, const CameraIntrinsics& intr) {
  intr.validate();
  Image img(intr.width, intr.height, 3);
  parallel_for(static_cast<size_t>(intr.height), [&](size_t begin, size_t end) {
    for (size_t vv = begin; vv < end; ++vv) {
      const int v = static_cast<int>(vv);
      for (int u = 0; u < intr.width; ++u) {
        const Ray ray = pixel_ray(pose, intr, u, v);
        const auto t = scene.intersect(ray.origin, ray.direction);
        const Vec3 c = t ? scene.color_at(ray.origin + *t * ray.direction) : scene.background;
        for (int ch = 0; ch < 3; ++ch) img.at(u, v, ch) = c[ch];
      }
    }
  });
  return img;
}

}  // namespace flipnerf
