// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flipnerf/field.hpp"
#include "flipnerf/geometry.hpp"
#include "flipnerf/image.hpp"

namespace flipnerf {

/// Pinhole intrinsics in pixels. Pixel (u, v) is sampled through its center
/// (u + 0.5, v + 0.5); image rows grow downward and the camera looks along -z.
struct CameraIntrinsics {
  int width = 0;
  int height = 0;
  double focal = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = -Vec3::UnitZ();
  double t_near = 2.0;
  double t_far = 6.0;
};

/// Unit camera-frame direction through pixel (u, v).
Vec3 camera_direction(const CameraIntrinsics& intr, int u, int v);

Ray pixel_ray(const Pose& pose, const CameraIntrinsics& intr, int u, int v,
              double t_near = 2.0, double t_far = 6.0);

struct RayDepths {
  std::vector<double> t;
  std::vector<double> delta;
};

/// Midpoints of n equal bins, or one jitter per bin drawn from a counter-based
/// generator keyed by (seed, ray_id). The last segment runs to t_far.
RayDepths sample_ray(const Ray& ray, int n, bool stratified, std::uint64_t seed, std::uint64_t ray_id);

struct RaySample {
  double t = 0.0;
  double delta = 0.0;
  FieldSample sample;
};

enum class VarianceWeighting {
  Squared,  // sum w_i^2 var_i: independent per-sample Gaussians
  Linear,   // sum w_i var_i
};

struct RenderOutput {
  Vec3 color = Vec3::Zero();
  double variance = 0.0;
  double transmittance = 1.0;  // residual after the last sample
  std::vector<double> weights;
};

RenderOutput composite(std::span<const RaySample> samples,
                       VarianceWeighting weighting = VarianceWeighting::Squared);

struct CompositeGrad {
  std::vector<double> density;
  std::vector<Vec3> color;
  std::vector<double> variance;
  std::vector<double> delta;
  std::vector<double> t;  // through delta_i = t_{i+1} - t_i and delta_last = t_far - t_last
};

/// Exact derivatives of composite(). d_transmittance is the upstream
/// derivative w.r.t. the residual transmittance (background terms use it).
CompositeGrad composite_grad(std::span<const RaySample> samples, const Vec3& d_color, double d_variance,
                             double d_transmittance = 0.0,
                             VarianceWeighting weighting = VarianceWeighting::Squared);

struct RenderConfig {
  int n_samples = 128;
  double t_near = 2.0;
  double t_far = 6.0;
  bool stratified = false;
  std::uint64_t seed = 0;
  Vec3 background = Vec3::Ones();
  double beta_min_sq = 0.01;
  VarianceWeighting weighting = VarianceWeighting::Squared;
};

/// Forward pass for one ray: samples, field queries, composite.
RenderOutput render_ray(const FieldParams& field, const Ray& ray, const RenderConfig& cfg,
                        std::uint64_t ray_id, std::vector<RaySample>* samples_out = nullptr);

struct RenderedImage {
  Image rgb;       // composited over the background
  Image variance;  // single channel
};

RenderedImage render_image(const FieldParams& field, const Pose& pose, const CameraIntrinsics& intr,
                           const RenderConfig& cfg);

}  // namespace flipnerf
