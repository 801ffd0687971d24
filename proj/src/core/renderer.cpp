// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/renderer.hpp"

#include <cmath>
#include <string>

#include "flipnerf/error.hpp"
#include "flipnerf/parallel.hpp"
#include "flipnerf/rng.hpp"

namespace flipnerf {

void CameraIntrinsics::validate() const {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "image size must be positive");
  if (!(focal > 0.0)) throw Error(ErrorKind::InvalidArgument, "focal length must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorKind::InvalidArgument, "principal point outside the image");
  }
}

Vec3 camera_direction(const CameraIntrinsics& intr, int u, int v) {
  const Vec3 d((u + 0.5 - intr.cx) / intr.focal, -(v + 0.5 - intr.cy) / intr.focal, -1.0);
  return d.normalized();
}

Ray pixel_ray(const Pose& pose, const CameraIntrinsics& intr, int u, int v, double t_near, double t_far) {
  if (u < 0 || u >= intr.width || v < 0 || v >= intr.height) {
    throw Error(ErrorKind::PixelOutOfRange, "pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                                                ") outside " + std::to_string(intr.width) + "x" +
                                                std::to_string(intr.height));
  }
  Ray r;
  r.origin = pose.translation;
  r.direction = (pose.rotation * camera_direction(intr, u, v)).normalized();
  r.t_near = t_near;
  r.t_far = t_far;
  return r;
}

RayDepths sample_ray(const Ray& ray, int n, bool stratified, std::uint64_t seed, std::uint64_t ray_id) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample per ray");
  RayDepths out;
  out.t.resize(static_cast<size_t>(n));
  out.delta.resize(static_cast<size_t>(n));
  const double h = (ray.t_far - ray.t_near) / n;
  const CounterRng rng{seed};
  for (int i = 0; i < n; ++i) {
    const double u = stratified
                         ? rng.uniform(CounterRng::mix(ray_id) ^ kStreamJitter, static_cast<std::uint64_t>(i))
                         : 0.5;
    out.t[static_cast<size_t>(i)] = ray.t_near + (i + u) * h;
  }
  for (int i = 0; i + 1 < n; ++i) {
    out.delta[static_cast<size_t>(i)] = out.t[static_cast<size_t>(i + 1)] - out.t[static_cast<size_t>(i)];
  }
  out.delta.back() = ray.t_far - out.t.back();
  return out;
}

RenderOutput composite(std::span<const RaySample> samples, VarianceWeighting weighting) {
  RenderOutput out;
  out.weights.resize(samples.size());
  double trans = 1.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const double tau = s.sample.density * s.delta;
    const double alpha = -std::expm1(-tau);
    const double w = trans * alpha;
    out.weights[i] = w;
    out.color += w * s.sample.color;
    out.variance += (weighting == VarianceWeighting::Squared ? w * w : w) * s.sample.variance;
    trans *= std::exp(-tau);
  }
  out.transmittance = trans;
  return out;
}

CompositeGrad composite_grad(std::span<const RaySample> samples, const Vec3& d_color, double d_variance,
                             double d_transmittance, VarianceWeighting weighting) {
  const size_t n = samples.size();
  CompositeGrad g;
  g.density.assign(n, 0.0);
  g.color.assign(n, Vec3::Zero());
  g.variance.assign(n, 0.0);
  g.delta.assign(n, 0.0);
  g.t.assign(n, 0.0);
  if (n == 0) return g;

  // Forward quantities: T_i before sample i, T_{i+1} after it, and w_i.
  std::vector<double> t_after(n);
  std::vector<double> w(n);
  double trans = 1.0;
  for (size_t i = 0; i < n; ++i) {
    const double tau = samples[i].sample.density * samples[i].delta;
    w[i] = trans * -std::expm1(-tau);
    trans *= std::exp(-tau);
    t_after[i] = trans;
  }
  const double t_final = trans;
  const bool squared = weighting == VarianceWeighting::Squared;

  // dw_k/dtau_i = T_{i+1} for k = i, -w_k for k > i, 0 for k < i.
  Vec3 suffix_color = Vec3::Zero();
  double suffix_var = 0.0;
  for (size_t r = n; r-- > 0;) {
    const auto& s = samples[r];
    const double dvar_dw = squared ? 2.0 * w[r] * s.sample.variance : s.sample.variance;
    const double dvar_dtau = squared ? dvar_dw * t_after[r] - 2.0 * suffix_var
                                     : dvar_dw * t_after[r] - suffix_var;
    const double g_tau = d_color.dot(t_after[r] * s.sample.color - suffix_color) +
                         d_variance * dvar_dtau - d_transmittance * t_final;
    g.density[r] = g_tau * s.delta;
    g.delta[r] = g_tau * s.sample.density;
    g.color[r] = w[r] * d_color;
    g.variance[r] = (squared ? w[r] * w[r] : w[r]) * d_variance;
    suffix_color += w[r] * s.sample.color;
    suffix_var += (squared ? w[r] * w[r] : w[r]) * s.sample.variance;
  }
  for (size_t i = 0; i < n; ++i) {
    g.t[i] = -g.delta[i] + (i > 0 ? g.delta[i - 1] : 0.0);
  }
  return g;
}

RenderOutput render_ray(const FieldParams& field, const Ray& ray, const RenderConfig& cfg,
                        std::uint64_t ray_id, std::vector<RaySample>* samples_out) {
  const RayDepths depths = sample_ray(ray, cfg.n_samples, cfg.stratified, cfg.seed, ray_id);
  std::vector<RaySample> local;
  std::vector<RaySample>& samples = samples_out ? *samples_out : local;
  samples.resize(depths.t.size());
  for (size_t i = 0; i < depths.t.size(); ++i) {
    samples[i].t = depths.t[i];
    samples[i].delta = depths.delta[i];
    samples[i].sample = field_query(field, ray.origin + depths.t[i] * ray.direction, ray.direction,
                                    cfg.beta_min_sq);
  }
  return composite(samples, cfg.weighting);
}

RenderedImage render_image(const FieldParams& field, const Pose& pose, const CameraIntrinsics& intr,
                           const RenderConfig& cfg) {
  intr.validate();
  RenderedImage out{Image(intr.width, intr.height, 3), Image(intr.width, intr.height, 1)};
  parallel_for(static_cast<size_t>(intr.height), [&](size_t begin, size_t end) {
    std::vector<RaySample> scratch;
    for (size_t v = begin; v < end; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        const Ray ray = pixel_ray(pose, intr, u, static_cast<int>(v), cfg.t_near, cfg.t_far);
        const auto id = static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(intr.width) +
                        static_cast<std::uint64_t>(u);
        const RenderOutput r = render_ray(field, ray, cfg, id, &scratch);
        const Vec3 c = r.color + r.transmittance * cfg.background;
        for (int ch = 0; ch < 3; ++ch) out.rgb.at(u, static_cast<int>(v), ch) = c[ch];
        out.variance.at(u, static_cast<int>(v), 0) = r.variance;
      }
    }
  });
  return out;
}

}  // namespace flipnerf
