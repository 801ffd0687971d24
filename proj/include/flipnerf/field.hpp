// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "flipnerf/geometry.hpp"

namespace flipnerf {

/// Raw channels stored per grid vertex, in this order.
enum RawChannel : int { kSigma = 0, kRed = 1, kGreen = 2, kBlue = 3, kBeta = 4 };
inline constexpr int kRawChannels = 5;

/// Dense vertex grid over an axis-aligned box. Vertex (i, j, k) sits at
/// lo + (i, j, k) * (hi - lo) / (res - 1); raw values are interleaved per
/// vertex with x varying fastest.
class FieldParams {
 public:
  FieldParams() = default;
  FieldParams(std::array<int, 3> resolution, Vec3 lo, Vec3 hi);

  const std::array<int, 3>& resolution() const { return res_; }
  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }
  std::size_t vertex_count() const { return raw_.size() / kRawChannels; }
  std::size_t parameter_count() const { return raw_.size(); }

  std::int64_t vertex_index(int i, int j, int k) const {
    return (static_cast<std::int64_t>(k) * res_[1] + j) * res_[0] + i;
  }
  Vec3 vertex_position(int i, int j, int k) const;

  double& raw(std::int64_t vertex, int channel) { return raw_[static_cast<size_t>(vertex * kRawChannels + channel)]; }
  double raw(std::int64_t vertex, int channel) const { return raw_[static_cast<size_t>(vertex * kRawChannels + channel)]; }
  std::vector<double>& data() { return raw_; }
  const std::vector<double>& data() const { return raw_; }

  /// Sets one channel at every vertex.
  void fill(int channel, double value);

 private:
  std::array<int, 3> res_{0, 0, 0};
  Vec3 lo_ = Vec3::Constant(-1.0);
  Vec3 hi_ = Vec3::Constant(1.0);
  std::vector<double> raw_;
};

struct FieldSample {
  Vec3 color = Vec3::Zero();
  double density = 0.0;
  double variance = 0.0;
};

/// Upstream derivative of some scalar with respect to a FieldSample.
struct FieldSampleGrad {
  Vec3 color = Vec3::Zero();
  double density = 0.0;
  double variance = 0.0;

  bool is_zero() const { return density == 0.0 && variance == 0.0 && color.isZero(0.0); }
};

/// Location of a point inside the grid: the lower-corner vertex of its cell
/// and fractional offsets along each axis.
struct Stencil {
  std::int64_t base = 0;
  std::array<int, 3> cell{0, 0, 0};
  Vec3 frac = Vec3::Zero();
};

/// Returns false when x lies outside the grid bounds.
bool locate(const FieldParams& field, const Vec3& x, Stencil& out);

/// Trilinear interpolation of all raw channels at a located point.
std::array<double, kRawChannels> interpolate_raw(const FieldParams& field, const Stencil& s);

inline double softplus(double x) {
  return x > 30.0 ? x : (x < -30.0 ? std::exp(x) : std::log1p(std::exp(x)));
}
inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Activated sample at x. The direction is accepted for interface parity
/// with F(x, d) but does not influence the result. Points outside the box are
/// empty: zero density and color, variance at the floor.
FieldSample field_query(const FieldParams& field, const Vec3& x, const Vec3& d, double beta_min_sq);

struct VoxelGradient {
  std::int64_t vertex = 0;
  std::array<double, kRawChannels> raw{};
};

struct FieldQueryGradient {
  std::vector<VoxelGradient> vertices;  // at most 8, zero entries omitted
  Vec3 position = Vec3::Zero();         // d(scalar)/dx through the trilinear weights
};

FieldQueryGradient field_query_grad(const FieldParams& field, const Vec3& x, const Vec3& d,
                                    double beta_min_sq, const FieldSampleGrad& upstream);

/// Per-sample backward pass in compact form: gradients w.r.t. the
/// interpolated raw values plus the stencil that distributes them.
struct RawGradient {
  Stencil stencil;
  std::array<double, kRawChannels> raw{};
};

/// Activations' chain rule at one located point; returns d/dx as well.
Vec3 backprop_activations(const FieldParams& field, const Stencil& s,
                          const std::array<double, kRawChannels>& raw_interp,
                          const FieldSampleGrad& upstream, std::array<double, kRawChannels>& d_raw);

/// Adds w * d_raw to the 8 vertices around the stencil.
void scatter_raw_gradient(const FieldParams& field, const RawGradient& g, std::vector<double>& grad);

// Checkpoint I/O. Layout (little-endian):
//   char[8]  "FNFIELD\0"
//   u32      version (1)
//   u32[3]   resolution nx, ny, nz
//   f64[3]   lo, f64[3] hi
//   f64[N]   sigma_raw, red_raw, green_raw, blue_raw, beta_raw  (five planar grids, x fastest)
void save_checkpoint(const FieldParams& field, const std::filesystem::path& path);
FieldParams load_checkpoint(const std::filesystem::path& path);

}  // namespace flipnerf
