// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/field.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "flipnerf/error.hpp"

namespace flipnerf {

namespace {

constexpr char kMagic[8] = {'F', 'N', 'F', 'I', 'E', 'L', 'D', '\0'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <class T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorKind::IoError, "truncated checkpoint");
  return v;
}

}  // namespace

FieldParams::FieldParams(std::array<int, 3> resolution, Vec3 lo, Vec3 hi)
    : res_(resolution), lo_(std::move(lo)), hi_(std::move(hi)) {
  for (int a = 0; a < 3; ++a) {
    if (res_[a] < 2) throw Error(ErrorKind::InvalidArgument, "grid resolution must be >= 2 per axis");
    if (!(lo_[a] < hi_[a])) throw Error(ErrorKind::InvalidArgument, "grid bounds must satisfy lo < hi");
  }
  raw_.assign(static_cast<size_t>(res_[0]) * res_[1] * res_[2] * kRawChannels, 0.0);
}

Vec3 FieldParams::vertex_position(int i, int j, int k) const {
  const Vec3 ext = hi_ - lo_;
  return {lo_.x() + ext.x() * i / (res_[0] - 1), lo_.y() + ext.y() * j / (res_[1] - 1),
          lo_.z() + ext.z() * k / (res_[2] - 1)};
}

void FieldParams::fill(int channel, double value) {
  for (size_t v = 0; v < vertex_count(); ++v) raw_[v * kRawChannels + static_cast<size_t>(channel)] = value;
}

bool locate(const FieldParams& field, const Vec3& x, Stencil& out) {
  const auto& res = field.resolution();
  for (int a = 0; a < 3; ++a) {
    const double lo = field.lo()[a];
    const double hi = field.hi()[a];
    if (!(x[a] >= lo && x[a] <= hi)) return false;
    const double s = (x[a] - lo) / (hi - lo) * (res[a] - 1);
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, res[a] - 2);
    out.cell[a] = i;
    out.frac[a] = s - i;
  }
  out.base = field.vertex_index(out.cell[0], out.cell[1], out.cell[2]);
  return true;
}

std::array<double, kRawChannels> interpolate_raw(const FieldParams& field, const Stencil& s) {
  const auto& res = field.resolution();
  const std::int64_t stride[3] = {1, res[0], static_cast<std::int64_t>(res[0]) * res[1]};
  std::array<double, kRawChannels> out{};
  const double* raw = field.data().data();
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? s.frac.z() : 1.0 - s.frac.z();
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? s.frac.y() : 1.0 - s.frac.y();
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? s.frac.x() : 1.0 - s.frac.x()) * wy * wz;
        const double* v = raw + (s.base + dx * stride[0] + dy * stride[1] + dz * stride[2]) * kRawChannels;
        for (int c = 0; c < kRawChannels; ++c) out[static_cast<size_t>(c)] += w * v[c];
      }
    }
  }
  return out;
}

FieldSample field_query(const FieldParams& field, const Vec3& x, const Vec3& /*d*/, double beta_min_sq) {
  FieldSample out;
  out.variance = beta_min_sq;
  Stencil s;
  if (!locate(field, x, s)) return out;
  const auto r = interpolate_raw(field, s);
  out.density = softplus(r[kSigma]);
  out.color = {sigmoid(r[kRed]), sigmoid(r[kGreen]), sigmoid(r[kBlue])};
  out.variance = beta_min_sq + softplus(r[kBeta]);
  return out;
}

Vec3 backprop_activations(const FieldParams& field, const Stencil& s,
                          const std::array<double, kRawChannels>& r,
                          const FieldSampleGrad& up, std::array<double, kRawChannels>& d_raw) {
  d_raw[kSigma] = up.density * sigmoid(r[kSigma]);
  for (int c = 0; c < 3; ++c) {
    const double sg = sigmoid(r[static_cast<size_t>(kRed + c)]);
    d_raw[static_cast<size_t>(kRed + c)] = up.color[c] * sg * (1.0 - sg);
  }
  d_raw[kBeta] = up.variance * sigmoid(r[kBeta]);

  // d/dx of sum_c d_raw[c] * interp_c(x), through the trilinear weights.
  const auto& res = field.resolution();
  const std::int64_t stride[3] = {1, res[0], static_cast<std::int64_t>(res[0]) * res[1]};
  const double* raw = field.data().data();
  Vec3 dfrac = Vec3::Zero();
  const Vec3& f = s.frac;
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? f.z() : 1.0 - f.z();
    const double gz = dz ? 1.0 : -1.0;
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? f.y() : 1.0 - f.y();
      const double gy = dy ? 1.0 : -1.0;
      for (int dx = 0; dx < 2; ++dx) {
        const double wx = dx ? f.x() : 1.0 - f.x();
        const double gx = dx ? 1.0 : -1.0;
        const double* v = raw + (s.base + dx * stride[0] + dy * stride[1] + dz * stride[2]) * kRawChannels;
        double proj = 0.0;
        for (int c = 0; c < kRawChannels; ++c) proj += d_raw[static_cast<size_t>(c)] * v[c];
        dfrac.x() += gx * wy * wz * proj;
        dfrac.y() += wx * gy * wz * proj;
        dfrac.z() += wx * wy * gz * proj;
      }
    }
  }
  const Vec3 ext = field.hi() - field.lo();
  return {dfrac.x() * (res[0] - 1) / ext.x(), dfrac.y() * (res[1] - 1) / ext.y(),
          dfrac.z() * (res[2] - 1) / ext.z()};
}

void scatter_raw_gradient(const FieldParams& field, const RawGradient& g, std::vector<double>& grad) {
  const auto& res = field.resolution();
  const std::int64_t stride[3] = {1, res[0], static_cast<std::int64_t>(res[0]) * res[1]};
  const Vec3& f = g.stencil.frac;
  double* out = grad.data();
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? f.z() : 1.0 - f.z();
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? f.y() : 1.0 - f.y();
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? f.x() : 1.0 - f.x()) * wy * wz;
        if (w == 0.0) continue;
        double* v = out + (g.stencil.base + dx * stride[0] + dy * stride[1] + dz * stride[2]) * kRawChannels;
        for (int c = 0; c < kRawChannels; ++c) v[c] += w * g.raw[static_cast<size_t>(c)];
      }
    }
  }
}

FieldQueryGradient field_query_grad(const FieldParams& field, const Vec3& x, const Vec3& /*d*/,
                                    double /*beta_min_sq*/, const FieldSampleGrad& upstream) {
  FieldQueryGradient out;
  if (upstream.is_zero()) return out;
  Stencil s;
  if (!locate(field, x, s)) return out;
  const auto r = interpolate_raw(field, s);
  std::array<double, kRawChannels> d_raw{};
  out.position = backprop_activations(field, s, r, upstream, d_raw);

  const auto& res = field.resolution();
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? s.frac.z() : 1.0 - s.frac.z();
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? s.frac.y() : 1.0 - s.frac.y();
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? s.frac.x() : 1.0 - s.frac.x()) * wy * wz;
        if (w == 0.0) continue;
        VoxelGradient vg;
        vg.vertex = s.base + dx + dy * res[0] + dz * static_cast<std::int64_t>(res[0]) * res[1];
        bool any = false;
        for (int c = 0; c < kRawChannels; ++c) {
          vg.raw[static_cast<size_t>(c)] = w * d_raw[static_cast<size_t>(c)];
          any = any || vg.raw[static_cast<size_t>(c)] != 0.0;
        }
        if (any) out.vertices.push_back(vg);
      }
    }
  }
  return out;
}

void save_checkpoint(const FieldParams& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  for (int a = 0; a < 3; ++a) write_pod(out, static_cast<std::uint32_t>(field.resolution()[static_cast<size_t>(a)]));
  for (int a = 0; a < 3; ++a) write_pod(out, field.lo()[a]);
  for (int a = 0; a < 3; ++a) write_pod(out, field.hi()[a]);
  const size_t n = field.vertex_count();
  std::vector<double> plane(n);
  for (int c = 0; c < kRawChannels; ++c) {
    for (size_t v = 0; v < n; ++v) plane[v] = field.data()[v * kRawChannels + static_cast<size_t>(c)];
    out.write(reinterpret_cast<const char*>(plane.data()), static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

FieldParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::IoError, path.string() + " is not a field checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw Error(ErrorKind::IoError, "unsupported checkpoint version " + std::to_string(version));
  }
  std::array<int, 3> res{};
  for (auto& r : res) r = static_cast<int>(read_pod<std::uint32_t>(in));
  Vec3 lo;
  Vec3 hi;
  for (int a = 0; a < 3; ++a) lo[a] = read_pod<double>(in);
  for (int a = 0; a < 3; ++a) hi[a] = read_pod<double>(in);
  FieldParams field(res, lo, hi);
  const size_t n = field.vertex_count();
  std::vector<double> plane(n);
  for (int c = 0; c < kRawChannels; ++c) {
    in.read(reinterpret_cast<char*>(plane.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error(ErrorKind::IoError, "truncated checkpoint " + path.string());
    for (size_t v = 0; v < n; ++v) field.data()[v * kRawChannels + static_cast<size_t>(c)] = plane[v];
  }
  return field;
}

}  // namespace flipnerf
