// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "flipnerf/error.hpp"
#include "flipnerf/field.hpp"
#include "support.hpp"

using namespace flipnerf;
using flipnerf::testing::rel_err;

namespace {

double project(const FieldSample& s, const FieldSampleGrad& up) {
  return s.color.dot(up.color) + s.density * up.density + s.variance * up.variance;
}

FieldSampleGrad random_upstream(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  FieldSampleGrad up;
  up.color = Vec3(n(rng), n(rng), n(rng));
  up.density = n(rng);
  up.variance = n(rng);
  return up;
}

}  // namespace

TEST_CASE("zero raws give the activation midpoints") {
  FieldParams f({4, 4, 4}, Vec3::Constant(-1), Vec3::Constant(1));
  const FieldSample s = field_query(f, Vec3(0.1, -0.3, 0.2), -Vec3::UnitZ(), 0.01);
  CHECK((s.color - Vec3::Constant(0.5)).norm() <= 1e-15);
  CHECK(s.density == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(s.variance == doctest::Approx(0.01 + std::log(2.0)).epsilon(1e-15));
  CHECK(f.parameter_count() == 4 * 4 * 4 * 5);
}

TEST_CASE("outside the bounds the field is empty") {
  const FieldParams f = flipnerf::testing::random_field(5, 1);
  const FieldSample s = field_query(f, Vec3(1.2, 0, 0), Vec3::UnitX(), 0.02);
  CHECK(s.density == 0.0);
  CHECK(s.color == Vec3::Zero());
  CHECK(s.variance == 0.02);
  FieldSampleGrad up;
  up.density = 1.0;
  CHECK(field_query_grad(f, Vec3(0, 0, -1.5), Vec3::UnitX(), 0.02, up).vertices.empty());
}

TEST_CASE("vertex queries return stored raws") {
  const FieldParams f = flipnerf::testing::random_field(6, 2);
  for (auto [i, j, k] : {std::array{1, 2, 3}, std::array{0, 0, 0}, std::array{5, 5, 5}, std::array{4, 1, 5}}) {
    Stencil st;
    REQUIRE(locate(f, f.vertex_position(i, j, k), st));
    const auto raw = interpolate_raw(f, st);
    for (int c = 0; c < kRawChannels; ++c) CHECK(raw[static_cast<size_t>(c)] == f.raw(f.vertex_index(i, j, k), c));
  }
}

TEST_CASE("trilinear interpolation is exact for affine raws") {
  FieldParams f({7, 5, 9}, Vec3(-1, -2, -0.5), Vec3(1, 2, 1.5));
  const Vec3 a(0.3, -1.2, 2.5);
  for (int k = 0; k < 9; ++k) {
    for (int j = 0; j < 5; ++j) {
      for (int i = 0; i < 7; ++i) {
        const Vec3 p = f.vertex_position(i, j, k);
        for (int c = 0; c < kRawChannels; ++c) f.raw(f.vertex_index(i, j, k), c) = a.dot(p) + 0.7 * c;
      }
    }
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 100; ++n) {
    const Vec3 t(u(rng), u(rng), u(rng));
    const Vec3 x = f.lo() + t.cwiseProduct(f.hi() - f.lo());
    Stencil st;
    REQUIRE(locate(f, x, st));
    const auto raw = interpolate_raw(f, st);
    for (int c = 0; c < kRawChannels; ++c) CHECK(std::abs(raw[static_cast<size_t>(c)] - (a.dot(x) + 0.7 * c)) <= 1e-9);
  }
}

TEST_CASE("view direction is ignored") {
  const FieldParams f = flipnerf::testing::random_field(6, 3);
  const Vec3 x(0.2, 0.1, -0.4);
  const FieldSample a = field_query(f, x, Vec3::UnitX(), 0.01);
  const FieldSample b = field_query(f, x, Vec3(0, 0.6, 0.8), 0.01);
  CHECK(a.color == b.color);
  CHECK(a.density == b.density);
  CHECK(a.variance == b.variance);
}

TEST_CASE("query gradient at a vertex touches one voxel") {
  const FieldParams f = flipnerf::testing::random_field(6, 4);
  FieldSampleGrad up;
  CHECK(field_query_grad(f, f.vertex_position(2, 3, 1), Vec3::UnitX(), 0.01, up).vertices.empty());
  up.density = 1.0;
  const auto g = field_query_grad(f, f.vertex_position(2, 3, 1), Vec3::UnitX(), 0.01, up);
  REQUIRE(g.vertices.size() == 1);
  CHECK(g.vertices[0].vertex == f.vertex_index(2, 3, 1));
  CHECK(g.vertices[0].raw[kSigma] == doctest::Approx(sigmoid(f.raw(f.vertex_index(2, 3, 1), kSigma))).epsilon(1e-15));
}

TEST_CASE("query gradients match finite differences") {
  FieldParams f = flipnerf::testing::random_field(6, 5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  const double h = 1e-5;
  for (int probe = 0; probe < 100; ++probe) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const FieldSampleGrad up = random_upstream(rng);
    const auto g = field_query_grad(f, x, Vec3::UnitX(), 0.01, up);
    for (const auto& vg : g.vertices) {
      for (int c = 0; c < kRawChannels; ++c) {
        double& raw = f.raw(vg.vertex, c);
        const double saved = raw;
        raw = saved + h;
        const double lp = project(field_query(f, x, Vec3::UnitX(), 0.01), up);
        raw = saved - h;
        const double lm = project(field_query(f, x, Vec3::UnitX(), 0.01), up);
        raw = saved;
        // Central differences at h = 1e-5 carry about 1e-10 of absolute roundoff.
        const double fd = (lp - lm) / (2 * h);
        CHECK(std::abs(vg.raw[static_cast<size_t>(c)] - fd) <= 1e-6 * std::abs(fd) + 1e-9);
      }
    }
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      const double fd = (project(field_query(f, xp, Vec3::UnitX(), 0.01), up) -
                         project(field_query(f, xm, Vec3::UnitX(), 0.01), up)) / (2 * h);
      CHECK(rel_err(g.position[a], fd, 1e-6) <= 1e-5);
    }
  }
}

TEST_CASE("field samples satisfy their invariants for extreme raws") {
  FieldParams f({3, 3, 3}, Vec3::Constant(-1), Vec3::Constant(1));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-800.0, 800.0);
  for (auto& x : f.data()) x = u(rng);
  std::uniform_real_distribution<double> p(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const FieldSample s = field_query(f, Vec3(p(rng), p(rng), p(rng)), Vec3::UnitZ(), 0.01);
    CHECK(std::isfinite(s.density));
    CHECK(s.density >= 0.0);
    CHECK(s.variance >= 0.01);
    CHECK(s.color.minCoeff() >= 0.0);
    CHECK(s.color.maxCoeff() <= 1.0);
  }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const FieldParams f = flipnerf::testing::random_field(5, 8);
  const auto path = flipnerf::testing::scratch_dir("ckpt") / "field.ckpt";
  save_checkpoint(f, path);
  const FieldParams g = load_checkpoint(path);
  CHECK(g.resolution() == f.resolution());
  CHECK(g.lo() == f.lo());
  CHECK(g.hi() == f.hi());
  CHECK(g.data() == f.data());
  CHECK(std::filesystem::file_size(path) == 8 + 4 + 12 + 48 + f.parameter_count() * 8);
}

TEST_CASE("invalid grids and checkpoints are rejected") {
  CHECK_THROWS_AS(FieldParams({1, 4, 4}, Vec3::Constant(-1), Vec3::Constant(1)), Error);
  CHECK_THROWS_AS(FieldParams({4, 4, 4}, Vec3::Constant(1), Vec3::Constant(1)), Error);
  const auto dir = flipnerf::testing::scratch_dir("badckpt");
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), Error);
  std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), Error);
}
