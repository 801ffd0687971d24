// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "flipnerf/dataio.hpp"
#include "flipnerf/field.hpp"
#include "flipnerf/geometry.hpp"
#include "flipnerf/trainer.hpp"

namespace flipnerf::testing {

inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Pose random_pose(std::mt19937_64& rng, double spread = 3.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::uniform_real_distribution<double> ang(0.0, M_PI);
  Pose p;
  p.rotation = so3_exp(random_unit(rng) * ang(rng));
  p.translation = Vec3(u(rng), u(rng), u(rng));
  return p;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("flipnerf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random field whose outermost vertex shell is empty, so samples crossing
/// the box boundary see no density jump.
inline FieldParams random_field(int res, std::uint64_t seed) {
  FieldParams f({res, res, res}, Vec3::Constant(-1.0), Vec3::Constant(1.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& x : f.data()) x = n(rng);
  for (int k = 0; k < res; ++k) {
    for (int j = 0; j < res; ++j) {
      for (int i = 0; i < res; ++i) {
        const bool shell = i == 0 || j == 0 || k == 0 || i == res - 1 || j == res - 1 || k == res - 1;
        if (shell) f.raw(f.vertex_index(i, j, k), kSigma) = -40.0;
      }
    }
  }
  return f;
}

}  // namespace flipnerf::testing
