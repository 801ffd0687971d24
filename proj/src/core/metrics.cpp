// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/metrics.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "flipnerf/error.hpp"

namespace flipnerf {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(a.width) + "x" + std::to_string(a.height) + "x" + std::to_string(a.channels) +
                    " vs " + std::to_string(b.width) + "x" + std::to_string(b.height) + "x" +
                    std::to_string(b.channels));
  }
}

std::vector<double> luma(const Image& img) {
  std::vector<double> y(img.pixel_count());
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const size_t i = static_cast<size_t>(v) * static_cast<size_t>(img.width) + static_cast<size_t>(u);
      y[i] = img.channels == 1 ? img.at(u, v, 0)
                               : 0.299 * img.at(u, v, 0) + 0.587 * img.at(u, v, 1) + 0.114 * img.at(u, v, 2);
    }
  }
  return y;
}

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    g[static_cast<size_t>(i)] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    sum += g[static_cast<size_t>(i)];
  }
  for (auto& w : g) w /= sum;
  return g;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same_shape(a, b);
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  const double mse = a.data.empty() ? 0.0 : sum / static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double ssim(const Image& a, const Image& b) {
  check_same_shape(a, b);
  if (a.width < kWindow || a.height < kWindow) {
    throw Error(ErrorKind::ImageTooSmall, "SSIM needs at least 11x11 pixels, got " + std::to_string(a.width) +
                                              "x" + std::to_string(a.height));
  }
  const auto x = luma(a);
  const auto y = luma(b);
  const auto g = gaussian_window();
  const int w = a.width;
  const int out_w = a.width - kWindow + 1;
  const int out_h = a.height - kWindow + 1;
  double total = 0.0;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int j = 0; j < kWindow; ++j) {
        for (int i = 0; i < kWindow; ++i) {
          const double wt = g[static_cast<size_t>(i)] * g[static_cast<size_t>(j)];
          const size_t p = static_cast<size_t>(oy + j) * static_cast<size_t>(w) + static_cast<size_t>(ox + i);
          mx += wt * x[p];
          my += wt * y[p];
          sxx += wt * x[p] * x[p];
          syy += wt * y[p] * y[p];
          sxy += wt * x[p] * y[p];
        }
      }
      const double vx = sxx - mx * mx;
      const double vy = syy - my * my;
      const double cov = sxy - mx * my;
      total += ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) / ((mx * mx + my * my + kC1) * (vx + vy + kC2));
    }
  }
  return total / (static_cast<double>(out_w) * out_h);
}

}  // namespace flipnerf
