// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

namespace flipnerf {

/// Row-major image with interleaved channels, values nominally in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int u, int v, int c) { return data[(static_cast<size_t>(v) * width + u) * channels + c]; }
  double at(int u, int v, int c) const { return data[(static_cast<size_t>(v) * width + u) * channels + c]; }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Horizontal mirror: pixel (u, v) moves to (W - 1 - u, v).
Image mirror_horizontal(const Image& img);

/// Rounds to the nearest 8-bit level, so the result survives a PNG round trip bit-exactly.
Image quantize_8bit(const Image& img);

/// Decodes an 8-bit PNG to RGB in [0, 1]; an alpha channel is composited over white.
Image read_png(const std::filesystem::path& path);

/// Writes RGB (3 channels) or grayscale (1 channel) 8-bit PNG; values are clamped to [0, 1].
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace flipnerf
