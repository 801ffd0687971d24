// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include <png.h>

#include "flipnerf/error.hpp"

namespace flipnerf {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Image mirror_horizontal(const Image& img) {
  Image out(img.width, img.height, img.channels);
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      for (int c = 0; c < img.channels; ++c) out.at(img.width - 1 - u, v, c) = img.at(u, v, c);
    }
  }
  return out;
}

Image quantize_8bit(const Image& img) {
  Image out = img;
  for (auto& x : out.data) x = to_byte(x) / 255.0;
  return out;
}

Image read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorKind::MissingFile, "cannot open image " + path.string());

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_stdio(&image, file.get())) {
    throw Error(ErrorKind::ImageDecodeError, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorKind::ImageDecodeError, path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  Image out(w, h, 3);
  for (size_t p = 0; p < out.pixel_count(); ++p) {
    const double a = buf[p * 4 + 3] / 255.0;
    for (int c = 0; c < 3; ++c) {
      const double rgb = buf[p * 4 + static_cast<size_t>(c)] / 255.0;
      // Opaque pixels keep their exact 8-bit level.
      out.data[p * 3 + static_cast<size_t>(c)] = buf[p * 4 + 3] == 255 ? rgb : rgb * a + (1.0 - a);
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorKind::InvalidArgument, "PNG output needs 1 or 3 channels");
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(img.data.size());
  std::transform(img.data.begin(), img.data.end(), buf.begin(), to_byte);
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string() + ": " + image.message);
  }
}

}  // namespace flipnerf
