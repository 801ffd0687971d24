// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "flipnerf/image.hpp"

namespace flipnerf {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all pixels and channels; kPsnrCap when MSE is zero.
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM on luma (0.299 R + 0.587 G + 0.114 B) with an 11x11
/// Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, range 1, averaged
/// over valid window positions.
double ssim(const Image& a, const Image& b);

}  // namespace flipnerf
