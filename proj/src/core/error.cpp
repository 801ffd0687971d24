// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/error.hpp"

namespace flipnerf {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::FewerThanFourPoints: return "FewerThanFourPoints";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::OriginInput: return "OriginInput";
    case ErrorKind::DegenerateLookAt: return "DegenerateLookAt";
    case ErrorKind::PixelOutOfRange: return "PixelOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonpositiveVariance: return "NonpositiveVariance";
    case ErrorKind::UnknownMode: return "UnknownMode";
    case ErrorKind::NumericFailure: return "NumericFailure";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedTransforms: return "MalformedTransforms";
    case ErrorKind::ImageDecodeError: return "ImageDecodeError";
    case ErrorKind::WrongCount: return "WrongCount";
    case ErrorKind::AlreadyFlipped: return "AlreadyFlipped";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace flipnerf
