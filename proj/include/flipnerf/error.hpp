// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace flipnerf {

enum class ErrorKind {
  // geometry
  FewerThanFourPoints,
  DegenerateConfiguration,
  NoIntersection,
  OriginInput,
  DegenerateLookAt,
  // renderer / trainer
  PixelOutOfRange,
  LengthMismatch,
  NonpositiveVariance,
  UnknownMode,
  NumericFailure,
  // dataio
  MissingFile,
  MalformedTransforms,
  ImageDecodeError,
  WrongCount,
  AlreadyFlipped,
  IoError,
  // metrics / evaluation
  DimensionMismatch,
  ImageTooSmall,
  EmptySplit,
  InvalidArgument,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the core carries one of the kinds above so the C
/// layer can map it onto a status code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Training diverged; carries the iteration at which a non-finite value showed up.
class NumericFailure : public Error {
 public:
  NumericFailure(int iteration, const std::string& what)
      : Error(ErrorKind::NumericFailure,
              what + " at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace flipnerf
