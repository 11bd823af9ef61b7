// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridvid {

// Error classes map one-to-one onto CLI exit codes (see exit_code()).
enum class ErrorKind {
  kDimension = 10,
  kArity,
  kIndex,
  kDomain,
  kInsufficientLength,
  kContract,
  kIo,
  kBadMagic,
  kTruncated,
  kDimensionOverflow,
  kParse,
  kConfig,
  kMissingRole,
  kSinkFailure,
  kPlanViolation,
  kNumerical,
  kInsufficientSamples,
  kUnsupported,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& message) : Error(K, message) {}
};

using DimensionError = TypedError<ErrorKind::kDimension>;
using ArityError = TypedError<ErrorKind::kArity>;
using IndexError = TypedError<ErrorKind::kIndex>;
using DomainError = TypedError<ErrorKind::kDomain>;
using InsufficientLengthError = TypedError<ErrorKind::kInsufficientLength>;
using ContractError = TypedError<ErrorKind::kContract>;
using IoError = TypedError<ErrorKind::kIo>;
using BadMagicError = TypedError<ErrorKind::kBadMagic>;
using TruncatedError = TypedError<ErrorKind::kTruncated>;
using DimensionOverflowError = TypedError<ErrorKind::kDimensionOverflow>;
using ParseError = TypedError<ErrorKind::kParse>;
using ConfigError = TypedError<ErrorKind::kConfig>;
using MissingRoleError = TypedError<ErrorKind::kMissingRole>;
using SinkError = TypedError<ErrorKind::kSinkFailure>;
using PlanViolationError = TypedError<ErrorKind::kPlanViolation>;
using NumericalError = TypedError<ErrorKind::kNumerical>;
using InsufficientSamplesError = TypedError<ErrorKind::kInsufficientSamples>;
using UnsupportedError = TypedError<ErrorKind::kUnsupported>;

}  // namespace gridvid
