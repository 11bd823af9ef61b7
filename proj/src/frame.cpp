// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/frame.hpp"

#include <algorithm>
#include <string>

#include "gridvid/errors.hpp"

namespace gridvid {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kArity: return "arity";
    case ErrorKind::kIndex: return "index";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kInsufficientLength: return "insufficient-length";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBadMagic: return "bad-magic";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kDimensionOverflow: return "dimension-overflow";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kMissingRole: return "missing-role";
    case ErrorKind::kSinkFailure: return "sink-failure";
    case ErrorKind::kPlanViolation: return "plan-violation";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kInsufficientSamples: return "insufficient-samples";
    case ErrorKind::kUnsupported: return "unsupported";
  }
  return "unknown";
}

Frame::Frame(int width, int height, int channels, float value)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw DimensionError("frame dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, value);
}

Frame::Frame(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw DimensionError("frame dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw DimensionError("frame data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height) + "x" + std::to_string(channels));
  }
}

bool Frame::in_range() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return v >= -1.0f && v <= 1.0f; });
}

void Frame::clamp() {
  for (float& v : data_) v = std::clamp(v, -1.0f, 1.0f);
}

}  // namespace gridvid
