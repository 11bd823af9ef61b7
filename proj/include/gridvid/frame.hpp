// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gridvid {

// Value used for masked cells and gutters, in normalized [-1, 1] space.
inline constexpr float kFillValue = 0.0f;

// An image with normalized intensities in [-1, 1], row-major, channels
// interleaved (HWC).
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, int channels = 3, float value = kFillValue);
  Frame(int width, int height, int channels, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  bool same_shape(const Frame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  // True when every value lies in [-1, 1].
  bool in_range() const noexcept;
  // Clamp every value into [-1, 1].
  void clamp();

  std::size_t bytes() const noexcept { return data_.size() * sizeof(float); }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

}  // namespace gridvid
