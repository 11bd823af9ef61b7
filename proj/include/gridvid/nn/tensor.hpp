// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gridvid::nn {

// Dense float tensor in NCHW layout.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, float value = 0.0f);

  int n() const noexcept { return n_; }
  int c() const noexcept { return c_; }
  int h() const noexcept { return h_; }
  int w() const noexcept { return w_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h_) * w_; }
  std::size_t sample_size() const noexcept { return plane() * c_; }

  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> span() noexcept { return data_; }
  std::span<const float> span() const noexcept { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  float at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }
  float* sample(int n) { return data_.data() + n * sample_size(); }
  const float* sample(int n) const { return data_.data() + n * sample_size(); }

  std::size_t index(int n, int c, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x;
  }

  bool same_shape(const Tensor& o) const noexcept {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }
  std::string shape_string() const;

  void fill(float v);
  void zero() { fill(0.0f); }
  void fill_normal(std::mt19937_64& rng, float stddev = 1.0f);

  double squared_norm() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  int n_ = 0;
  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<float> data_;
};

// Concatenates along channels; all inputs share N, H, W.
Tensor concat_channels(std::span<const Tensor* const> parts);
// Channels [begin, begin + count) of x.
Tensor slice_channels(const Tensor& x, int begin, int count);
// Stacks single-sample tensors along N.
Tensor stack(std::span<const Tensor> samples);
// Sample i of x as a single-sample tensor.
Tensor sample_of(const Tensor& x, int i);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace gridvid::nn
