// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/nn/tensor.hpp"

#include <algorithm>

#include "gridvid/errors.hpp"

namespace gridvid::nn {

Tensor::Tensor(int n, int c, int h, int w, float value) : n_(n), c_(c), h_(h), w_(w) {
  if (n < 0 || c < 0 || h < 0 || w < 0) throw DimensionError("negative tensor dimension");
  data_.assign(static_cast<std::size_t>(n) * c * h * w, value);
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(n_) + "," + std::to_string(c_) + "," + std::to_string(h_) + "," +
         std::to_string(w_) + ")";
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::fill_normal(std::mt19937_64& rng, float stddev) {
  std::normal_distribution<float> dist(0.0f, stddev);
  for (float& v : data_) v = dist(rng);
}

double Tensor::squared_norm() const {
  double s = 0.0;
  for (float v : data_) s += static_cast<double>(v) * v;
  return s;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw ArityError("concat of zero tensors");
  const Tensor& first = *parts.front();
  int channels = 0;
  for (const Tensor* p : parts) {
    if (p->n() != first.n() || p->h() != first.h() || p->w() != first.w()) {
      throw DimensionError("concat_channels: " + p->shape_string() + " vs " + first.shape_string());
    }
    channels += p->c();
  }
  Tensor out(first.n(), channels, first.h(), first.w());
  for (int n = 0; n < first.n(); ++n) {
    float* dst = out.sample(n);
    for (const Tensor* p : parts) {
      dst = std::copy_n(p->sample(n), p->sample_size(), dst);
    }
  }
  return out;
}

Tensor slice_channels(const Tensor& x, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > x.c()) throw IndexError("channel slice out of range");
  Tensor out(x.n(), count, x.h(), x.w());
  for (int n = 0; n < x.n(); ++n) {
    std::copy_n(x.sample(n) + begin * x.plane(), count * x.plane(), out.sample(n));
  }
  return out;
}

Tensor stack(std::span<const Tensor> samples) {
  if (samples.empty()) throw ArityError("stack of zero tensors");
  const Tensor& f = samples.front();
  Tensor out(static_cast<int>(samples.size()), f.c(), f.h(), f.w());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].n() != 1 || samples[i].c() != f.c() || samples[i].h() != f.h() ||
        samples[i].w() != f.w()) {
      throw DimensionError("stack: mismatched sample " + samples[i].shape_string());
    }
    std::copy_n(samples[i].data(), f.sample_size(), out.sample(static_cast<int>(i)));
  }
  return out;
}

Tensor sample_of(const Tensor& x, int i) {
  if (i < 0 || i >= x.n()) throw IndexError("sample index out of range");
  Tensor out(1, x.c(), x.h(), x.w());
  std::copy_n(x.sample(i), x.sample_size(), out.data());
  return out;
}

}  // namespace gridvid::nn
