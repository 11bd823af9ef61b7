// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "gridvid/nn/tensor.hpp"

// OpenMP-parallel compute kernels behind the reference denoiser. Every kernel
// partitions work so that no two threads write the same output element, so
// results do not depend on the thread count. Serial loop-nest versions live in
// reference_kernels.hpp and are the test oracle for these.
namespace gridvid::nn::kernels {

int thread_count();

// weight: (Cout, Cin, k, k); bias: (1, Cout, 1, 1).
Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                      int pad);

// Accumulates into grad_weight and grad_bias; writes grad_x when non-null.
void conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_y, int stride,
                     int pad, Tensor* grad_x, Tensor& grad_weight, Tensor& grad_bias);

struct GroupNormCache {
  std::vector<float> mean;  // (N, groups)
  std::vector<float> rstd;
};

// gamma, beta: (1, C, 1, 1).
Tensor group_norm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta, int groups,
                          float eps, GroupNormCache& cache);
Tensor group_norm_backward(const Tensor& x, const Tensor& gamma, const Tensor& grad_y, int groups,
                           const GroupNormCache& cache, Tensor& grad_gamma, Tensor& grad_beta);

// Single-head self-attention over the H*W positions. qkv: (N, 3C, H, W) with
// queries, keys and values stacked along channels. probs receives the
// (N, P, P) softmax weights for the backward pass.
Tensor attention_forward(const Tensor& qkv, std::vector<float>& probs);
Tensor attention_backward(const Tensor& qkv, const std::vector<float>& probs,
                          const Tensor& grad_out);

Tensor silu_forward(const Tensor& x);
Tensor silu_backward(const Tensor& x, const Tensor& grad_y);

Tensor upsample2x_forward(const Tensor& x);
Tensor upsample2x_backward(const Tensor& grad_y);

// Per-sample feature-wise modulation: y = x * (1 + scale[n, c]) + shift[n, c].
// film: (N, 2C, 1, 1) holding scale then shift.
Tensor film_forward(const Tensor& x, const Tensor& film);
// Returns grad_x and writes grad_film.
Tensor film_backward(const Tensor& x, const Tensor& film, const Tensor& grad_y, Tensor& grad_film);

// Fully connected over (N, in, 1, 1) inputs. weight: (out, in, 1, 1).
Tensor linear_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_y,
                       Tensor& grad_weight, Tensor& grad_bias);

}  // namespace gridvid::nn::kernels
