// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "gridvid/nn/tensor.hpp"

// Serial loop-nest kernels. Slow and obviously correct; used to check the
// parallel kernels and as the benchmark baseline.
namespace gridvid::nn::reference {

Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                      int pad);
void conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_y, int stride,
                     int pad, Tensor* grad_x, Tensor& grad_weight, Tensor& grad_bias);

Tensor group_norm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta, int groups,
                          float eps);
Tensor group_norm_backward(const Tensor& x, const Tensor& gamma, const Tensor& grad_y, int groups,
                           float eps, Tensor& grad_gamma, Tensor& grad_beta);

Tensor attention_forward(const Tensor& qkv);
Tensor attention_backward(const Tensor& qkv, const Tensor& grad_out);

}  // namespace gridvid::nn::reference
