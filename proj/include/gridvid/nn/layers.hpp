// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "gridvid/diffusion.hpp"
#include "gridvid/nn/kernels.hpp"
#include "gridvid/nn/tensor.hpp"

// Layers with hand-written backward passes. Each layer caches what its
// backward() needs from the most recent forward().
namespace gridvid::nn {

using diffusion::Param;
using diffusion::ParamGroup;

Param make_param(std::string name, ParamGroup group, int n, int c, int h, int w);

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, int cin, int cout, int kernel, int stride, ParamGroup group,
         std::mt19937_64& rng, float init_gain = 1.0f);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_y, bool need_grad_x = true);
  void collect(std::vector<Param*>& out) { out.push_back(&weight); out.push_back(&bias); }

  Param weight;
  Param bias;

 private:
  int stride_ = 1;
  int pad_ = 0;
  Tensor x_;
};

class GroupNorm {
 public:
  GroupNorm() = default;
  GroupNorm(const std::string& name, int channels, int groups);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Param*>& out) { out.push_back(&gamma); out.push_back(&beta); }

  Param gamma;
  Param beta;

 private:
  int groups_ = 1;
  Tensor x_;
  kernels::GroupNormCache cache_;
};

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out, ParamGroup group, std::mt19937_64& rng,
         float init_gain = 1.0f);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Param*>& out) { out.push_back(&weight); out.push_back(&bias); }

  Param weight;
  Param bias;

 private:
  Tensor x_;
};

class Silu {
 public:
  Tensor forward(const Tensor& x) { x_ = x; return kernels::silu_forward(x); }
  Tensor backward(const Tensor& grad_y) const { return kernels::silu_backward(x_, grad_y); }

 private:
  Tensor x_;
};

// GroupNorm -> SiLU -> conv -> FiLM(emb) -> GroupNorm -> SiLU -> conv, plus a
// (1x1 projected when widths differ) skip connection.
class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(const std::string& name, int cin, int cout, int emb_dim, int groups,
           std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const Tensor& emb);
  // Returns grad_x and accumulates into grad_emb.
  Tensor backward(const Tensor& grad_y, Tensor& grad_emb);
  void collect(std::vector<Param*>& out);

 private:
  GroupNorm norm1_, norm2_;
  Silu act1_, act2_;
  Conv2d conv1_, conv2_;
  Linear film_;
  Conv2d skip_;
  bool has_skip_ = false;
  Tensor h1_, film_out_;
};

// Single-head self-attention with a residual connection.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(const std::string& name, int channels, int groups, std::mt19937_64& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Param*>& out);

 private:
  GroupNorm norm_;
  Conv2d qkv_;
  Conv2d proj_;
  Tensor qkv_out_;
  std::vector<float> probs_;
};

// Mean over tokens of (learned token vector + sinusoidal position code), plus
// a learned prefix vector for "Fill in the blanks"; the null prompt maps to a
// learned vector of its own.
class PromptEmbedding {
 public:
  PromptEmbedding() = default;
  PromptEmbedding(const std::string& name, int vocab_size, int dim, std::mt19937_64& rng);

  Tensor forward(std::span<const diffusion::PromptCode> prompts);
  void backward(const Tensor& grad_y);
  void collect(std::vector<Param*>& out);
  int dim() const noexcept { return dim_; }

 private:
  int dim_ = 0;
  Param table_;
  Param prefix_;
  Param null_;
  std::vector<diffusion::PromptCode> prompts_;
};

// Sinusoidal code of a scalar position, dim values.
void sinusoidal_code(double position, int dim, float* out);

}  // namespace gridvid::nn
