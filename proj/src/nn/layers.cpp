// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/nn/layers.hpp"

#include <cmath>

#include "gridvid/errors.hpp"

namespace gridvid::nn {

namespace {

void add_into(Tensor& dst, const Tensor& src) {
  require_same_shape(dst, src, "gradient accumulation");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void init_normal(Param& p, std::mt19937_64& rng, float stddev) {
  if (stddev == 0.0f) {
    p.value.zero();
  } else {
    p.value.fill_normal(rng, stddev);
  }
}

}  // namespace

Param make_param(std::string name, ParamGroup group, int n, int c, int h, int w) {
  Param p;
  p.name = std::move(name);
  p.group = group;
  p.value = Tensor(n, c, h, w);
  p.grad = Tensor(n, c, h, w);
  return p;
}

void sinusoidal_code(double position, int dim, float* out) {
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / std::max(half, 1));
    out[2 * i] = static_cast<float>(std::sin(position * freq));
    out[2 * i + 1] = static_cast<float>(std::cos(position * freq));
  }
  if (dim % 2 == 1) out[dim - 1] = 0.0f;
}

Conv2d::Conv2d(const std::string& name, int cin, int cout, int kernel, int stride,
               ParamGroup group, std::mt19937_64& rng, float init_gain)
    : weight(make_param(name + ".weight", group, cout, cin, kernel, kernel)),
      bias(make_param(name + ".bias", group, 1, cout, 1, 1)),
      stride_(stride),
      pad_(kernel / 2) {
  init_normal(weight, rng, init_gain / std::sqrt(static_cast<float>(cin * kernel * kernel)));
}

Tensor Conv2d::forward(const Tensor& x) {
  x_ = x;
  return kernels::conv2d_forward(x, weight.value, bias.value, stride_, pad_);
}

Tensor Conv2d::backward(const Tensor& grad_y, bool need_grad_x) {
  Tensor gx;
  kernels::conv2d_backward(x_, weight.value, grad_y, stride_, pad_, need_grad_x ? &gx : nullptr,
                           weight.grad, bias.grad);
  return gx;
}

GroupNorm::GroupNorm(const std::string& name, int channels, int groups)
    : gamma(make_param(name + ".gamma", ParamGroup::kOther, 1, channels, 1, 1)),
      beta(make_param(name + ".beta", ParamGroup::kOther, 1, channels, 1, 1)),
      groups_(groups) {
  if (channels % groups != 0) {
    throw DimensionError(name + ": " + std::to_string(channels) + " channels not divisible by " +
                         std::to_string(groups) + " groups");
  }
  gamma.value.fill(1.0f);
}

Tensor GroupNorm::forward(const Tensor& x) {
  x_ = x;
  return kernels::group_norm_forward(x, gamma.value, beta.value, groups_, 1e-5f, cache_);
}

Tensor GroupNorm::backward(const Tensor& grad_y) {
  return kernels::group_norm_backward(x_, gamma.value, grad_y, groups_, cache_, gamma.grad, beta.grad);
}

Linear::Linear(const std::string& name, int in, int out, ParamGroup group, std::mt19937_64& rng,
               float init_gain)
    : weight(make_param(name + ".weight", group, out, in, 1, 1)),
      bias(make_param(name + ".bias", group, 1, out, 1, 1)) {
  init_normal(weight, rng, init_gain / std::sqrt(static_cast<float>(in)));
}

Tensor Linear::forward(const Tensor& x) {
  x_ = x;
  return kernels::linear_forward(x, weight.value, bias.value);
}

Tensor Linear::backward(const Tensor& grad_y) {
  return kernels::linear_backward(x_, weight.value, grad_y, weight.grad, bias.grad);
}

ResBlock::ResBlock(const std::string& name, int cin, int cout, int emb_dim, int groups,
                   std::mt19937_64& rng)
    : norm1_(name + ".norm1", cin, groups),
      norm2_(name + ".norm2", cout, groups),
      conv1_(name + ".conv1", cin, cout, 3, 1, ParamGroup::kConv, rng, std::sqrt(2.0f)),
      conv2_(name + ".conv2", cout, cout, 3, 1, ParamGroup::kConv, rng, 0.0f),
      film_(name + ".film", emb_dim, 2 * cout, ParamGroup::kOther, rng, 0.5f),
      has_skip_(cin != cout) {
  if (has_skip_) skip_ = Conv2d(name + ".skip", cin, cout, 1, 1, ParamGroup::kConv, rng);
}

Tensor ResBlock::forward(const Tensor& x, const Tensor& emb) {
  Tensor h = conv1_.forward(act1_.forward(norm1_.forward(x)));
  h1_ = h;
  film_out_ = film_.forward(emb);
  h = kernels::film_forward(h, film_out_);
  h = conv2_.forward(act2_.forward(norm2_.forward(h)));
  Tensor out = has_skip_ ? skip_.forward(x) : x;
  add_into(out, h);
  return out;
}

Tensor ResBlock::backward(const Tensor& grad_y, Tensor& grad_emb) {
  Tensor g = norm2_.backward(act2_.backward(conv2_.backward(grad_y)));
  Tensor grad_film;
  g = kernels::film_backward(h1_, film_out_, g, grad_film);
  add_into(grad_emb, film_.backward(grad_film));
  Tensor gx = norm1_.backward(act1_.backward(conv1_.backward(g)));
  add_into(gx, has_skip_ ? skip_.backward(grad_y) : grad_y);
  return gx;
}

void ResBlock::collect(std::vector<Param*>& out) {
  norm1_.collect(out);
  conv1_.collect(out);
  film_.collect(out);
  norm2_.collect(out);
  conv2_.collect(out);
  if (has_skip_) skip_.collect(out);
}

AttentionBlock::AttentionBlock(const std::string& name, int channels, int groups,
                               std::mt19937_64& rng)
    : norm_(name + ".norm", channels, groups),
      qkv_(name + ".qkv", channels, 3 * channels, 1, 1, ParamGroup::kAttention, rng),
      proj_(name + ".proj", channels, channels, 1, 1, ParamGroup::kAttention, rng, 0.0f) {}

Tensor AttentionBlock::forward(const Tensor& x) {
  qkv_out_ = qkv_.forward(norm_.forward(x));
  Tensor out = proj_.forward(kernels::attention_forward(qkv_out_, probs_));
  add_into(out, x);
  return out;
}

Tensor AttentionBlock::backward(const Tensor& grad_y) {
  Tensor g = kernels::attention_backward(qkv_out_, probs_, proj_.backward(grad_y));
  Tensor gx = norm_.backward(qkv_.backward(g));
  add_into(gx, grad_y);
  return gx;
}

void AttentionBlock::collect(std::vector<Param*>& out) {
  norm_.collect(out);
  qkv_.collect(out);
  proj_.collect(out);
}

PromptEmbedding::PromptEmbedding(const std::string& name, int vocab_size, int dim,
                                 std::mt19937_64& rng)
    : dim_(dim),
      table_(make_param(name + ".tokens", ParamGroup::kOther, vocab_size, dim, 1, 1)),
      prefix_(make_param(name + ".fill_prefix", ParamGroup::kOther, 1, dim, 1, 1)),
      null_(make_param(name + ".null", ParamGroup::kOther, 1, dim, 1, 1)) {
  table_.value.fill_normal(rng, 1.0f);
  prefix_.value.fill_normal(rng, 1.0f);
  null_.value.fill_normal(rng, 1.0f);
}

Tensor PromptEmbedding::forward(std::span<const diffusion::PromptCode> prompts) {
  prompts_.assign(prompts.begin(), prompts.end());
  Tensor out(static_cast<int>(prompts.size()), dim_, 1, 1);
  std::vector<float> pos(dim_);
  for (std::size_t n = 0; n < prompts.size(); ++n) {
    float* dst = out.sample(static_cast<int>(n));
    const auto& p = prompts[n];
    if (p.null || p.tokens.empty()) {
      for (int d = 0; d < dim_; ++d) dst[d] = null_.value[d];
    } else {
      const float inv = 1.0f / static_cast<float>(p.tokens.size());
      for (std::size_t i = 0; i < p.tokens.size(); ++i) {
        const int tok = p.tokens[i];
        if (tok < 0 || tok >= table_.value.n()) throw IndexError("prompt token outside vocabulary");
        sinusoidal_code(static_cast<double>(i), dim_, pos.data());
        for (int d = 0; d < dim_; ++d) dst[d] += inv * (table_.value.sample(tok)[d] + pos[d]);
      }
      for (std::size_t i = 0; i < p.fields.size(); ++i) dst[i % dim_] += p.fields[i];
    }
    if (p.fill_prefix) {
      for (int d = 0; d < dim_; ++d) dst[d] += prefix_.value[d];
    }
  }
  return out;
}

void PromptEmbedding::backward(const Tensor& grad_y) {
  for (std::size_t n = 0; n < prompts_.size(); ++n) {
    const float* g = grad_y.sample(static_cast<int>(n));
    const auto& p = prompts_[n];
    if (p.null || p.tokens.empty()) {
      for (int d = 0; d < dim_; ++d) null_.grad[d] += g[d];
    } else {
      const float inv = 1.0f / static_cast<float>(p.tokens.size());
      for (int tok : p.tokens) {
        float* dst = table_.grad.sample(tok);
        for (int d = 0; d < dim_; ++d) dst[d] += inv * g[d];
      }
    }
    if (p.fill_prefix) {
      for (int d = 0; d < dim_; ++d) prefix_.grad[d] += g[d];
    }
  }
}

void PromptEmbedding::collect(std::vector<Param*>& out) {
  out.push_back(&table_);
  out.push_back(&prefix_);
  out.push_back(&null_);
}

}  // namespace gridvid::nn
