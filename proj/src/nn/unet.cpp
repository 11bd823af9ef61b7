// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/nn/unet.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "gridvid/errors.hpp"

namespace gridvid::nn {

namespace {

void add_into(Tensor& dst, const Tensor& src) {
  require_same_shape(dst, src, "unet gradient");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor concat2(const Tensor& a, const Tensor& b) {
  const std::array<const Tensor*, 2> parts{&a, &b};
  return concat_channels(parts);
}

}  // namespace

std::string UNetConfig::echo() const {
  std::ostringstream os;
  os << "base_channels=" << base_channels << ";image_conditions=" << image_conditions
     << ";widths=";
  for (std::size_t i = 0; i < widths.size(); ++i) os << (i ? "," : "") << widths[i];
  os << ";emb_dim=" << emb_dim << ";vocab_size=" << vocab_size << ";groups=" << groups
     << ";init_seed=" << init_seed << ";head=" << (v_head_alpha_bar.empty() ? "eps" : "v");
  return os.str();
}

UNetDenoiser::UNetDenoiser(const UNetConfig& config) : config_(config) {
  if (config.widths.size() != 3) throw ConfigError("unet expects exactly three widths");
  if (config.base_channels < 1 || config.image_conditions < 0) {
    throw ConfigError("unet channel counts must be positive");
  }
  std::mt19937_64 rng(config.init_seed);
  const int w0 = config.widths[0];
  const int w1 = config.widths[1];
  const int w2 = config.widths[2];
  const int e = config.emb_dim;
  const int g = config.groups;
  const int cin = base_channels() * (1 + image_conditions());
  in_conv_ = Conv2d("in_conv", cin, w0, 3, 1, ParamGroup::kConv, rng);
  enc0_ = ResBlock("enc0", w0, w0, e, g, rng);
  down0_ = Conv2d("down0", w0, w0, 3, 2, ParamGroup::kConv, rng);
  enc1_ = ResBlock("enc1", w0, w1, e, g, rng);
  down1_ = Conv2d("down1", w1, w1, 3, 2, ParamGroup::kConv, rng);
  mid0_ = ResBlock("mid0", w1, w2, e, g, rng);
  attn_ = AttentionBlock("mid_attn", w2, g, rng);
  mid1_ = ResBlock("mid1", w2, w2, e, g, rng);
  dec1_ = ResBlock("dec1", w2 + w1, w1, e, g, rng);
  dec0_ = ResBlock("dec0", w1 + w0, w0, e, g, rng);
  out_norm_ = GroupNorm("out_norm", w0, g);
  out_conv_ = Conv2d("out_conv", w0, base_channels(), 3, 1, ParamGroup::kConv, rng, 0.0f);
  prompt_ = PromptEmbedding("prompt", config.vocab_size, e, rng);
  emb0_ = Linear("emb0", e, e, ParamGroup::kOther, rng, std::sqrt(2.0f));
  emb1_ = Linear("emb1", e, e, ParamGroup::kOther, rng);
  skip0_c_ = w0;
  skip1_c_ = w1;
}

Tensor UNetDenoiser::embed(std::span<const int> timesteps,
                           std::span<const diffusion::PromptCode> prompts) {
  Tensor code = prompt_.forward(prompts);
  const int e = config_.emb_dim;
  std::vector<float> t_code(e);
  for (std::size_t n = 0; n < timesteps.size(); ++n) {
    sinusoidal_code(static_cast<double>(timesteps[n]), e, t_code.data());
    float* dst = code.sample(static_cast<int>(n));
    for (int d = 0; d < e; ++d) dst[d] += t_code[d];
  }
  return emb1_.forward(emb_act_.forward(emb0_.forward(code)));
}

Tensor UNetDenoiser::predict(const Tensor& input, std::span<const int> timesteps,
                             std::span<const diffusion::PromptCode> prompts) {
  if (input.c() != input_channels()) {
    throw DimensionError("denoiser expects " + std::to_string(input_channels()) +
                         " input channels, got " + std::to_string(input.c()));
  }
  if (input.h() % 4 != 0 || input.w() % 4 != 0) {
    throw DimensionError("denoiser latent side must be divisible by 4, got " +
                         input.shape_string());
  }
  if (static_cast<int>(timesteps.size()) != input.n() ||
      static_cast<int>(prompts.size()) != input.n()) {
    throw ArityError("denoiser batch, timestep and prompt counts differ");
  }
  emb_ = embed(timesteps, prompts);
  Tensor h0 = enc0_.forward(in_conv_.forward(input), emb_);
  Tensor h1 = enc1_.forward(down0_.forward(h0), emb_);
  Tensor m = mid0_.forward(down1_.forward(h1), emb_);
  m = mid1_.forward(attn_.forward(m), emb_);
  Tensor u1 = dec1_.forward(concat2(kernels::upsample2x_forward(m), h1), emb_);
  Tensor u0 = dec0_.forward(concat2(kernels::upsample2x_forward(u1), h0), emb_);
  Tensor out = out_conv_.forward(out_act_.forward(out_norm_.forward(u0)));
  v_scale_.clear();
  if (!config_.v_head_alpha_bar.empty()) {
    const auto& ab = config_.v_head_alpha_bar;
    for (int n = 0; n < out.n(); ++n) {
      const int t = timesteps[n];
      if (t < 0 || t >= static_cast<int>(ab.size())) throw IndexError("timestep outside the v-head table");
      const float a = static_cast<float>(std::sqrt(ab[t]));
      const float s = static_cast<float>(std::sqrt(1.0 - ab[t]));
      v_scale_.push_back(a);
      float* o = out.sample(n);
      const float* z = input.sample(n);
      for (std::size_t i = 0; i < out.plane() * out.c(); ++i) o[i] = a * o[i] + s * z[i];
    }
  }
  // Rough count: each stored activation appears a handful of times across
  // layer caches.
  activation_bytes_ = 4 * sizeof(float) *
                      (h0.size() * 2 + h1.size() * 2 + m.size() * 3 + u1.size() * 2 +
                       u0.size() * 2 + input.size());
  return out;
}

void UNetDenoiser::backward(const Tensor& grad_eps) {
  Tensor grad_emb(emb_.n(), emb_.c(), 1, 1);
  Tensor g_out = grad_eps;
  for (std::size_t n = 0; n < v_scale_.size(); ++n) {
    float* p = g_out.sample(static_cast<int>(n));
    for (std::size_t i = 0; i < g_out.plane() * g_out.c(); ++i) p[i] *= v_scale_[n];
  }
  Tensor g = out_norm_.backward(out_act_.backward(out_conv_.backward(g_out)));
  g = dec0_.backward(g, grad_emb);
  const int cu1 = g.c() - skip0_c_;
  Tensor g_h0 = slice_channels(g, cu1, skip0_c_);
  g = kernels::upsample2x_backward(slice_channels(g, 0, cu1));
  g = dec1_.backward(g, grad_emb);
  const int cm = g.c() - skip1_c_;
  Tensor g_h1 = slice_channels(g, cm, skip1_c_);
  g = kernels::upsample2x_backward(slice_channels(g, 0, cm));
  g = attn_.backward(mid1_.backward(g, grad_emb));
  g = down1_.backward(mid0_.backward(g, grad_emb));
  add_into(g_h1, g);
  g = down0_.backward(enc1_.backward(g_h1, grad_emb));
  add_into(g_h0, g);
  g = enc0_.backward(g_h0, grad_emb);
  in_conv_.backward(g, false);
  prompt_.backward(emb0_.backward(emb_act_.backward(emb1_.backward(grad_emb))));
}

std::vector<Param*> UNetDenoiser::parameters() {
  std::vector<Param*> out;
  in_conv_.collect(out);
  enc0_.collect(out);
  down0_.collect(out);
  enc1_.collect(out);
  down1_.collect(out);
  mid0_.collect(out);
  attn_.collect(out);
  mid1_.collect(out);
  dec1_.collect(out);
  dec0_.collect(out);
  out_norm_.collect(out);
  out_conv_.collect(out);
  prompt_.collect(out);
  emb0_.collect(out);
  emb1_.collect(out);
  return out;
}

std::size_t UNetDenoiser::parameter_count() {
  std::size_t n = 0;
  for (const Param* p : parameters()) n += p->value.size();
  return n;
}

}  // namespace gridvid::nn
