// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gridvid/diffusion.hpp"
#include "gridvid/nn/layers.hpp"

namespace gridvid::nn {

struct UNetConfig {
  int base_channels = 12;
  int image_conditions = 0;
  std::vector<int> widths{32, 48, 64};
  int emb_dim = 64;
  int vocab_size = 29;
  int groups = 8;
  std::uint64_t init_seed = 1;
  // Non-empty: the network output is read as v and converted to eps with
  // these cumulative alphas, indexed by timestep (entry 0 is t = 0).
  std::vector<double> v_head_alpha_bar;

  // key=value echo stored in checkpoints.
  std::string echo() const;
  friend bool operator==(const UNetConfig&, const UNetConfig&) = default;
};

// Small encoder-decoder epsilon predictor: two stride-2 downsamplings, a
// self-attention block at the bottleneck, nearest upsampling with skip
// concatenation, and FiLM modulation from the timestep + prompt embedding.
// The latent side must be divisible by 4.
class UNetDenoiser final : public diffusion::Denoiser {
 public:
  explicit UNetDenoiser(const UNetConfig& config);

  int base_channels() const override { return config_.base_channels; }
  int image_conditions() const override { return config_.image_conditions; }
  const UNetConfig& config() const noexcept { return config_; }

  Tensor predict(const Tensor& input, std::span<const int> timesteps,
                 std::span<const diffusion::PromptCode> prompts) override;
  void backward(const Tensor& grad_eps) override;
  std::vector<Param*> parameters() override;
  bool trainable() const override { return true; }

  std::size_t parameter_count();
  // Bytes of activations cached by the last predict() call.
  std::size_t activation_bytes() const noexcept { return activation_bytes_; }

 private:
  Tensor embed(std::span<const int> timesteps, std::span<const diffusion::PromptCode> prompts);

  UNetConfig config_;
  Conv2d in_conv_;
  ResBlock enc0_, enc1_;
  Conv2d down0_, down1_;
  ResBlock mid0_, mid1_;
  AttentionBlock attn_;
  ResBlock dec1_, dec0_;
  GroupNorm out_norm_;
  Silu out_act_;
  Conv2d out_conv_;
  PromptEmbedding prompt_;
  Linear emb0_, emb1_;
  Silu emb_act_;

  Tensor emb_;
  std::vector<float> v_scale_;
  int skip0_c_ = 0;
  int skip1_c_ = 0;
  std::size_t activation_bytes_ = 0;
};

}  // namespace gridvid::nn
