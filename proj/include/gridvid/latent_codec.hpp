// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "gridvid/frame.hpp"
#include "gridvid/nn/tensor.hpp"

namespace gridvid {

// A latent is a single-sample (1, C, H, W) tensor.
using Latent = nn::Tensor;

// Exact, invertible image <-> latent transform.
class LatentCodec {
 public:
  virtual ~LatentCodec() = default;

  virtual Latent encode(const Frame& image) const = 0;
  virtual Frame decode(const Latent& latent) const = 0;

  // Spatial compression factor p.
  virtual int factor() const noexcept = 0;
  // Latent channels per image channel.
  virtual int channel_multiplier() const noexcept = 0;
  virtual std::string id() const = 0;

  int latent_channels(int image_channels) const noexcept {
    return image_channels * channel_multiplier();
  }
};

// latent = image, rearranged to planar CHW.
class IdentityCodec final : public LatentCodec {
 public:
  Latent encode(const Frame& image) const override;
  Frame decode(const Latent& latent) const override;
  int factor() const noexcept override { return 1; }
  int channel_multiplier() const noexcept override { return 1; }
  std::string id() const override { return "identity"; }
};

// Each p x p block becomes p*p*channels latent channels at 1/p resolution.
// Latent channel (dy * p + dx) * channels + c holds pixel (p*y+dy, p*x+dx, c).
class SpaceToDepthCodec final : public LatentCodec {
 public:
  explicit SpaceToDepthCodec(int p);
  Latent encode(const Frame& image) const override;
  Frame decode(const Latent& latent) const override;
  int factor() const noexcept override { return p_; }
  int channel_multiplier() const noexcept override { return p_ * p_; }
  std::string id() const override { return "s2d:" + std::to_string(p_); }

 private:
  int p_;
};

// Parses "identity" or "s2d:p".
std::unique_ptr<LatentCodec> make_codec(const std::string& id);

}  // namespace gridvid
