// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/latent_codec.hpp"

#include <charconv>

#include "gridvid/errors.hpp"

namespace gridvid {

Latent IdentityCodec::encode(const Frame& image) const {
  Latent z(1, image.channels(), image.height(), image.width());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) z.at(0, c, y, x) = image.at(x, y, c);
    }
  }
  return z;
}

Frame IdentityCodec::decode(const Latent& z) const {
  if (z.n() != 1) throw DimensionError("decode expects a single latent");
  Frame f(z.w(), z.h(), z.c());
  for (int y = 0; y < z.h(); ++y) {
    for (int x = 0; x < z.w(); ++x) {
      for (int c = 0; c < z.c(); ++c) f.at(x, y, c) = z.at(0, c, y, x);
    }
  }
  return f;
}

SpaceToDepthCodec::SpaceToDepthCodec(int p) : p_(p) {
  if (p < 1) throw DomainError("space-to-depth factor must be positive");
}

Latent SpaceToDepthCodec::encode(const Frame& image) const {
  if (image.width() % p_ != 0 || image.height() % p_ != 0) {
    throw DimensionError("image " + std::to_string(image.width()) + "x" +
                         std::to_string(image.height()) + " not divisible by " + std::to_string(p_));
  }
  const int ch = image.channels();
  Latent z(1, ch * p_ * p_, image.height() / p_, image.width() / p_);
  for (int y = 0; y < z.h(); ++y) {
    for (int x = 0; x < z.w(); ++x) {
      for (int dy = 0; dy < p_; ++dy) {
        for (int dx = 0; dx < p_; ++dx) {
          for (int c = 0; c < ch; ++c) {
            z.at(0, (dy * p_ + dx) * ch + c, y, x) = image.at(p_ * x + dx, p_ * y + dy, c);
          }
        }
      }
    }
  }
  return z;
}

Frame SpaceToDepthCodec::decode(const Latent& z) const {
  if (z.n() != 1) throw DimensionError("decode expects a single latent");
  if (z.c() % (p_ * p_) != 0) {
    throw DimensionError("latent channels " + std::to_string(z.c()) + " not divisible by " +
                         std::to_string(p_ * p_));
  }
  const int ch = z.c() / (p_ * p_);
  Frame f(z.w() * p_, z.h() * p_, ch);
  for (int y = 0; y < z.h(); ++y) {
    for (int x = 0; x < z.w(); ++x) {
      for (int dy = 0; dy < p_; ++dy) {
        for (int dx = 0; dx < p_; ++dx) {
          for (int c = 0; c < ch; ++c) {
            f.at(p_ * x + dx, p_ * y + dy, c) = z.at(0, (dy * p_ + dx) * ch + c, y, x);
          }
        }
      }
    }
  }
  return f;
}

std::unique_ptr<LatentCodec> make_codec(const std::string& id) {
  if (id == "identity") return std::make_unique<IdentityCodec>();
  if (id.rfind("s2d:", 0) == 0) {
    int p = 0;
    const char* first = id.data() + 4;
    const char* last = id.data() + id.size();
    auto [ptr, ec] = std::from_chars(first, last, p);
    if (ec == std::errc() && ptr == last && p >= 1) return std::make_unique<SpaceToDepthCodec>(p);
  }
  throw ConfigError("unknown latent codec '" + id + "' (expected identity or s2d:p)");
}

}  // namespace gridvid
