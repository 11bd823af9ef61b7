// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gridvid/corpus.hpp"
#include "gridvid/diffusion.hpp"
#include "gridvid/frame.hpp"
#include "gridvid/grid_codec.hpp"
#include "gridvid/nn/tensor.hpp"

namespace gridvid::testing {

inline Frame random_frame(std::mt19937_64& rng, int w, int h, int c = 3) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Frame f(w, h, c);
  for (float& v : f.data()) v = u(rng);
  return f;
}

inline std::vector<Frame> random_frames(std::mt19937_64& rng, int n, int size, int c = 3) {
  std::vector<Frame> out;
  for (int i = 0; i < n; ++i) out.push_back(random_frame(rng, size, size, c));
  return out;
}

inline nn::Tensor random_tensor(std::mt19937_64& rng, int n, int c, int h, int w,
                                float stddev = 1.0f) {
  nn::Tensor t(n, c, h, w);
  t.fill_normal(rng, stddev);
  return t;
}

inline double max_abs_diff(const nn::Tensor& a, const nn::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - b[i]));
  return m;
}

inline double relative_diff(const nn::Tensor& a, const nn::Tensor& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
    den += double(b[i]) * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

inline std::filesystem::path temp_dir(const std::string& name) {
#ifdef GRIDVID_TEST_TMP
  const std::filesystem::path root = GRIDVID_TEST_TMP;
#else
  const std::filesystem::path root = std::filesystem::temp_directory_path() / "gridvid_tests";
#endif
  const auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline corpus::SceneSpec scene(corpus::Shape shape, corpus::Color color, corpus::Direction dir,
                               double speed, double x, double y, int frame_size = 16,
                               corpus::Background bg = corpus::Background::kBlack) {
  corpus::SceneSpec s;
  s.shape = shape;
  s.color = color;
  s.direction = dir;
  s.speed = speed;
  s.start_x = x;
  s.start_y = y;
  s.background = bg;
  s.frame_size = frame_size;
  s.shape_size = corpus::default_shape_size(frame_size);
  return s;
}

inline corpus::Video video_of(const corpus::SceneSpec& s, int n) {
  corpus::Video v;
  v.frames = corpus::render_video(s, n);
  v.scene = s;
  v.prompt = corpus::prompt_of(s);
  return v;
}

// Predicts zero noise.
class ZeroDenoiser final : public diffusion::Denoiser {
 public:
  explicit ZeroDenoiser(int channels, int conditions = 0)
      : channels_(channels), conditions_(conditions) {}
  int base_channels() const override { return channels_; }
  int image_conditions() const override { return conditions_; }
  nn::Tensor predict(const nn::Tensor& input, std::span<const int>,
                     std::span<const diffusion::PromptCode>) override {
    ++calls;
    last_batch = input.n();
    return nn::Tensor(input.n(), channels_, input.h(), input.w());
  }
  int calls = 0;
  int last_batch = 0;

 private:
  int channels_;
  int conditions_;
};

// Knows the clean latent and returns the exact noise for any z_t.
class OracleDenoiser final : public diffusion::Denoiser {
 public:
  OracleDenoiser(nn::Tensor z0, diffusion::DiffusionSchedule sched)
      : z0_(std::move(z0)), sched_(std::move(sched)) {}
  int base_channels() const override { return z0_.c(); }
  int image_conditions() const override { return 0; }
  nn::Tensor predict(const nn::Tensor& input, std::span<const int> ts,
                     std::span<const diffusion::PromptCode>) override {
    nn::Tensor eps(input.n(), input.c(), input.h(), input.w());
    const std::size_t per = input.sample_size();
    for (int n = 0; n < input.n(); ++n) {
      const double ab = sched_.alpha_bar(ts[n]);
      for (std::size_t i = 0; i < per; ++i) {
        const double zt = input[n * per + i];
        const double x0 = z0_[(n % z0_.n()) * per + i];
        eps[n * per + i] = static_cast<float>((zt - std::sqrt(ab) * x0) / std::sqrt(1.0 - ab));
      }
    }
    return eps;
  }

 private:
  nn::Tensor z0_;
  diffusion::DiffusionSchedule sched_;
};

// eps_hat = a * z_t + b with scalar parameters a and b.
class AffineToyDenoiser final : public diffusion::Denoiser {
 public:
  AffineToyDenoiser(float a, float b, int channels) : channels_(channels) {
    a_.name = "a";
    a_.group = diffusion::ParamGroup::kConv;
    a_.value = nn::Tensor(1, 1, 1, 1, a);
    a_.grad = nn::Tensor(1, 1, 1, 1);
    b_.name = "b";
    b_.group = diffusion::ParamGroup::kOther;
    b_.value = nn::Tensor(1, 1, 1, 1, b);
    b_.grad = nn::Tensor(1, 1, 1, 1);
  }
  int base_channels() const override { return channels_; }
  int image_conditions() const override { return 0; }
  nn::Tensor predict(const nn::Tensor& input, std::span<const int>,
                     std::span<const diffusion::PromptCode>) override {
    x_ = input;
    nn::Tensor y(input.n(), input.c(), input.h(), input.w());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a_.value[0] * input[i] + b_.value[0];
    return y;
  }
  void backward(const nn::Tensor& g) override {
    double ga = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga += double(g[i]) * x_[i];
      gb += g[i];
    }
    a_.grad[0] += static_cast<float>(ga);
    b_.grad[0] += static_cast<float>(gb);
  }
  std::vector<diffusion::Param*> parameters() override { return {&a_, &b_}; }
  bool trainable() const override { return true; }

  diffusion::Param a_, b_;

 private:
  int channels_;
  nn::Tensor x_;
};

}  // namespace gridvid::testing
