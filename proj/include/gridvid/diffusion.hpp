// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "gridvid/nn/tensor.hpp"

namespace gridvid::diffusion {

// Linear-beta DDPM schedule. Timesteps are 1-based; alpha_bar(0) == 1.
class DiffusionSchedule {
 public:
  DiffusionSchedule() = default;

  int steps() const noexcept { return static_cast<int>(betas_.size()); }
  double beta(int t) const { return betas_.at(t - 1); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bars_.at(t - 1); }

  const std::vector<double>& betas() const noexcept { return betas_; }
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bars_; }

  double beta_start() const noexcept { return betas_.front(); }
  double beta_end() const noexcept { return betas_.back(); }

 private:
  friend DiffusionSchedule make_schedule(int, double, double);
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

DiffusionSchedule make_schedule(int T = 200, double beta_start = 1e-4, double beta_end = 0.02);

// Prompt conditioning as seen by a denoiser: token ids from the closed
// vocabulary, the "Fill in the blanks" prefix flag, the null prompt used
// for classifier-free guidance, and a fixed one-hot code of the parsed
// categorical fields (may be empty).
struct PromptCode {
  std::vector<int> tokens;
  bool fill_prefix = false;
  bool null = false;
  std::vector<float> fields;

  PromptCode as_null() const { return {{}, fill_prefix, true, {}}; }
  friend bool operator==(const PromptCode&, const PromptCode&) = default;
};

enum class ParamGroup { kConv, kAttention, kOther };

struct Param {
  std::string name;
  ParamGroup group = ParamGroup::kOther;
  nn::Tensor value;
  nn::Tensor grad;
  bool frozen = false;
};

// Conditional epsilon predictor. The input is the noisy latent z_t followed by
// image_conditions() condition latents, concatenated along channels; the
// output has z_t's shape. Instances cache activations for backward(), so one
// instance serves one thread; copy the model to sample concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual int base_channels() const = 0;
  virtual int image_conditions() const = 0;
  int input_channels() const { return base_channels() * (1 + image_conditions()); }

  virtual nn::Tensor predict(const nn::Tensor& input, std::span<const int> timesteps,
                             std::span<const PromptCode> prompts) = 0;

  // Accumulates parameter gradients for the last predict() call.
  virtual void backward(const nn::Tensor& grad_eps);
  virtual std::vector<Param*> parameters() { return {}; }
  virtual bool trainable() const { return false; }
};

// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps
nn::Tensor forward_noise(const nn::Tensor& z0, int t, const nn::Tensor& eps,
                         const DiffusionSchedule& sched);

struct TrainingItem {
  nn::Tensor z0;          // (1, C, H, W)
  nn::Tensor conditions;  // (1, k*C, H, W) or empty
  PromptCode prompt;
};

struct LossOptions {
  // Replace the prompt by the null prompt with this probability.
  double prompt_dropout = 0.0;
  // Accumulate parameter gradients through Denoiser::backward.
  bool backward = true;
};

// Mean over the batch of ||eps - eps_hat(z_t, t, conditions, prompt)||^2 with
// t uniform in 1..T and eps standard normal.
double training_loss(Denoiser& denoiser, std::span<const TrainingItem> batch,
                     const DiffusionSchedule& sched, std::mt19937_64& rng,
                     const LossOptions& options = {});

// Evenly spaced descending timesteps, always containing T and 1.
std::vector<int> timestep_subsequence(int T, int steps);

struct SampleOptions {
  int steps = 20;
  double guidance_scale = 1.0;
  bool clip_denoised = true;
};

// Ancestral sampling over the strided subsequence. conditions is
// (N, k*C, H, W) or empty; shape gives (N, C, H, W) of the result.
nn::Tensor sample(Denoiser& denoiser, const nn::Tensor& conditions,
                  std::span<const PromptCode> prompts, const nn::Tensor& shape_like,
                  const DiffusionSchedule& sched, const SampleOptions& options,
                  std::mt19937_64& rng);

// Same as sample() but starting from the given z_T.
nn::Tensor sample_from(Denoiser& denoiser, nn::Tensor z, const nn::Tensor& conditions,
                       std::span<const PromptCode> prompts, const DiffusionSchedule& sched,
                       const SampleOptions& options, std::mt19937_64& rng);

enum class FreezeMode { kNone, kFreezeConv, kFreezeAttn };

std::string to_string(FreezeMode mode);
FreezeMode parse_freeze_mode(const std::string& text);

// Marks the parameters of the frozen group; the optimizer skips them.
void set_freeze(Denoiser& denoiser, FreezeMode mode);

// Adam over a fixed parameter list; frozen parameters are skipped.
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<Param* const> params);
  static void zero_grad(std::span<Param* const> params);
  long long iterations() const noexcept { return t_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long long t_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

}  // namespace gridvid::diffusion
