// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/diffusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gridvid/errors.hpp"

namespace gridvid::diffusion {

using nn::Tensor;

DiffusionSchedule make_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw DomainError("schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw DomainError("schedule needs 0 < beta_start <= beta_end < 1");
  }
  DiffusionSchedule s;
  s.betas_.resize(T);
  s.alpha_bars_.resize(T);
  double ab = 1.0;
  for (int t = 0; t < T; ++t) {
    const double beta =
        T == 1 ? beta_start : beta_start + (beta_end - beta_start) * t / static_cast<double>(T - 1);
    s.betas_[t] = beta;
    ab *= 1.0 - beta;
    s.alpha_bars_[t] = ab;
  }
  return s;
}

void Denoiser::backward(const Tensor&) {
  throw ContractError("this denoiser has no trainable parameters");
}

Tensor forward_noise(const Tensor& z0, int t, const Tensor& eps, const DiffusionSchedule& sched) {
  require_same_shape(z0, eps, "forward_noise");
  if (t < 0 || t > sched.steps()) throw DomainError("timestep outside 0..T");
  const double ab = sched.alpha_bar(t);
  const auto a = static_cast<float>(std::sqrt(ab));
  const auto b = static_cast<float>(std::sqrt(1.0 - ab));
  Tensor z(z0.n(), z0.c(), z0.h(), z0.w());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * z0[i] + b * eps[i];
  return z;
}

namespace {

Tensor with_conditions(const Tensor& z, const Tensor& conditions) {
  if (conditions.size() == 0) return z;
  const std::array<const Tensor*, 2> parts{&z, &conditions};
  return nn::concat_channels(parts);
}

}  // namespace

double training_loss(Denoiser& denoiser, std::span<const TrainingItem> batch,
                     const DiffusionSchedule& sched, std::mt19937_64& rng,
                     const LossOptions& options) {
  if (batch.empty()) throw DomainError("training_loss needs a nonempty batch");
  std::uniform_int_distribution<int> pick_t(1, sched.steps());
  std::bernoulli_distribution drop(options.prompt_dropout);
  std::vector<Tensor> inputs;
  std::vector<Tensor> noises;
  std::vector<int> timesteps;
  std::vector<PromptCode> prompts;
  inputs.reserve(batch.size());
  for (const TrainingItem& item : batch) {
    const int t = pick_t(rng);
    Tensor eps(item.z0.n(), item.z0.c(), item.z0.h(), item.z0.w());
    eps.fill_normal(rng);
    inputs.push_back(with_conditions(forward_noise(item.z0, t, eps, sched), item.conditions));
    noises.push_back(std::move(eps));
    timesteps.push_back(t);
    const bool dropped = options.prompt_dropout > 0.0 && drop(rng);
    prompts.push_back(dropped ? item.prompt.as_null() : item.prompt);
  }
  const Tensor input = nn::stack(inputs);
  const Tensor eps_all = nn::stack(noises);
  const Tensor pred = denoiser.predict(input, timesteps, prompts);
  nn::require_same_shape(pred, eps_all, "denoiser output");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Tensor grad(pred.n(), pred.c(), pred.h(), pred.w());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - eps_all[i];
    loss += d * d;
    grad[i] = static_cast<float>(2.0 * d * inv_b);
  }
  loss *= inv_b;
  if (!std::isfinite(loss)) throw NumericalError("training loss is not finite");
  if (options.backward) denoiser.backward(grad);
  return loss;
}

std::vector<int> timestep_subsequence(int T, int steps) {
  if (steps < 1 || steps > T) throw DomainError("sampler steps must lie in 1..T");
  std::vector<int> out;
  if (steps == 1) return {T};
  for (int i = steps - 1; i >= 0; --i) {
    out.push_back(static_cast<int>(std::lround(1.0 + (T - 1.0) * i / (steps - 1.0))));
  }
  return out;
}

Tensor sample_from(Denoiser& denoiser, Tensor z, const Tensor& conditions,
                   std::span<const PromptCode> prompts, const DiffusionSchedule& sched,
                   const SampleOptions& options, std::mt19937_64& rng) {
  if (static_cast<int>(prompts.size()) != z.n()) {
    throw ArityError("sampler needs one prompt per batch item");
  }
  if (conditions.size() != 0 && conditions.n() != z.n()) {
    throw ArityError("sampler conditions batch differs from latent batch");
  }
  const std::vector<int> taus = timestep_subsequence(sched.steps(), options.steps);
  const bool guided = options.guidance_scale != 1.0;
  std::vector<PromptCode> batch_prompts(prompts.begin(), prompts.end());
  if (guided) {
    for (const PromptCode& p : prompts) batch_prompts.push_back(p.as_null());
  }
  const int n = z.n();
  Tensor x0(z.n(), z.c(), z.h(), z.w());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const int t = taus[k];
    const int t_prev = k + 1 < taus.size() ? taus[k + 1] : 0;
    Tensor input = with_conditions(z, conditions);
    if (guided) {
      Tensor both(2 * n, input.c(), input.h(), input.w());
      std::copy(input.data(), input.data() + input.size(), both.data());
      std::copy(input.data(), input.data() + input.size(), both.data() + input.size());
      input = std::move(both);
    }
    const std::vector<int> ts(input.n(), t);
    Tensor eps = denoiser.predict(input, ts, batch_prompts);
    if (guided) {
      const double s = options.guidance_scale;
      const std::size_t half = z.size();
      Tensor mixed(z.n(), z.c(), z.h(), z.w());
      for (std::size_t i = 0; i < half; ++i) {
        const double u = eps[half + i];
        mixed[i] = static_cast<float>(u + s * (eps[i] - u));
      }
      eps = std::move(mixed);
    }
    nn::require_same_shape(eps, z, "denoiser output");
    const double ab = sched.alpha_bar(t);
    const double ab_prev = sched.alpha_bar(t_prev);
    const double sa = std::sqrt(ab);
    const double sb = std::sqrt(1.0 - ab);
    for (std::size_t i = 0; i < z.size(); ++i) {
      double v = (z[i] - sb * eps[i]) / sa;
      if (options.clip_denoised) v = std::clamp(v, -1.0, 1.0);
      x0[i] = static_cast<float>(v);
    }
    if (t_prev == 0) return x0;
    const double beta_eff = 1.0 - ab / ab_prev;
    const double coef_x0 = std::sqrt(ab_prev) * beta_eff / (1.0 - ab);
    const double coef_z = std::sqrt(1.0 - beta_eff) * (1.0 - ab_prev) / (1.0 - ab);
    const double sigma = std::sqrt(beta_eff * (1.0 - ab_prev) / (1.0 - ab));
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double mean = coef_x0 * x0[i] + coef_z * z[i];
      z[i] = static_cast<float>(mean + sigma * normal(rng));
    }
  }
  return x0;
}

Tensor sample(Denoiser& denoiser, const Tensor& conditions, std::span<const PromptCode> prompts,
              const Tensor& shape_like, const DiffusionSchedule& sched,
              const SampleOptions& options, std::mt19937_64& rng) {
  timestep_subsequence(sched.steps(), options.steps);
  Tensor z(shape_like.n(), shape_like.c(), shape_like.h(), shape_like.w());
  z.fill_normal(rng);
  return sample_from(denoiser, std::move(z), conditions, prompts, sched, options, rng);
}

std::string to_string(FreezeMode mode) {
  switch (mode) {
    case FreezeMode::kNone: return "none";
    case FreezeMode::kFreezeConv: return "freeze_conv";
    case FreezeMode::kFreezeAttn: return "freeze_attn";
  }
  return "none";
}

FreezeMode parse_freeze_mode(const std::string& text) {
  if (text == "none") return FreezeMode::kNone;
  if (text == "freeze_conv") return FreezeMode::kFreezeConv;
  if (text == "freeze_attn") return FreezeMode::kFreezeAttn;
  throw DomainError("unknown freeze mode '" + text + "'");
}

void set_freeze(Denoiser& denoiser, FreezeMode mode) {
  for (Param* p : denoiser.parameters()) {
    p->frozen = (mode == FreezeMode::kFreezeConv && p->group == ParamGroup::kConv) ||
                (mode == FreezeMode::kFreezeAttn && p->group == ParamGroup::kAttention);
  }
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(std::span<Param* const> params) {
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.emplace_back(p->value.size(), 0.0f);
      v_.emplace_back(p->value.size(), 0.0f);
    }
  }
  if (m_.size() != params.size()) throw ContractError("optimizer parameter list changed");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto b1 = static_cast<float>(beta1_);
  const auto b2 = static_cast<float>(beta2_);
  const auto step = static_cast<float>(lr_ / c1);
  const auto rc2 = static_cast<float>(1.0 / std::sqrt(c2));
  const auto eps = static_cast<float>(eps_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    if (p.frozen) continue;
    if (m_[k].size() != p.value.size()) throw ContractError("optimizer parameter shape changed");
    float* w = p.value.data();
    const float* g = p.grad.data();
    float* m = m_[k].data();
    float* v = v_[k].data();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      w[i] -= step * m[i] / (std::sqrt(v[i]) * rc2 + eps);
    }
  }
}

void Adam::zero_grad(std::span<Param* const> params) {
  for (Param* p : params) p->grad.zero();
}

}  // namespace gridvid::diffusion
