// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gridvid/diffusion.hpp"
#include "gridvid/grid_codec.hpp"
#include "gridvid/schedule.hpp"

namespace gridvid {

// Flat key=value run configuration. Lines starting with '#' and blank lines
// are ignored; unknown keys are rejected. Keys are listed in README.md.
struct RunConfig {
  // layout
  int grid_side = 2;
  int frame_size = 16;
  int gutter = 0;
  bool grid_4x4 = false;  // shorthand for grid_side = 4
  // schedule; key_stride 0 picks 9 for 2x2 and 15 for 4x4
  int key_stride = 0;
  schedule::ConditionPolicy condition_policy = schedule::ConditionPolicy::kChained;
  // codec and diffusion
  std::string latent_codec = "s2d:2";
  int diffusion_steps = 200;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int key_steps = 80;
  int interp_steps = 20;
  int nextkey_steps = 80;
  double guidance_scale = 1.0;
  bool clip_denoised = true;
  // ablations
  bool non_ar = false;
  diffusion::FreezeMode freeze = diffusion::FreezeMode::kNone;
  // denoiser
  std::vector<int> unet_widths{32, 48, 64};
  // "eps": the network output is the noise estimate. "v": the network predicts
  // v = sqrt(abar) eps - sqrt(1 - abar) x0 and the denoiser converts it to eps.
  std::string denoiser_head = "eps";
  int emb_dim = 64;
  int groups = 8;
  // training
  int train_steps = 2000;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double prompt_dropout = 0.1;
  double ema_decay = 0.999;
  std::uint64_t seed = 1;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  std::string to_text() const;
  void validate() const;

  int effective_grid_side() const noexcept { return grid_4x4 ? 4 : grid_side; }
  GridLayout layout() const;
  schedule::ScheduleParams schedule_params() const;
  diffusion::DiffusionSchedule diffusion_schedule() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace gridvid
