// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gridvid/checkpoint.hpp"
#include "gridvid/config.hpp"
#include "gridvid/corpus.hpp"
#include "gridvid/diffusion.hpp"
#include "gridvid/grid_codec.hpp"
#include "gridvid/latent_codec.hpp"
#include "gridvid/nn/unet.hpp"

namespace gridvid {

enum class ModelRole { kKeyGrid, kInterp1, kInterp2, kNextKeyGrid };
enum class Ablation { kAr, kNonAr };

inline constexpr ModelRole kAllRoles[] = {ModelRole::kKeyGrid, ModelRole::kInterp1,
                                          ModelRole::kInterp2, ModelRole::kNextKeyGrid};

// "key", "interp1", "interp2", "nextkey".
std::string to_string(ModelRole role);
ModelRole parse_role(const std::string& text);

bool is_interpolator(ModelRole role) noexcept;
// Interpolation level served by a role (1 or 2); 0 for the key-grid roles.
int role_level(ModelRole role) noexcept;
ModelRole role_for_level(int level);

int image_conditions(ModelRole role, Ablation ablation) noexcept;
int conditioning_channels(ModelRole role, Ablation ablation, int base_channels) noexcept;

// A denoiser bound to its role, layout, codec and schedule.
class TrainedModel {
 public:
  TrainedModel(ModelRole role, const RunConfig& config);

  ModelRole role() const noexcept { return role_; }
  const RunConfig& config() const noexcept { return config_; }
  GridLayout layout() const { return config_.layout(); }
  const LatentCodec& codec() const noexcept { return *codec_; }
  const diffusion::DiffusionSchedule& diffusion_schedule() const noexcept { return sched_; }
  Ablation ablation() const noexcept { return config_.non_ar ? Ablation::kNonAr : Ablation::kAr; }
  int base_channels() const noexcept { return denoiser_.base_channels(); }
  int latent_side() const;

  nn::UNetDenoiser& denoiser() noexcept { return denoiser_; }
  std::uint64_t step() const noexcept { return step_; }
  void set_step(std::uint64_t step) noexcept { step_ = step; }
  // role@<config digest>:<step>
  std::string id() const;

  Latent encode(const GridImage& grid) const { return codec_->encode(grid.canvas); }
  GridImage decode(const Latent& latent) const;

  // Sampler settings for this role from the config.
  diffusion::SampleOptions sample_options() const;
  diffusion::PromptCode prompt_code(const std::string& prompt) const;

  Checkpoint to_checkpoint();
  // Throws ContractError when expected is set and differs from the stored role.
  static TrainedModel from_checkpoint(const Checkpoint& ckpt,
                                      std::optional<ModelRole> expected = std::nullopt);
  void save(const std::filesystem::path& path);
  static TrainedModel load(const std::filesystem::path& path,
                           std::optional<ModelRole> expected = std::nullopt);

 private:
  ModelRole role_;
  RunConfig config_;
  std::shared_ptr<const LatentCodec> codec_;
  diffusion::DiffusionSchedule sched_;
  nn::UNetDenoiser denoiser_;
  std::uint64_t step_ = 0;
};

// Checks every video admits the role's training construction.
void require_trainable(ModelRole role, const RunConfig& config,
                       std::span<const corpus::Video> dataset);

// One training example for the role drawn from the video:
//   key:     target = key-stride frames from a random start, prompt only
//   interp:  schedule training_sample at the level stride; target = input
//            grid, conditions = (masked input, previous grid)
//   nextkey: target = key grid of the following segment, condition = key grid
diffusion::TrainingItem make_training_item(const TrainedModel& model, const corpus::Video& video,
                                           std::mt19937_64& rng);

struct TrainOptions {
  int steps = 0;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double prompt_dropout = 0.1;
  // Exponential moving average of the weights, copied into the model when
  // training ends. 0 keeps the final iterate.
  double ema_decay = 0.0;
  std::function<void(int step, double loss)> on_step;

  static TrainOptions from_config(const RunConfig& config);
};

struct TrainReport {
  std::vector<double> losses;
  double seconds = 0.0;
};

TrainReport train_role(TrainedModel& model, std::span<const corpus::Video> dataset,
                       const TrainOptions& options, std::mt19937_64& rng);

GridImage generate_key_grid(TrainedModel& model, const std::string& prompt,
                            const diffusion::SampleOptions& options, std::mt19937_64& rng);
// Batched version: one grid per prompt.
std::vector<GridImage> generate_key_grids(TrainedModel& model,
                                          std::span<const std::string> prompts,
                                          const diffusion::SampleOptions& options,
                                          std::mt19937_64& rng);

// Fills the masked interior cells. Known cells of masked_input are copied
// into the result unchanged. condition is ignored by non-autoregressive
// models and may be empty for them.
GridImage interpolate(TrainedModel& model, const GridImage& masked_input,
                      const GridImage& condition, const std::string& prompt,
                      const diffusion::SampleOptions& options, std::mt19937_64& rng);

GridImage next_key_grid(TrainedModel& model, const GridImage& previous_key,
                        const std::string& prompt, const diffusion::SampleOptions& options,
                        std::mt19937_64& rng);

}  // namespace gridvid
