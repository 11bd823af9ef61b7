// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/models.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>

#include "gridvid/errors.hpp"

namespace gridvid {

using diffusion::PromptCode;
using diffusion::TrainingItem;
using nn::Tensor;

std::string to_string(ModelRole role) {
  switch (role) {
    case ModelRole::kKeyGrid: return "key";
    case ModelRole::kInterp1: return "interp1";
    case ModelRole::kInterp2: return "interp2";
    case ModelRole::kNextKeyGrid: return "nextkey";
  }
  return "key";
}

ModelRole parse_role(const std::string& text) {
  for (ModelRole r : kAllRoles) {
    if (to_string(r) == text) return r;
  }
  throw DomainError("unknown model role '" + text + "'");
}

bool is_interpolator(ModelRole role) noexcept {
  return role == ModelRole::kInterp1 || role == ModelRole::kInterp2;
}

int role_level(ModelRole role) noexcept {
  if (role == ModelRole::kInterp1) return 1;
  if (role == ModelRole::kInterp2) return 2;
  return 0;
}

ModelRole role_for_level(int level) {
  if (level == 1) return ModelRole::kInterp1;
  if (level == 2) return ModelRole::kInterp2;
  throw DomainError("no interpolation role for level " + std::to_string(level));
}

int image_conditions(ModelRole role, Ablation ablation) noexcept {
  switch (role) {
    case ModelRole::kKeyGrid: return 0;
    case ModelRole::kNextKeyGrid: return 1;
    case ModelRole::kInterp1:
    case ModelRole::kInterp2: return ablation == Ablation::kNonAr ? 1 : 2;
  }
  return 0;
}

int conditioning_channels(ModelRole role, Ablation ablation, int base_channels) noexcept {
  return base_channels * (1 + image_conditions(role, ablation));
}

namespace {

nn::UNetConfig unet_config(ModelRole role, const RunConfig& config, const LatentCodec& codec) {
  nn::UNetConfig u;
  u.base_channels = codec.latent_channels(3);
  u.image_conditions =
      image_conditions(role, config.non_ar ? Ablation::kNonAr : Ablation::kAr);
  u.widths = config.unet_widths;
  u.emb_dim = config.emb_dim;
  u.vocab_size = corpus::vocabulary_size();
  u.groups = config.groups;
  u.init_seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(role) + 1;
  if (config.denoiser_head == "v") {
    const auto& ab = config.diffusion_schedule().alpha_bars();
    u.v_head_alpha_bar.assign(1, 1.0);
    u.v_head_alpha_bar.insert(u.v_head_alpha_bar.end(), ab.begin(), ab.end());
  }
  return u;
}

void require_role(const TrainedModel& model, bool ok, const char* what) {
  if (!ok) throw ContractError(std::string(what) + " called on a " + to_string(model.role()) + " model");
}

void require_layout(const TrainedModel& model, const GridImage& grid, const char* what) {
  if (!(grid.layout == model.layout())) {
    throw ContractError(std::string(what) + ": grid layout does not match the model layout");
  }
}

std::vector<Frame> select_frames(const corpus::Video& video, std::span<const int> indices) {
  std::vector<Frame> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(video.frames.at(static_cast<std::size_t>(i)));
  return out;
}

std::vector<int> offset(std::vector<int> indices, int start) {
  for (int& i : indices) i += start;
  return indices;
}

int required_length(ModelRole role, const schedule::ScheduleParams& params) {
  const int k = params.frames_per_grid();
  switch (role) {
    case ModelRole::kKeyGrid: return params.segment_length();
    case ModelRole::kNextKeyGrid: return 2 * params.segment_length();
    case ModelRole::kInterp1:
    case ModelRole::kInterp2: {
      if (role_level(role) > params.levels()) {
        throw ConfigError(to_string(role) + " has no level in a schedule with " +
                          std::to_string(params.levels()) + " levels");
      }
      return schedule::min_training_length(params.level_strides()[role_level(role) - 1], k);
    }
  }
  return 0;
}

Tensor concat2(const Tensor& a, const Tensor& b) {
  const std::array<const Tensor*, 2> parts{&a, &b};
  return nn::concat_channels(parts);
}

}  // namespace

TrainedModel::TrainedModel(ModelRole role, const RunConfig& config)
    : role_(role),
      config_(config),
      codec_(make_codec(config.latent_codec)),
      sched_(config.diffusion_schedule()),
      denoiser_(unet_config(role, config, *codec_)) {
  config_.validate();
}

int TrainedModel::latent_side() const { return layout().canvas_size() / codec_->factor(); }

std::string TrainedModel::id() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08llx",
                static_cast<unsigned long long>(schedule::fnv1a(config_.to_text()) & 0xffffffffULL));
  return to_string(role_) + "@" + buf + ":" + std::to_string(step_);
}

GridImage TrainedModel::decode(const Latent& latent) const {
  GridImage g;
  g.layout = layout();
  g.canvas = codec_->decode(latent);
  g.canvas.clamp();
  clear_gutters(g);
  return g;
}

diffusion::SampleOptions TrainedModel::sample_options() const {
  diffusion::SampleOptions o;
  o.steps = role_ == ModelRole::kKeyGrid       ? config_.key_steps
            : role_ == ModelRole::kNextKeyGrid ? config_.nextkey_steps
                                               : config_.interp_steps;
  o.guidance_scale = config_.guidance_scale;
  o.clip_denoised = config_.clip_denoised;
  return o;
}

PromptCode TrainedModel::prompt_code(const std::string& prompt) const {
  PromptCode code{corpus::tokenize(prompt), is_interpolator(role_), false, {}};
  if (code.tokens.empty()) return code;
  const corpus::PromptFields f = corpus::parse_prompt(prompt);
  const std::array<std::pair<int, int>, 5> slots{{
      {static_cast<int>(f.shape), corpus::kShapeCount},
      {static_cast<int>(f.color), corpus::kColorCount},
      {static_cast<int>(f.direction), corpus::kDirectionCount},
      {static_cast<int>(f.pace), 3},
      {static_cast<int>(f.background), corpus::kBackgroundCount},
  }};
  for (auto [value, count] : slots) {
    const std::size_t base = code.fields.size();
    code.fields.resize(base + count, 0.0f);
    code.fields[base + value] = 1.0f;
  }
  return code;
}

Checkpoint TrainedModel::to_checkpoint() {
  Checkpoint c;
  c.role = to_string(role_);
  c.config = config_.to_text();
  c.step = step_;
  const auto params = denoiser_.parameters();
  c.tensors = snapshot(params);
  return c;
}

TrainedModel TrainedModel::from_checkpoint(const Checkpoint& ckpt,
                                           std::optional<ModelRole> expected) {
  const ModelRole role = parse_role(ckpt.role);
  if (expected && *expected != role) {
    throw ContractError("checkpoint holds a " + ckpt.role + " model, expected " +
                        to_string(*expected));
  }
  TrainedModel m(role, RunConfig::parse(ckpt.config));
  const auto params = m.denoiser_.parameters();
  restore(params, ckpt.tensors);
  m.step_ = ckpt.step;
  return m;
}

void TrainedModel::save(const std::filesystem::path& path) { save_checkpoint(to_checkpoint(), path); }

TrainedModel TrainedModel::load(const std::filesystem::path& path,
                                std::optional<ModelRole> expected) {
  return from_checkpoint(load_checkpoint(path), expected);
}

void require_trainable(ModelRole role, const RunConfig& config,
                       std::span<const corpus::Video> dataset) {
  if (dataset.empty()) throw InsufficientLengthError("training needs at least one video");
  const int need = required_length(role, config.schedule_params());
  for (const corpus::Video& v : dataset) {
    if (static_cast<int>(v.frames.size()) < need) {
      throw InsufficientLengthError(to_string(role) + " training needs videos of at least " +
                                    std::to_string(need) + " frames, got " +
                                    std::to_string(v.frames.size()));
    }
  }
}

TrainingItem make_training_item(const TrainedModel& model, const corpus::Video& video,
                                std::mt19937_64& rng) {
  const schedule::ScheduleParams params = model.config().schedule_params();
  const GridLayout layout = model.layout();
  const int len = static_cast<int>(video.frames.size());
  const int need = required_length(model.role(), params);
  if (len < need) {
    throw InsufficientLengthError("video of " + std::to_string(len) + " frames, need " +
                                  std::to_string(need));
  }
  TrainingItem item;
  item.prompt = model.prompt_code(video.prompt);
  switch (model.role()) {
    case ModelRole::kKeyGrid: {
      std::uniform_int_distribution<int> pick(0, len - need);
      const auto idx = offset(schedule::key_indices(0, params), pick(rng));
      item.z0 = model.encode(pack(select_frames(video, idx), layout));
      break;
    }
    case ModelRole::kNextKeyGrid: {
      std::uniform_int_distribution<int> pick(0, len - need);
      const int s = pick(rng);
      const auto cond = offset(schedule::key_indices(0, params), s);
      const auto next = offset(schedule::key_indices(1, params), s);
      item.z0 = model.encode(pack(select_frames(video, next), layout));
      item.conditions = model.encode(pack(select_frames(video, cond), layout));
      break;
    }
    case ModelRole::kInterp1:
    case ModelRole::kInterp2: {
      const int d = params.level_strides()[role_level(model.role()) - 1];
      const schedule::TrainingSample ts =
          schedule::training_sample(len, d, rng, params.frames_per_grid());
      const GridImage input = pack(select_frames(video, ts.input_indices), layout);
      const Latent masked = model.encode(apply_mask(input, ts.mask_positions));
      item.z0 = model.encode(input);
      if (model.ablation() == Ablation::kNonAr) {
        item.conditions = masked;
      } else {
        item.conditions =
            concat2(masked, model.encode(pack(select_frames(video, ts.cond_indices), layout)));
      }
      break;
    }
  }
  return item;
}

TrainOptions TrainOptions::from_config(const RunConfig& config) {
  TrainOptions o;
  o.steps = config.train_steps;
  o.batch_size = config.batch_size;
  o.learning_rate = config.learning_rate;
  o.prompt_dropout = config.prompt_dropout;
  o.ema_decay = config.ema_decay;
  return o;
}

TrainReport train_role(TrainedModel& model, std::span<const corpus::Video> dataset,
                       const TrainOptions& options, std::mt19937_64& rng) {
  require_trainable(model.role(), model.config(), dataset);
  const auto start = std::chrono::steady_clock::now();
  auto& net = model.denoiser();
  diffusion::set_freeze(net, model.config().freeze);
  const std::vector<diffusion::Param*> params = net.parameters();
  diffusion::Adam adam(options.learning_rate);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  diffusion::LossOptions loss_opts;
  loss_opts.prompt_dropout = options.prompt_dropout;
  TrainReport report;
  std::vector<TrainingItem> batch(static_cast<std::size_t>(options.batch_size));
  std::vector<std::vector<float>> ema;
  if (options.ema_decay > 0.0) {
    for (const auto* p : params) ema.emplace_back(p->value.span().begin(), p->value.span().end());
  }
  for (int step = 0; step < options.steps; ++step) {
    for (TrainingItem& item : batch) item = make_training_item(model, dataset[pick(rng)], rng);
    diffusion::Adam::zero_grad(params);
    const double loss =
        diffusion::training_loss(net, batch, model.diffusion_schedule(), rng, loss_opts);
    adam.step(params);
    if (!ema.empty()) {
      // Short warm-up so early weights do not dominate short runs.
      const float decay = static_cast<float>(std::min(options.ema_decay, (1.0 + step) / (10.0 + step)));
      for (std::size_t i = 0; i < params.size(); ++i) {
        const auto v = params[i]->value.span();
        for (std::size_t k = 0; k < v.size(); ++k) ema[i][k] = decay * ema[i][k] + (1.0f - decay) * v[k];
      }
    }
    model.set_step(model.step() + 1);
    report.losses.push_back(loss);
    if (options.on_step) options.on_step(step, loss);
  }
  for (std::size_t i = 0; i < ema.size(); ++i) {
    std::copy(ema[i].begin(), ema[i].end(), params[i]->value.span().begin());
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<GridImage> generate_key_grids(TrainedModel& model,
                                          std::span<const std::string> prompts,
                                          const diffusion::SampleOptions& options,
                                          std::mt19937_64& rng) {
  require_role(model, model.role() == ModelRole::kKeyGrid, "generate_key_grid");
  std::vector<PromptCode> codes;
  for (const std::string& p : prompts) codes.push_back(model.prompt_code(p));
  const int side = model.latent_side();
  const Tensor shape(static_cast<int>(prompts.size()), model.base_channels(), side, side);
  const Tensor z = diffusion::sample(model.denoiser(), Tensor(), codes, shape,
                                     model.diffusion_schedule(), options, rng);
  std::vector<GridImage> out;
  for (int i = 0; i < z.n(); ++i) out.push_back(model.decode(nn::sample_of(z, i)));
  return out;
}

GridImage generate_key_grid(TrainedModel& model, const std::string& prompt,
                            const diffusion::SampleOptions& options, std::mt19937_64& rng) {
  const std::array<std::string, 1> prompts{prompt};
  return std::move(generate_key_grids(model, prompts, options, rng).front());
}

GridImage interpolate(TrainedModel& model, const GridImage& masked_input,
                      const GridImage& condition, const std::string& prompt,
                      const diffusion::SampleOptions& options, std::mt19937_64& rng) {
  require_role(model, is_interpolator(model.role()), "interpolate");
  require_layout(model, masked_input, "interpolate");
  const std::set<int> expected = model.config().schedule_params().mask_positions();
  if (masked_input.mask != expected) {
    throw ContractError("interpolate: masked input must mask exactly the interior cells");
  }
  validate_grid(masked_input);
  Tensor conditions = model.encode(masked_input);
  if (model.ablation() == Ablation::kAr) {
    require_layout(model, condition, "interpolate condition");
    conditions = concat2(conditions, model.encode(condition));
  }
  const std::array<PromptCode, 1> codes{model.prompt_code(prompt)};
  const int side = model.latent_side();
  const Tensor shape(1, model.base_channels(), side, side);
  const Tensor z = diffusion::sample(model.denoiser(), conditions, codes, shape,
                                     model.diffusion_schedule(), options, rng);
  GridImage out = model.decode(z);
  for (int cell = 0; cell < out.layout.cells(); ++cell) {
    if (!expected.contains(cell)) write_cell(out, cell, extract_cell(masked_input, cell));
  }
  return out;
}

GridImage next_key_grid(TrainedModel& model, const GridImage& previous_key,
                        const std::string& prompt, const diffusion::SampleOptions& options,
                        std::mt19937_64& rng) {
  require_role(model, model.role() == ModelRole::kNextKeyGrid, "next_key_grid");
  require_layout(model, previous_key, "next_key_grid");
  const std::array<PromptCode, 1> codes{model.prompt_code(prompt)};
  const int side = model.latent_side();
  const Tensor shape(1, model.base_channels(), side, side);
  const Tensor z = diffusion::sample(model.denoiser(), model.encode(previous_key), codes, shape,
                                     model.diffusion_schedule(), options, rng);
  return model.decode(z);
}

}  // namespace gridvid
