// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "gridvid/errors.hpp"
#include "gridvid/io.hpp"
#include "gridvid/latent_codec.hpp"

namespace gridvid {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key " + key + ": '" + v + "' is not an integer");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) {
    throw ConfigError("config key " + key + ": '" + v + "' is not a number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key " + key + ": '" + v + "' is not a boolean");
}

std::vector<int> parse_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_int(key, trim(item))));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid_side", [](RunConfig& c, const std::string& k, const std::string& v) { c.grid_side = static_cast<int>(parse_int(k, v)); }},
      {"frame_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.frame_size = static_cast<int>(parse_int(k, v)); }},
      {"gutter", [](RunConfig& c, const std::string& k, const std::string& v) { c.gutter = static_cast<int>(parse_int(k, v)); }},
      {"grid_4x4", [](RunConfig& c, const std::string& k, const std::string& v) { c.grid_4x4 = parse_bool(k, v); }},
      {"key_stride", [](RunConfig& c, const std::string& k, const std::string& v) { c.key_stride = static_cast<int>(parse_int(k, v)); }},
      {"condition_policy", [](RunConfig& c, const std::string&, const std::string& v) {
         try {
           c.condition_policy = schedule::parse_condition_policy(v);
         } catch (const Error& e) {
           throw ConfigError(e.what());
         }
       }},
      {"latent_codec", [](RunConfig& c, const std::string&, const std::string& v) { c.latent_codec = v; }},
      {"denoiser_head", [](RunConfig& c, const std::string&, const std::string& v) { c.denoiser_head = v; }},
      {"diffusion_steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.diffusion_steps = static_cast<int>(parse_int(k, v)); }},
      {"beta_start", [](RunConfig& c, const std::string& k, const std::string& v) { c.beta_start = parse_double(k, v); }},
      {"beta_end", [](RunConfig& c, const std::string& k, const std::string& v) { c.beta_end = parse_double(k, v); }},
      {"key_steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.key_steps = static_cast<int>(parse_int(k, v)); }},
      {"interp_steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.interp_steps = static_cast<int>(parse_int(k, v)); }},
      {"nextkey_steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.nextkey_steps = static_cast<int>(parse_int(k, v)); }},
      {"guidance_scale", [](RunConfig& c, const std::string& k, const std::string& v) { c.guidance_scale = parse_double(k, v); }},
      {"clip_denoised", [](RunConfig& c, const std::string& k, const std::string& v) { c.clip_denoised = parse_bool(k, v); }},
      {"non_ar", [](RunConfig& c, const std::string& k, const std::string& v) { c.non_ar = parse_bool(k, v); }},
      {"freeze", [](RunConfig& c, const std::string&, const std::string& v) {
         try {
           c.freeze = diffusion::parse_freeze_mode(v);
         } catch (const Error& e) {
           throw ConfigError(e.what());
         }
       }},
      {"unet_widths", [](RunConfig& c, const std::string& k, const std::string& v) { c.unet_widths = parse_list(k, v); }},
      {"emb_dim", [](RunConfig& c, const std::string& k, const std::string& v) { c.emb_dim = static_cast<int>(parse_int(k, v)); }},
      {"groups", [](RunConfig& c, const std::string& k, const std::string& v) { c.groups = static_cast<int>(parse_int(k, v)); }},
      {"train_steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.train_steps = static_cast<int>(parse_int(k, v)); }},
      {"batch_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.batch_size = static_cast<int>(parse_int(k, v)); }},
      {"learning_rate", [](RunConfig& c, const std::string& k, const std::string& v) { c.learning_rate = parse_double(k, v); }},
      {"prompt_dropout", [](RunConfig& c, const std::string& k, const std::string& v) { c.prompt_dropout = parse_double(k, v); }},
      {"ema_decay", [](RunConfig& c, const std::string& k, const std::string& v) { c.ema_decay = parse_double(k, v); }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(k, v)); }},
  };
  return table;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "grid_side=" << grid_side << "\n"
     << "frame_size=" << frame_size << "\n"
     << "gutter=" << gutter << "\n"
     << "grid_4x4=" << (grid_4x4 ? "true" : "false") << "\n"
     << "key_stride=" << key_stride << "\n"
     << "condition_policy=" << schedule::to_string(condition_policy) << "\n"
     << "latent_codec=" << latent_codec << "\n"
     << "denoiser_head=" << denoiser_head << "\n"
     << "diffusion_steps=" << diffusion_steps << "\n"
     << "beta_start=" << beta_start << "\n"
     << "beta_end=" << beta_end << "\n"
     << "key_steps=" << key_steps << "\n"
     << "interp_steps=" << interp_steps << "\n"
     << "nextkey_steps=" << nextkey_steps << "\n"
     << "guidance_scale=" << guidance_scale << "\n"
     << "clip_denoised=" << (clip_denoised ? "true" : "false") << "\n"
     << "non_ar=" << (non_ar ? "true" : "false") << "\n"
     << "freeze=" << diffusion::to_string(freeze) << "\n"
     << "unet_widths=";
  for (std::size_t i = 0; i < unet_widths.size(); ++i) os << (i ? "," : "") << unet_widths[i];
  os << "\n"
     << "emb_dim=" << emb_dim << "\n"
     << "groups=" << groups << "\n"
     << "train_steps=" << train_steps << "\n"
     << "batch_size=" << batch_size << "\n"
     << "learning_rate=" << learning_rate << "\n"
     << "prompt_dropout=" << prompt_dropout << "\n"
     << "ema_decay=" << ema_decay << "\n"
     << "seed=" << seed << "\n";
  return os.str();
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  const int g = effective_grid_side();
  if (g != 2 && g != 4) fail("grid side must be 2 or 4");
  if (frame_size < 1 || gutter < 0) fail("frame_size must be positive and gutter non-negative");
  if (diffusion_steps < 1) fail("diffusion_steps must be positive");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    fail("betas must satisfy 0 < beta_start <= beta_end < 1");
  }
  for (int s : {key_steps, interp_steps, nextkey_steps}) {
    if (s < 1 || s > diffusion_steps) fail("sampler steps must lie in 1..diffusion_steps");
  }
  if (unet_widths.size() != 3) fail("unet_widths needs three entries");
  for (int w : unet_widths) {
    if (w < 1 || w % groups != 0) fail("unet widths must be positive multiples of groups");
  }
  if (emb_dim < 2 || groups < 1) fail("emb_dim and groups must be positive");
  if (denoiser_head != "eps" && denoiser_head != "v") fail("denoiser_head must be eps or v");
  if (train_steps < 0 || batch_size < 1) fail("train_steps >= 0 and batch_size >= 1 required");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (prompt_dropout < 0.0 || prompt_dropout > 1.0) fail("prompt_dropout must lie in [0, 1]");
  if (ema_decay < 0.0 || ema_decay >= 1.0) fail("ema_decay must lie in [0, 1)");
  try {
    make_codec(latent_codec);
    schedule_params();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const int canvas = layout().canvas_size();
  const int p = make_codec(latent_codec)->factor();
  if (canvas % p != 0 || (canvas / p) % 4 != 0) {
    fail("canvas " + std::to_string(canvas) + " with codec " + latent_codec +
         " gives a latent side not divisible by 4");
  }
}

GridLayout RunConfig::layout() const {
  return GridLayout(effective_grid_side(), frame_size, gutter, 3);
}

schedule::ScheduleParams RunConfig::schedule_params() const {
  const int g = effective_grid_side();
  const int stride = key_stride != 0 ? key_stride : (g == 2 ? 9 : 15);
  return schedule::ScheduleParams::from_key_stride(
      g, stride, non_ar ? schedule::ConditionPolicy::kNone : condition_policy);
}

diffusion::DiffusionSchedule RunConfig::diffusion_schedule() const {
  return diffusion::make_schedule(diffusion_steps, beta_start, beta_end);
}

}  // namespace gridvid
