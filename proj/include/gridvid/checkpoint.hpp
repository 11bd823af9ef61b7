// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gridvid/diffusion.hpp"

namespace gridvid {

// GVCK layout, little-endian:
//   "GVCK" | u32 version | str role | str config | u64 step | u32 count |
//   count x (str name | u32 group | i32 n, c, h, w | f32 data...)
// where str is a u32 byte length followed by UTF-8 bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  diffusion::ParamGroup group = diffusion::ParamGroup::kOther;
  nn::Tensor value;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  std::string role;
  std::string config;  // key=value lines
  std::uint64_t step = 0;
  std::vector<NamedTensor> tensors;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes, const std::string& context = "checkpoint");

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Parameter values of a model, in order.
std::vector<NamedTensor> snapshot(std::span<diffusion::Param* const> params);
// Copies values into params; names and shapes must match one-to-one.
void restore(std::span<diffusion::Param* const> params, std::span<const NamedTensor> tensors);

}  // namespace gridvid
