// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/checkpoint.hpp"

#include "gridvid/errors.hpp"
#include "gridvid/io.hpp"

namespace gridvid {

namespace {

constexpr std::string_view kMagic = "GVCK";
constexpr std::int32_t kMaxDim = 1 << 20;

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  io::ByteWriter w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.str(ckpt.role);
  w.str(ckpt.config);
  w.u64(ckpt.step);
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const NamedTensor& t : ckpt.tensors) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.group));
    w.i32(t.value.n());
    w.i32(t.value.c());
    w.i32(t.value.h());
    w.i32(t.value.w());
    for (float v : t.value.span()) w.f32(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes, const std::string& context) {
  io::ByteReader r(bytes, context);
  if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
    throw BadMagicError(context + ": not a GVCK checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw UnsupportedError(context + ": checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.role = r.str();
  ckpt.config = r.str();
  ckpt.step = r.u64();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str();
    const std::uint32_t group = r.u32();
    if (group > 2) throw ParseError(context + ": bad parameter group for " + t.name);
    t.group = static_cast<diffusion::ParamGroup>(group);
    std::int32_t dims[4];
    for (auto& d : dims) {
      d = r.i32();
      if (d < 0 || d > kMaxDim) throw DimensionOverflowError(context + ": bad shape for " + t.name);
    }
    const auto total = static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2] * dims[3];
    if (total * 4 > r.remaining()) throw TruncatedError(context + ": tensor " + t.name + " cut short");
    t.value = nn::Tensor(dims[0], dims[1], dims[2], dims[3]);
    for (std::size_t k = 0; k < t.value.size(); ++k) t.value[k] = r.f32();
    ckpt.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw ParseError(context + ": trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path), path.string());
}

std::vector<NamedTensor> snapshot(std::span<diffusion::Param* const> params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const diffusion::Param* p : params) out.push_back({p->name, p->group, p->value});
  return out;
}

void restore(std::span<diffusion::Param* const> params, std::span<const NamedTensor> tensors) {
  if (params.size() != tensors.size()) {
    throw ContractError("checkpoint holds " + std::to_string(tensors.size()) +
                        " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    diffusion::Param& p = *params[i];
    const NamedTensor& t = tensors[i];
    if (p.name != t.name || !p.value.same_shape(t.value)) {
      throw ContractError("checkpoint tensor " + t.name + " " + t.value.shape_string() +
                          " does not match parameter " + p.name + " " + p.value.shape_string());
    }
    p.value = t.value;
  }
}

}  // namespace gridvid
