// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "gridvid/corpus.hpp"

// GVF1 raw video container, little-endian:
//   "GVF1" | u32 width | u32 height | u32 channels | u32 frame_count |
//   u32 prompt_length | prompt bytes | frames as u8, frame-major, row-major,
//   channels interleaved.
// A stored byte v reads back as v / 127.5 - 1.
namespace gridvid {

inline constexpr std::size_t kGvfHeaderBytes = 24;
// Largest accepted payload; anything above is treated as a corrupt header.
inline constexpr std::uint64_t kGvfMaxPayload = 1ULL << 34;

std::uint8_t quantize(float v);
// Snaps every value to the nearest representable 8-bit level.
Frame quantized(const Frame& frame);

std::string encode_gvf(const corpus::Video& video);
corpus::Video decode_gvf(std::string_view bytes, const std::string& context = "gvf");

void write_gvf(const corpus::Video& video, const std::filesystem::path& path);
corpus::Video read_gvf(const std::filesystem::path& path);

// Appends frames to a temporary file next to path; close() fixes up the
// frame count and renames it into place. Destroying an unclosed writer
// removes the temporary.
class GvfStreamWriter {
 public:
  GvfStreamWriter(const std::filesystem::path& path, int width, int height, int channels,
                  std::string prompt);
  ~GvfStreamWriter();
  GvfStreamWriter(const GvfStreamWriter&) = delete;
  GvfStreamWriter& operator=(const GvfStreamWriter&) = delete;

  void append(const Frame& frame);
  void flush();
  void close();
  std::uint32_t frames() const noexcept { return count_; }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  int width_;
  int height_;
  int channels_;
  std::uint32_t count_ = 0;
  bool closed_ = false;
};

}  // namespace gridvid
