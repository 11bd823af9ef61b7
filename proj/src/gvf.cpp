// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/gvf.hpp"

#include <algorithm>
#include <cmath>

#include "gridvid/errors.hpp"
#include "gridvid/io.hpp"

namespace gridvid {

namespace {

constexpr std::string_view kMagic = "GVF1";

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>(v >> (8 * i));
  out.write(b, 4);
}

void append_frame(io::ByteWriter& w, const Frame& f) {
  for (float v : f.data()) w.u8(quantize(v));
}

}  // namespace

std::uint8_t quantize(float v) {
  const double q = std::nearbyint((static_cast<double>(v) + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

Frame quantized(const Frame& frame) {
  Frame out = frame;
  for (float& v : out.data()) v = corpus::normalize_u8(quantize(v));
  return out;
}

std::string encode_gvf(const corpus::Video& video) {
  int w = 0, h = 0, c = 3;
  if (!video.frames.empty()) {
    w = video.frames.front().width();
    h = video.frames.front().height();
    c = video.frames.front().channels();
  }
  for (const Frame& f : video.frames) {
    if (f.width() != w || f.height() != h || f.channels() != c) {
      throw DimensionError("gvf: all frames of a video must share dimensions");
    }
  }
  io::ByteWriter out;
  out.raw(kMagic);
  out.u32(static_cast<std::uint32_t>(w));
  out.u32(static_cast<std::uint32_t>(h));
  out.u32(static_cast<std::uint32_t>(c));
  out.u32(static_cast<std::uint32_t>(video.frames.size()));
  out.str(video.prompt);
  for (const Frame& f : video.frames) append_frame(out, f);
  return out.take();
}

corpus::Video decode_gvf(std::string_view bytes, const std::string& context) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw BadMagicError(context + ": missing GVF1 magic");
  }
  io::ByteReader r(bytes, context);
  r.raw(kMagic.size());
  const std::uint32_t w = r.u32();
  const std::uint32_t h = r.u32();
  const std::uint32_t c = r.u32();
  const std::uint32_t n = r.u32();
  const std::uint64_t frame_bytes = static_cast<std::uint64_t>(w) * h * c;
  if (w > 65535 || h > 65535 || c > 255 || frame_bytes * n > kGvfMaxPayload) {
    throw DimensionOverflowError(context + ": header dimensions " + std::to_string(w) + "x" +
                                 std::to_string(h) + "x" + std::to_string(c) + " x " +
                                 std::to_string(n) + " frames exceed limits");
  }
  if (n > 0 && frame_bytes == 0) throw DimensionOverflowError(context + ": zero-sized frames");
  corpus::Video video;
  video.prompt = r.str();
  if (r.remaining() < frame_bytes * n) {
    throw TruncatedError(context + ": expected " + std::to_string(frame_bytes * n) +
                         " frame bytes, found " + std::to_string(r.remaining()));
  }
  video.frames.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string_view raw = r.raw(frame_bytes);
    std::vector<float> data(frame_bytes);
    for (std::size_t k = 0; k < frame_bytes; ++k) {
      data[k] = corpus::normalize_u8(static_cast<std::uint8_t>(raw[k]));
    }
    video.frames.emplace_back(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c),
                              std::move(data));
  }
  if (r.remaining() != 0) throw ParseError(context + ": trailing bytes after last frame");
  return video;
}

void write_gvf(const corpus::Video& video, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_gvf(video));
}

corpus::Video read_gvf(const std::filesystem::path& path) {
  return decode_gvf(io::read_file(path), path.string());
}

GvfStreamWriter::GvfStreamWriter(const std::filesystem::path& path, int width, int height,
                                 int channels, std::string prompt)
    : path_(path), width_(width), height_(height), channels_(channels) {
  tmp_ = path;
  tmp_ += ".tmp";
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot create " + tmp_.string());
  out_.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_u32(out_, static_cast<std::uint32_t>(width));
  put_u32(out_, static_cast<std::uint32_t>(height));
  put_u32(out_, static_cast<std::uint32_t>(channels));
  put_u32(out_, 0);
  put_u32(out_, static_cast<std::uint32_t>(prompt.size()));
  out_.write(prompt.data(), static_cast<std::streamsize>(prompt.size()));
  if (!out_) throw IoError("write failed for " + tmp_.string());
}

GvfStreamWriter::~GvfStreamWriter() {
  if (!closed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void GvfStreamWriter::append(const Frame& frame) {
  if (closed_) throw IoError("append to a closed gvf stream");
  if (frame.width() != width_ || frame.height() != height_ || frame.channels() != channels_) {
    throw DimensionError("gvf stream: frame dimensions differ from the header");
  }
  std::string buf(frame.size(), '\0');
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = static_cast<char>(quantize(frame.data()[i]));
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw IoError("write failed for " + tmp_.string());
  ++count_;
}

void GvfStreamWriter::flush() {
  out_.flush();
  if (!out_) throw IoError("flush failed for " + tmp_.string());
}

void GvfStreamWriter::close() {
  if (closed_) return;
  out_.seekp(16);
  put_u32(out_, count_);
  out_.close();
  if (!out_) throw IoError("finalizing " + tmp_.string() + " failed");
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw IoError("cannot rename onto " + path_.string());
  closed_ = true;
}

}  // namespace gridvid
