// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gridvid/corpus.hpp"
#include "gridvid/grid_codec.hpp"
#include "gridvid/gvf.hpp"
#include "gridvid/models.hpp"
#include "gridvid/schedule.hpp"

namespace gridvid::pipeline {

// Receives frames in strictly increasing index order starting at 0, each
// exactly once; flush() marks a completed segment.
class FrameSink {
 public:
  virtual ~FrameSink() = default;

  void write(int index, const Frame& frame);
  void flush();
  int frames_written() const noexcept { return next_; }
  int flushes() const noexcept { return flushes_; }

 protected:
  virtual void accept(int index, const Frame& frame) = 0;
  virtual void on_flush() {}

 private:
  int next_ = 0;
  int flushes_ = 0;
};

class MemorySink final : public FrameSink {
 public:
  const std::vector<Frame>& frames() const noexcept { return frames_; }
  // Frames covered by the last flush; these no longer change.
  int flushed() const noexcept { return flushed_; }

 protected:
  void accept(int, const Frame& frame) override { frames_.push_back(frame); }
  void on_flush() override { flushed_ = static_cast<int>(frames_.size()); }

 private:
  std::vector<Frame> frames_;
  int flushed_ = 0;
};

// Keeps only a running FNV-1a hash of the quantized frames.
class CountingSink final : public FrameSink {
 public:
  std::uint64_t hash() const noexcept { return hash_; }

 protected:
  void accept(int index, const Frame& frame) override;

 private:
  std::uint64_t hash_ = 1469598103934665603ULL;
};

class GvfSink final : public FrameSink {
 public:
  GvfSink(const std::filesystem::path& path, int frame_size, int channels, std::string prompt);
  // Finalizes and renames the file into place.
  void close();

 protected:
  void accept(int index, const Frame& frame) override;
  void on_flush() override;

 private:
  GvfStreamWriter writer_;
};

struct MemorySample {
  std::string phase;
  long long frames = 0;
  long long bytes = 0;
};

struct MemoryReport {
  int requested_frames = 0;
  long long peak_resident_frames = 0;
  long long peak_resident_bytes = 0;
  // Largest activation cache of any denoiser call, reported on its own.
  std::size_t model_activation_bytes = 0;
  std::vector<MemorySample> timeline;
};

// Counts pipeline-owned frame and grid buffers. A grid counts as one frame
// per cell.
class MemoryTracker {
 public:
  class Handle {
   public:
    Handle() = default;
    Handle(MemoryTracker* owner, long long frames, long long bytes, std::string label);
    Handle(Handle&& other) noexcept;
    Handle& operator=(Handle&& other) noexcept;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle();
    void release();

   private:
    MemoryTracker* owner_ = nullptr;
    long long frames_ = 0;
    long long bytes_ = 0;
    std::string label_;
  };

  Handle track_frame(const Frame& frame, std::string label);
  Handle track_grid(const GridImage& grid, std::string label);

  long long resident_frames() const noexcept { return frames_; }
  long long resident_bytes() const noexcept { return bytes_; }
  const MemoryReport& report() const noexcept { return report_; }
  MemoryReport& report() noexcept { return report_; }

 private:
  void change(long long frames, long long bytes, const std::string& label);

  long long frames_ = 0;
  long long bytes_ = 0;
  MemoryReport report_;
};

// Produces the grids a plan asks for. Implementations: learned models and
// the render-based oracle.
class GridGenerator {
 public:
  virtual ~GridGenerator() = default;

  virtual GridLayout layout() const = 0;
  virtual bool has(ModelRole role) const = 0;

  virtual GridImage key_grid(const std::string& prompt, std::mt19937_64& rng) = 0;
  virtual GridImage next_key_grid(const GridImage& previous, int segment,
                                  const std::string& prompt, std::mt19937_64& rng) = 0;
  virtual GridImage interpolate(const GridImage& masked, const GridImage& condition,
                                const schedule::InterpStep& step, const std::string& prompt,
                                std::mt19937_64& rng) = 0;

  virtual std::map<std::string, std::string> model_ids() const { return {}; }
  virtual std::size_t activation_bytes() const { return 0; }
};

class LearnedGenerator final : public GridGenerator {
 public:
  // Models are borrowed and must outlive the generator.
  explicit LearnedGenerator(std::map<ModelRole, TrainedModel*> models);

  GridLayout layout() const override;
  bool has(ModelRole role) const override { return models_.contains(role); }
  GridImage key_grid(const std::string& prompt, std::mt19937_64& rng) override;
  GridImage next_key_grid(const GridImage& previous, int segment, const std::string& prompt,
                          std::mt19937_64& rng) override;
  GridImage interpolate(const GridImage& masked, const GridImage& condition,
                        const schedule::InterpStep& step, const std::string& prompt,
                        std::mt19937_64& rng) override;
  std::map<std::string, std::string> model_ids() const override;
  std::size_t activation_bytes() const override { return activation_bytes_; }

 private:
  TrainedModel& model(ModelRole role) const;

  std::map<ModelRole, TrainedModel*> models_;
  std::size_t activation_bytes_ = 0;
};

// Ground truth from the scene renderer.
class OracleGenerator final : public GridGenerator {
 public:
  OracleGenerator(corpus::SceneSpec scene, GridLayout layout, schedule::ScheduleParams params);

  GridLayout layout() const override { return layout_; }
  bool has(ModelRole) const override { return true; }
  GridImage key_grid(const std::string& prompt, std::mt19937_64& rng) override;
  GridImage next_key_grid(const GridImage& previous, int segment, const std::string& prompt,
                          std::mt19937_64& rng) override;
  GridImage interpolate(const GridImage& masked, const GridImage& condition,
                        const schedule::InterpStep& step, const std::string& prompt,
                        std::mt19937_64& rng) override;
  std::map<std::string, std::string> model_ids() const override { return {{"all", "oracle"}}; }

 private:
  corpus::SceneSpec scene_;
  GridLayout layout_;
  schedule::ScheduleParams params_;
};

struct InvocationRecord {
  std::string describe;
  double milliseconds = 0.0;
};

struct VideoManifest {
  std::string prompt;
  int n_frames = 0;
  int total_frames = 0;
  std::uint64_t seed = 0;
  std::uint64_t plan_digest = 0;
  schedule::ScheduleParams params;
  std::map<std::string, std::string> checkpoints;
  std::vector<InvocationRecord> invocations;
  MemoryReport memory;

  std::vector<std::string> invocation_strings() const;
  std::string to_json() const;
};

VideoManifest generate_video(const std::string& prompt, int n_frames, GridGenerator& generator,
                             const schedule::ScheduleParams& params, FrameSink& sink,
                             std::mt19937_64& rng, std::uint64_t seed = 0);

// One segment from an externally supplied key grid.
VideoManifest interpolate_from_key_grid(const GridImage& key_grid, const std::string& prompt,
                                        GridGenerator& generator,
                                        const schedule::ScheduleParams& params, FrameSink& sink,
                                        std::mt19937_64& rng, std::uint64_t seed = 0);

using GeneratorFactory = std::function<std::unique_ptr<GridGenerator>()>;

// One report per requested length, each from a fresh generator and seed.
std::vector<MemoryReport> memory_probe(std::span<const int> n_frames,
                                       const GeneratorFactory& factory,
                                       const schedule::ScheduleParams& params,
                                       const std::string& prompt, std::uint64_t seed);

// n_frames,peak_frames,peak_bytes
std::string memory_csv(std::span<const MemoryReport> reports);

}  // namespace gridvid::pipeline
