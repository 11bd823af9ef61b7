// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace gridvid::schedule {

// Which earlier grid conditions the first step of each interpolation level.
enum class ConditionPolicy {
  kChained,   // key grid for level 1, last output of level l-1 for level l
  kKeyGrid,   // every step conditions on the segment's key grid
  kNone,      // non-autoregressive: no image condition at all
};

std::string to_string(ConditionPolicy policy);
ConditionPolicy parse_condition_policy(const std::string& text);

// Frame-index algebra parameters. With K = grid_side^2 frames per grid, each
// interpolation level fills K-2 frames between two known frames, so
// level_strides[i] = (K-1) * level_strides[i+1], the last level stride is 1
// and key_stride = (K-1) * level_strides[0].
class ScheduleParams {
 public:
  // 2x2 grid, key stride 9, level strides [3, 1].
  ScheduleParams();

  // Derives level strides from the key stride, which must be a power of K-1.
  static ScheduleParams from_key_stride(int grid_side, int key_stride,
                                        ConditionPolicy policy = ConditionPolicy::kChained);

  int grid_side() const noexcept { return grid_side_; }
  int frames_per_grid() const noexcept { return grid_side_ * grid_side_; }
  int key_stride() const noexcept { return key_stride_; }
  const std::vector<int>& level_strides() const noexcept { return level_strides_; }
  int levels() const noexcept { return static_cast<int>(level_strides_.size()); }
  int segment_length() const noexcept { return (frames_per_grid() - 1) * key_stride_ + 1; }
  ConditionPolicy policy() const noexcept { return policy_; }
  // Interior cells of an interpolation grid: {1, ..., K-2}.
  std::set<int> mask_positions() const;

  // Stride between the known endpoints of a level's steps.
  int parent_stride(int level) const;

  void set_policy(ConditionPolicy policy) { policy_ = policy; }

  friend bool operator==(const ScheduleParams&, const ScheduleParams&) = default;

 private:
  int grid_side_ = 2;
  int key_stride_ = 9;
  std::vector<int> level_strides_{3, 1};
  ConditionPolicy policy_ = ConditionPolicy::kChained;
};

enum class GridRefKind { kNone, kKeyGrid, kLevelOutput };

struct GridRef {
  GridRefKind kind = GridRefKind::kNone;
  int segment = 0;
  int level = 0;  // 1-based interpolation level for kLevelOutput
  int step = 0;   // 0-based step within the level

  static GridRef none() { return {}; }
  static GridRef key_grid(int segment) { return {GridRefKind::kKeyGrid, segment, 0, 0}; }
  static GridRef level_output(int segment, int level, int step) {
    return {GridRefKind::kLevelOutput, segment, level, step};
  }

  friend bool operator==(const GridRef&, const GridRef&) = default;
};

std::string to_string(const GridRef& ref);

struct InterpStep {
  int segment = 0;
  int level = 1;
  int step = 0;
  int known_first = 0;  // global index in cell 0
  int known_last = 0;   // global index in cell K-1
  std::vector<int> fills;  // global indices for cells 1..K-2
  GridRef condition;

  int stride() const noexcept;
  // Global frame index carried by a grid cell.
  int index_of_cell(int cell) const;
  GridRef output_ref() const { return GridRef::level_output(segment, level, step); }

  friend bool operator==(const InterpStep&, const InterpStep&) = default;
};

struct SegmentPlan {
  int segment = 0;
  std::vector<int> key_indices;
  std::vector<std::vector<InterpStep>> levels;  // levels[l-1]
};

// One generator call in execution order.
struct Invocation {
  enum class Kind { kKeyGrid, kNextKeyGrid, kInterpolate };
  Kind kind = Kind::kKeyGrid;
  int segment = 0;
  std::optional<InterpStep> step;  // set for kInterpolate

  std::string describe() const;
};

class GenerationPlan {
 public:
  GenerationPlan(ScheduleParams params, int n_frames, std::vector<SegmentPlan> segments);

  const ScheduleParams& params() const noexcept { return params_; }
  int requested_frames() const noexcept { return n_frames_; }
  int total_frames() const noexcept {
    return static_cast<int>(segments_.size()) * params_.segment_length();
  }
  int truncated_frames() const noexcept { return total_frames() - n_frames_; }
  const std::vector<SegmentPlan>& segments() const noexcept { return segments_; }

  std::vector<Invocation> invocations() const;
  // Every frame index the plan produces, keys and fills, in production order.
  std::vector<int> produced_indices() const;
  // Indices delivered to the sink: 0..requested_frames-1.
  std::vector<int> emission_order() const;

  std::string manifest() const;
  std::uint64_t digest() const;

 private:
  ScheduleParams params_;
  int n_frames_ = 0;
  std::vector<SegmentPlan> segments_;
};

std::vector<int> key_indices(int segment, const ScheduleParams& params);
std::vector<InterpStep> level_steps(int segment, int level, const ScheduleParams& params);
GenerationPlan full_plan(int n_frames, const ScheduleParams& params);

struct TrainingSample {
  std::vector<int> cond_indices;
  std::vector<int> input_indices;
  std::set<int> mask_positions;
};

// Minimum video length for a training sample at stride d.
int min_training_length(int level_stride, int frames_per_grid = 4);

// Random start s with the 2K frames s, s+d, ..., s+(2K-1)d inside the video;
// the first K form the condition grid, the last K the input grid.
TrainingSample training_sample(int video_len, int level_stride, std::mt19937_64& rng,
                               int frames_per_grid = 4);
TrainingSample training_sample_at(int video_len, int level_stride, int start,
                                  int frames_per_grid = 4);

std::uint64_t fnv1a(const std::string& text);

}  // namespace gridvid::schedule
