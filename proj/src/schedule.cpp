// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/schedule.hpp"

#include <json.hpp>
#include <sstream>

#include "gridvid/errors.hpp"

namespace gridvid::schedule {

std::string to_string(ConditionPolicy policy) {
  switch (policy) {
    case ConditionPolicy::kChained: return "chained";
    case ConditionPolicy::kKeyGrid: return "key_grid";
    case ConditionPolicy::kNone: return "none";
  }
  return "chained";
}

ConditionPolicy parse_condition_policy(const std::string& text) {
  if (text == "chained") return ConditionPolicy::kChained;
  if (text == "key_grid") return ConditionPolicy::kKeyGrid;
  if (text == "none") return ConditionPolicy::kNone;
  throw DomainError("unknown condition policy '" + text + "'");
}

ScheduleParams::ScheduleParams() = default;

ScheduleParams ScheduleParams::from_key_stride(int grid_side, int key_stride,
                                               ConditionPolicy policy) {
  if (grid_side < 2 || grid_side > 4) {
    throw DomainError("schedule grid side must be 2, 3 or 4");
  }
  if (key_stride < 1) throw DomainError("key stride must be positive");
  const int ratio = grid_side * grid_side - 1;
  std::vector<int> strides;
  int s = key_stride;
  while (s > 1) {
    if (s % ratio != 0) {
      throw DomainError("key stride " + std::to_string(key_stride) + " is not a power of " +
                        std::to_string(ratio));
    }
    s /= ratio;
    strides.push_back(s);
  }
  ScheduleParams p;
  p.grid_side_ = grid_side;
  p.key_stride_ = key_stride;
  p.level_strides_ = std::move(strides);
  p.policy_ = policy;
  return p;
}

std::set<int> ScheduleParams::mask_positions() const {
  std::set<int> m;
  for (int i = 1; i + 1 < frames_per_grid(); ++i) m.insert(i);
  return m;
}

int ScheduleParams::parent_stride(int level) const {
  if (level < 1 || level > levels()) {
    throw DomainError("interpolation level " + std::to_string(level) + " outside [1, " +
                      std::to_string(levels()) + "]");
  }
  return level == 1 ? key_stride_ : level_strides_[level - 2];
}

std::string to_string(const GridRef& ref) {
  switch (ref.kind) {
    case GridRefKind::kNone: return "none";
    case GridRefKind::kKeyGrid: return "key(" + std::to_string(ref.segment) + ")";
    case GridRefKind::kLevelOutput:
      return "level" + std::to_string(ref.level) + "(" + std::to_string(ref.segment) + "," +
             std::to_string(ref.step) + ")";
  }
  return "none";
}

int InterpStep::stride() const noexcept {
  return (known_last - known_first) / static_cast<int>(fills.size() + 1);
}

int InterpStep::index_of_cell(int cell) const {
  const int k = static_cast<int>(fills.size()) + 2;
  if (cell < 0 || cell >= k) throw IndexError("cell outside interpolation grid");
  if (cell == 0) return known_first;
  if (cell == k - 1) return known_last;
  return fills[cell - 1];
}

std::string Invocation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kKeyGrid: os << "key_grid segment=" << segment; break;
    case Kind::kNextKeyGrid: os << "next_key_grid segment=" << segment; break;
    case Kind::kInterpolate: {
      os << "interp level=" << step->level << " segment=" << step->segment
         << " step=" << step->step << " known=(" << step->known_first << ","
         << step->known_last << ") fills=(";
      for (std::size_t i = 0; i < step->fills.size(); ++i) {
        os << (i ? "," : "") << step->fills[i];
      }
      os << ") condition=" << to_string(step->condition);
      break;
    }
  }
  return os.str();
}

std::vector<int> key_indices(int segment, const ScheduleParams& params) {
  if (segment < 0) throw DomainError("segment index must be non-negative");
  const int base = segment * params.segment_length();
  std::vector<int> keys;
  for (int i = 0; i < params.frames_per_grid(); ++i) keys.push_back(base + i * params.key_stride());
  return keys;
}

std::vector<InterpStep> level_steps(int segment, int level, const ScheduleParams& params) {
  const int parent = params.parent_stride(level);
  const int d = params.level_strides()[level - 1];
  const int k = params.frames_per_grid();
  const int base = segment * params.segment_length();
  const int count = (params.segment_length() - 1) / parent;
  std::vector<InterpStep> steps;
  steps.reserve(count);
  for (int j = 0; j < count; ++j) {
    InterpStep s;
    s.segment = segment;
    s.level = level;
    s.step = j;
    s.known_first = base + j * parent;
    s.known_last = s.known_first + parent;
    for (int i = 1; i + 1 < k; ++i) s.fills.push_back(s.known_first + i * d);
    switch (params.policy()) {
      case ConditionPolicy::kNone: s.condition = GridRef::none(); break;
      case ConditionPolicy::kKeyGrid: s.condition = GridRef::key_grid(segment); break;
      case ConditionPolicy::kChained:
        if (j > 0) {
          s.condition = GridRef::level_output(segment, level, j - 1);
        } else if (level == 1) {
          s.condition = GridRef::key_grid(segment);
        } else {
          const int prev_count = (params.segment_length() - 1) / params.parent_stride(level - 1);
          s.condition = GridRef::level_output(segment, level - 1, prev_count - 1);
        }
        break;
    }
    steps.push_back(std::move(s));
  }
  return steps;
}

GenerationPlan full_plan(int n_frames, const ScheduleParams& params) {
  if (n_frames < 1) throw DomainError("n_frames must be at least 1");
  const int length = params.segment_length();
  const int n_segments = (n_frames + length - 1) / length;
  std::vector<SegmentPlan> segments;
  segments.reserve(n_segments);
  for (int s = 0; s < n_segments; ++s) {
    SegmentPlan sp;
    sp.segment = s;
    sp.key_indices = key_indices(s, params);
    for (int level = 1; level <= params.levels(); ++level) {
      sp.levels.push_back(level_steps(s, level, params));
    }
    segments.push_back(std::move(sp));
  }
  return GenerationPlan(params, n_frames, std::move(segments));
}

GenerationPlan::GenerationPlan(ScheduleParams params, int n_frames,
                               std::vector<SegmentPlan> segments)
    : params_(std::move(params)), n_frames_(n_frames), segments_(std::move(segments)) {}

std::vector<Invocation> GenerationPlan::invocations() const {
  std::vector<Invocation> out;
  for (const SegmentPlan& sp : segments_) {
    Invocation key;
    key.kind = sp.segment == 0 ? Invocation::Kind::kKeyGrid : Invocation::Kind::kNextKeyGrid;
    key.segment = sp.segment;
    out.push_back(key);
    for (const auto& level : sp.levels) {
      for (const InterpStep& step : level) {
        Invocation inv;
        inv.kind = Invocation::Kind::kInterpolate;
        inv.segment = sp.segment;
        inv.step = step;
        out.push_back(std::move(inv));
      }
    }
  }
  return out;
}

std::vector<int> GenerationPlan::produced_indices() const {
  std::vector<int> out;
  for (const SegmentPlan& sp : segments_) {
    out.insert(out.end(), sp.key_indices.begin(), sp.key_indices.end());
    for (const auto& level : sp.levels) {
      for (const InterpStep& step : level) out.insert(out.end(), step.fills.begin(), step.fills.end());
    }
  }
  return out;
}

std::vector<int> GenerationPlan::emission_order() const {
  std::vector<int> out(n_frames_);
  for (int i = 0; i < n_frames_; ++i) out[i] = i;
  return out;
}

namespace {

nlohmann::ordered_json plan_json(const GenerationPlan& plan) {
  const ScheduleParams& p = plan.params();
  nlohmann::ordered_json j;
  j["format"] = "gridvid-plan/1";
  j["grid_side"] = p.grid_side();
  j["key_stride"] = p.key_stride();
  j["level_strides"] = p.level_strides();
  j["segment_length"] = p.segment_length();
  j["condition_policy"] = to_string(p.policy());
  j["requested_frames"] = plan.requested_frames();
  j["total_frames"] = plan.total_frames();
  j["truncated_frames"] = plan.truncated_frames();

  int key_grids = 0;
  int next_key_grids = 0;
  std::vector<int> per_level(p.levels(), 0);
  nlohmann::ordered_json segs = nlohmann::ordered_json::array();
  for (const SegmentPlan& sp : plan.segments()) {
    (sp.segment == 0 ? key_grids : next_key_grids) += 1;
    nlohmann::ordered_json sj;
    sj["segment"] = sp.segment;
    sj["key_indices"] = sp.key_indices;
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (std::size_t l = 0; l < sp.levels.size(); ++l) {
      nlohmann::ordered_json lj;
      lj["level"] = l + 1;
      lj["stride"] = p.level_strides()[l];
      nlohmann::ordered_json steps = nlohmann::ordered_json::array();
      for (const InterpStep& st : sp.levels[l]) {
        per_level[l] += 1;
        steps.push_back({{"step", st.step},
                         {"known", {st.known_first, st.known_last}},
                         {"fills", st.fills},
                         {"condition", to_string(st.condition)}});
      }
      lj["steps"] = std::move(steps);
      levels.push_back(std::move(lj));
    }
    sj["levels"] = std::move(levels);
    segs.push_back(std::move(sj));
  }
  nlohmann::ordered_json counts;
  counts["key_grid"] = key_grids;
  counts["next_key_grid"] = next_key_grids;
  for (int l = 0; l < p.levels(); ++l) counts["level_" + std::to_string(l + 1)] = per_level[l];
  j["counts"] = std::move(counts);
  j["segments"] = std::move(segs);
  nlohmann::ordered_json inv = nlohmann::ordered_json::array();
  for (const Invocation& i : plan.invocations()) inv.push_back(i.describe());
  j["invocations"] = std::move(inv);
  return j;
}

}  // namespace

std::string GenerationPlan::manifest() const {
  nlohmann::ordered_json j = plan_json(*this);
  std::ostringstream hex;
  hex << std::hex << fnv1a(j.dump());
  j["digest"] = hex.str();
  return j.dump(2);
}

std::uint64_t GenerationPlan::digest() const { return fnv1a(plan_json(*this).dump()); }

int min_training_length(int level_stride, int frames_per_grid) {
  return (2 * frames_per_grid - 1) * level_stride + 1;
}

TrainingSample training_sample_at(int video_len, int level_stride, int start,
                                  int frames_per_grid) {
  if (level_stride < 1) throw DomainError("level stride must be positive");
  const int k = frames_per_grid;
  if (video_len < min_training_length(level_stride, k)) {
    throw InsufficientLengthError("video of " + std::to_string(video_len) +
                                  " frames is too short for stride " +
                                  std::to_string(level_stride) + " (needs " +
                                  std::to_string(min_training_length(level_stride, k)) + ")");
  }
  if (start < 0 || start + (2 * k - 1) * level_stride >= video_len) {
    throw DomainError("training sample start " + std::to_string(start) + " out of range");
  }
  TrainingSample s;
  for (int i = 0; i < k; ++i) s.cond_indices.push_back(start + i * level_stride);
  for (int i = 0; i < k; ++i) s.input_indices.push_back(start + (k + i) * level_stride);
  for (int i = 1; i + 1 < k; ++i) s.mask_positions.insert(i);
  return s;
}

TrainingSample training_sample(int video_len, int level_stride, std::mt19937_64& rng,
                               int frames_per_grid) {
  if (video_len < min_training_length(level_stride, frames_per_grid)) {
    return training_sample_at(video_len, level_stride, 0, frames_per_grid);  // throws
  }
  const int max_start = video_len - 1 - (2 * frames_per_grid - 1) * level_stride;
  std::uniform_int_distribution<int> dist(0, max_start);
  return training_sample_at(video_len, level_stride, dist(rng), frames_per_grid);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gridvid::schedule
