// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <optional>
#include <sstream>

#include "gridvid/errors.hpp"
#include "json.hpp"

namespace gridvid::pipeline {

using schedule::GridRef;
using schedule::GridRefKind;
using schedule::InterpStep;
using schedule::Invocation;

void FrameSink::write(int index, const Frame& frame) {
  if (index != next_) {
    throw SinkError("sink expected frame " + std::to_string(next_) + ", got " +
                    std::to_string(index));
  }
  try {
    accept(index, frame);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw SinkError(std::string("sink write failed: ") + e.what());
  }
  ++next_;
}

void FrameSink::flush() {
  try {
    on_flush();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw SinkError(std::string("sink flush failed: ") + e.what());
  }
  ++flushes_;
}

void CountingSink::accept(int, const Frame& frame) {
  for (float v : frame.data()) {
    hash_ ^= quantize(v);
    hash_ *= 1099511628211ULL;
  }
}

GvfSink::GvfSink(const std::filesystem::path& path, int frame_size, int channels,
                 std::string prompt)
    : writer_(path, frame_size, frame_size, channels, std::move(prompt)) {}

void GvfSink::close() {
  try {
    writer_.close();
  } catch (const Error& e) {
    throw SinkError(e.what());
  }
}

void GvfSink::accept(int, const Frame& frame) {
  try {
    writer_.append(frame);
  } catch (const Error& e) {
    throw SinkError(e.what());
  }
}

void GvfSink::on_flush() {
  try {
    writer_.flush();
  } catch (const Error& e) {
    throw SinkError(e.what());
  }
}

MemoryTracker::Handle::Handle(MemoryTracker* owner, long long frames, long long bytes,
                              std::string label)
    : owner_(owner), frames_(frames), bytes_(bytes), label_(std::move(label)) {
  owner_->change(frames_, bytes_, "+" + label_);
}

MemoryTracker::Handle::Handle(Handle&& other) noexcept
    : owner_(other.owner_), frames_(other.frames_), bytes_(other.bytes_),
      label_(std::move(other.label_)) {
  other.owner_ = nullptr;
}

MemoryTracker::Handle& MemoryTracker::Handle::operator=(Handle&& other) noexcept {
  if (this != &other) {
    release();
    owner_ = other.owner_;
    frames_ = other.frames_;
    bytes_ = other.bytes_;
    label_ = std::move(other.label_);
    other.owner_ = nullptr;
  }
  return *this;
}

MemoryTracker::Handle::~Handle() { release(); }

void MemoryTracker::Handle::release() {
  if (owner_ != nullptr) {
    owner_->change(-frames_, -bytes_, "-" + label_);
    owner_ = nullptr;
  }
}

MemoryTracker::Handle MemoryTracker::track_frame(const Frame& frame, std::string label) {
  return Handle(this, 1, static_cast<long long>(frame.bytes()), std::move(label));
}

MemoryTracker::Handle MemoryTracker::track_grid(const GridImage& grid, std::string label) {
  return Handle(this, grid.layout.cells(), static_cast<long long>(grid.canvas.bytes()),
                std::move(label));
}

void MemoryTracker::change(long long frames, long long bytes, const std::string& label) {
  frames_ += frames;
  bytes_ += bytes;
  report_.peak_resident_frames = std::max(report_.peak_resident_frames, frames_);
  report_.peak_resident_bytes = std::max(report_.peak_resident_bytes, bytes_);
  report_.timeline.push_back({label, frames_, bytes_});
}

LearnedGenerator::LearnedGenerator(std::map<ModelRole, TrainedModel*> models)
    : models_(std::move(models)) {
  if (models_.empty()) throw MissingRoleError("learned generator needs at least one model");
  const TrainedModel* first = models_.begin()->second;
  for (const auto& [role, m] : models_) {
    if (m == nullptr || m->role() != role) {
      throw ContractError("model registered as " + to_string(role) + " has a different role");
    }
    if (!(m->layout() == first->layout()) ||
        !(m->config().schedule_params() == first->config().schedule_params()) ||
        m->codec().id() != first->codec().id()) {
      throw ContractError("models disagree on layout, schedule or codec");
    }
  }
}

GridLayout LearnedGenerator::layout() const { return models_.begin()->second->layout(); }

TrainedModel& LearnedGenerator::model(ModelRole role) const {
  const auto it = models_.find(role);
  if (it == models_.end()) throw MissingRoleError("no " + to_string(role) + " model loaded");
  return *it->second;
}

GridImage LearnedGenerator::key_grid(const std::string& prompt, std::mt19937_64& rng) {
  TrainedModel& m = model(ModelRole::kKeyGrid);
  GridImage g = generate_key_grid(m, prompt, m.sample_options(), rng);
  activation_bytes_ = std::max(activation_bytes_, m.denoiser().activation_bytes());
  return g;
}

GridImage LearnedGenerator::next_key_grid(const GridImage& previous, int, const std::string& prompt,
                                          std::mt19937_64& rng) {
  TrainedModel& m = model(ModelRole::kNextKeyGrid);
  GridImage g = gridvid::next_key_grid(m, previous, prompt, m.sample_options(), rng);
  activation_bytes_ = std::max(activation_bytes_, m.denoiser().activation_bytes());
  return g;
}

GridImage LearnedGenerator::interpolate(const GridImage& masked, const GridImage& condition,
                                        const InterpStep& step, const std::string& prompt,
                                        std::mt19937_64& rng) {
  TrainedModel& m = model(role_for_level(step.level));
  GridImage g = gridvid::interpolate(m, masked, condition, prompt, m.sample_options(), rng);
  activation_bytes_ = std::max(activation_bytes_, m.denoiser().activation_bytes());
  return g;
}

std::map<std::string, std::string> LearnedGenerator::model_ids() const {
  std::map<std::string, std::string> out;
  for (const auto& [role, m] : models_) out[to_string(role)] = m->id();
  return out;
}

OracleGenerator::OracleGenerator(corpus::SceneSpec scene, GridLayout layout,
                                 schedule::ScheduleParams params)
    : scene_(scene), layout_(layout), params_(std::move(params)) {
  if (scene_.frame_size != layout_.frame_size()) {
    throw ContractError("oracle scene frame size differs from the layout");
  }
}

GridImage OracleGenerator::key_grid(const std::string&, std::mt19937_64&) {
  std::vector<Frame> frames;
  for (int i : schedule::key_indices(0, params_)) frames.push_back(corpus::render(scene_, i));
  return pack(frames, layout_);
}

GridImage OracleGenerator::next_key_grid(const GridImage&, int segment, const std::string&,
                                         std::mt19937_64&) {
  std::vector<Frame> frames;
  for (int i : schedule::key_indices(segment, params_)) frames.push_back(corpus::render(scene_, i));
  return pack(frames, layout_);
}

GridImage OracleGenerator::interpolate(const GridImage& masked, const GridImage&,
                                       const InterpStep& step, const std::string&,
                                       std::mt19937_64&) {
  return corpus::oracle_fill(masked, scene_, step);
}

std::vector<std::string> VideoManifest::invocation_strings() const {
  std::vector<std::string> out;
  for (const auto& r : invocations) out.push_back(r.describe);
  return out;
}

std::string VideoManifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "gridvid-video/1";
  j["prompt"] = prompt;
  j["n_frames"] = n_frames;
  j["total_frames"] = total_frames;
  j["truncated_frames"] = total_frames - n_frames;
  j["seed"] = seed;
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(plan_digest));
  j["plan_digest"] = digest;
  j["schedule"] = {{"grid_side", params.grid_side()},
                   {"key_stride", params.key_stride()},
                   {"level_strides", params.level_strides()},
                   {"segment_length", params.segment_length()},
                   {"condition_policy", schedule::to_string(params.policy())}};
  j["checkpoints"] = checkpoints;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& r : invocations) steps.push_back({{"call", r.describe}, {"ms", r.milliseconds}});
  j["invocations"] = steps;
  nlohmann::ordered_json timeline = nlohmann::ordered_json::array();
  for (const auto& s : memory.timeline) timeline.push_back({s.phase, s.frames, s.bytes});
  j["memory"] = {{"requested_frames", memory.requested_frames},
                 {"peak_resident_frames", memory.peak_resident_frames},
                 {"peak_resident_bytes", memory.peak_resident_bytes},
                 {"model_activation_bytes", memory.model_activation_bytes},
                 {"timeline", timeline}};
  return j.dump(1) + "\n";
}

namespace {

struct TrackedGrid {
  GridImage grid;
  MemoryTracker::Handle handle;
};

struct TrackedFrame {
  Frame frame;
  MemoryTracker::Handle handle;
};

class Runner {
 public:
  Runner(GridGenerator& gen, const schedule::GenerationPlan& plan, FrameSink& sink,
         std::mt19937_64& rng, const std::string& prompt)
      : gen_(gen), plan_(plan), params_(plan.params()), sink_(sink), rng_(rng), prompt_(prompt) {}

  std::vector<InvocationRecord> run(const GridImage* external_key) {
    std::vector<InvocationRecord> records;
    int segment = -1;
    for (const Invocation& inv : plan_.invocations()) {
      if (inv.segment != segment) {
        if (segment >= 0) finish_segment(segment);
        segment = inv.segment;
      }
      const auto start = std::chrono::steady_clock::now();
      switch (inv.kind) {
        case Invocation::Kind::kKeyGrid:
          absorb_key(external_key != nullptr ? *external_key : gen_.key_grid(prompt_, rng_),
                     inv.segment);
          break;
        case Invocation::Kind::kNextKeyGrid: {
          if (!prev_key_) throw PlanViolationError("next key grid requested without a previous key");
          GridImage next = gen_.next_key_grid(prev_key_->grid, inv.segment, prompt_, rng_);
          prev_key_.reset();
          absorb_key(std::move(next), inv.segment);
          break;
        }
        case Invocation::Kind::kInterpolate:
          run_step(*inv.step);
          break;
      }
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start).count();
      records.push_back({inv.describe(), ms});
    }
    if (segment >= 0) finish_segment(segment);
    return records;
  }

  MemoryTracker& tracker() { return tracker_; }

 private:
  void require_layout(const GridImage& g, const char* what) const {
    if (!(g.layout == gen_.layout())) {
      throw ContractError(std::string(what) + ": grid layout differs from the generator layout");
    }
  }

  void emit(int index, const Frame& frame) {
    if (index < plan_.requested_frames()) sink_.write(index, frame);
  }

  const Frame& buffered(int index) const {
    const auto it = buffer_.find(index);
    if (it == buffer_.end()) {
      throw PlanViolationError("frame " + std::to_string(index) + " is not resident");
    }
    return it->second.frame;
  }

  void store(int index, Frame frame) {
    MemoryTracker::Handle h = tracker_.track_frame(frame, "buffer");
    buffer_[index] = TrackedFrame{std::move(frame), std::move(h)};
  }

  GridImage repack_keys(int segment) const {
    std::vector<Frame> frames;
    for (int i : schedule::key_indices(segment, params_)) frames.push_back(buffered(i));
    return pack(frames, gen_.layout());
  }

  void absorb_key(GridImage grid, int segment) {
    require_layout(grid, "key grid");
    if (!grid.mask.empty()) throw ContractError("generated key grid carries a mask");
    TrackedGrid key{std::move(grid), {}};
    key.handle = tracker_.track_grid(key.grid, "key_grid");
    const auto idx = schedule::key_indices(segment, params_);
    for (std::size_t c = 0; c < idx.size(); ++c) {
      store(idx[c], extract_cell(key.grid, static_cast<int>(c)));
    }
  }

  void run_step(const InterpStep& step) {
    const int K = params_.frames_per_grid();
    std::optional<TrackedGrid> repacked;
    const GridImage* condition = &empty_;
    switch (step.condition.kind) {
      case GridRefKind::kNone:
        break;
      case GridRefKind::kKeyGrid: {
        if (step.condition.segment != step.segment) {
          throw PlanViolationError("step conditions on another segment's key grid");
        }
        repacked.emplace(TrackedGrid{repack_keys(step.segment), {}});
        repacked->handle = tracker_.track_grid(repacked->grid, "condition");
        condition = &repacked->grid;
        break;
      }
      case GridRefKind::kLevelOutput:
        if (!last_output_ || !(step.condition == last_ref_)) {
          throw PlanViolationError("condition " + schedule::to_string(step.condition) +
                                   " is not the most recent output");
        }
        condition = &last_output_->grid;
        break;
    }
    const GridLayout layout = gen_.layout();
    std::vector<Frame> cells(static_cast<std::size_t>(K),
                             Frame(layout.frame_size(), layout.frame_size(), layout.channels()));
    cells.front() = buffered(step.known_first);
    cells.back() = buffered(step.known_last);
    TrackedGrid masked{apply_mask(pack(cells, layout), params_.mask_positions()), {}};
    cells.clear();
    masked.handle = tracker_.track_grid(masked.grid, "masked_input");

    TrackedGrid out{gen_.interpolate(masked.grid, *condition, step, prompt_, rng_), {}};
    out.handle = tracker_.track_grid(out.grid, "output");
    require_layout(out.grid, "interpolation output");
    if (!out.grid.mask.empty()) throw ContractError("interpolation output carries a mask");
    if (!(extract_cell(out.grid, 0) == extract_cell(masked.grid, 0)) ||
        !(extract_cell(out.grid, K - 1) == extract_cell(masked.grid, K - 1))) {
      throw ContractError("interpolation output altered a known cell");
    }

    if (step.level < params_.levels()) {
      for (int c = 1; c < K - 1; ++c) store(step.fills[c - 1], extract_cell(out.grid, c));
    } else {
      emit(step.known_first, buffered(step.known_first));
      for (int c = 1; c < K - 1; ++c) emit(step.fills[c - 1], extract_cell(out.grid, c));
      if (step.known_last == segment_end(step.segment)) {
        emit(step.known_last, buffered(step.known_last));
      }
    }
    masked.handle.release();
    repacked.reset();
    last_output_.reset();
    last_output_.emplace(std::move(out));
    last_ref_ = step.output_ref();
  }

  int segment_end(int segment) const {
    return (segment + 1) * params_.segment_length() - 1;
  }

  void finish_segment(int segment) {
    if (params_.levels() == 0) {
      for (auto& [index, tf] : buffer_) emit(index, tf.frame);
    }
    sink_.flush();
    last_output_.reset();
    last_ref_ = GridRef::none();
    if (segment + 1 < static_cast<int>(plan_.segments().size())) {
      prev_key_.emplace(TrackedGrid{repack_keys(segment), {}});
      prev_key_->handle = tracker_.track_grid(prev_key_->grid, "previous_key");
    }
    buffer_.clear();
  }

  GridGenerator& gen_;
  const schedule::GenerationPlan& plan_;
  const schedule::ScheduleParams& params_;
  FrameSink& sink_;
  std::mt19937_64& rng_;
  const std::string& prompt_;
  MemoryTracker tracker_;
  std::map<int, TrackedFrame> buffer_;
  std::optional<TrackedGrid> last_output_;
  std::optional<TrackedGrid> prev_key_;
  GridRef last_ref_;
  GridImage empty_;
};

void require_roles(const GridGenerator& gen, const schedule::GenerationPlan& plan,
                   bool needs_key) {
  if (needs_key && !gen.has(ModelRole::kKeyGrid)) throw MissingRoleError("key grid model missing");
  if (plan.segments().size() > 1 && !gen.has(ModelRole::kNextKeyGrid)) {
    throw MissingRoleError("videos longer than one segment need a nextkey model");
  }
  for (int level = 1; level <= plan.params().levels(); ++level) {
    if (!gen.has(role_for_level(level))) {
      throw MissingRoleError(to_string(role_for_level(level)) + " model missing");
    }
  }
}

VideoManifest run_plan(const schedule::GenerationPlan& plan, const GridImage* external_key,
                       const std::string& prompt, GridGenerator& generator, FrameSink& sink,
                       std::mt19937_64& rng, std::uint64_t seed) {
  if (!(generator.layout().cells() == plan.params().frames_per_grid())) {
    throw ContractError("generator grid size differs from the schedule grid size");
  }
  require_roles(generator, plan, external_key == nullptr);
  Runner runner(generator, plan, sink, rng, prompt);
  VideoManifest m;
  m.invocations = runner.run(external_key);
  if (m.invocation_strings().size() != plan.invocations().size()) {
    throw PlanViolationError("executed invocations differ from the plan");
  }
  if (sink.frames_written() != plan.requested_frames()) {
    throw PlanViolationError("sink received " + std::to_string(sink.frames_written()) +
                             " frames, plan requested " + std::to_string(plan.requested_frames()));
  }
  m.prompt = prompt;
  m.n_frames = plan.requested_frames();
  m.total_frames = plan.total_frames();
  m.seed = seed;
  m.plan_digest = plan.digest();
  m.params = plan.params();
  m.checkpoints = generator.model_ids();
  m.memory = runner.tracker().report();
  m.memory.requested_frames = plan.requested_frames();
  m.memory.model_activation_bytes = generator.activation_bytes();
  return m;
}

}  // namespace

VideoManifest generate_video(const std::string& prompt, int n_frames, GridGenerator& generator,
                             const schedule::ScheduleParams& params, FrameSink& sink,
                             std::mt19937_64& rng, std::uint64_t seed) {
  if (n_frames < 1) throw DomainError("generate_video needs n_frames >= 1");
  const schedule::GenerationPlan plan = schedule::full_plan(n_frames, params);
  return run_plan(plan, nullptr, prompt, generator, sink, rng, seed);
}

VideoManifest interpolate_from_key_grid(const GridImage& key_grid, const std::string& prompt,
                                        GridGenerator& generator,
                                        const schedule::ScheduleParams& params, FrameSink& sink,
                                        std::mt19937_64& rng, std::uint64_t seed) {
  if (!(key_grid.layout == generator.layout())) {
    throw ContractError("supplied key grid layout differs from the models' layout");
  }
  if (!key_grid.mask.empty()) throw ContractError("supplied key grid carries a mask");
  const schedule::GenerationPlan plan = schedule::full_plan(params.segment_length(), params);
  return run_plan(plan, &key_grid, prompt, generator, sink, rng, seed);
}

std::vector<MemoryReport> memory_probe(std::span<const int> n_frames,
                                       const GeneratorFactory& factory,
                                       const schedule::ScheduleParams& params,
                                       const std::string& prompt, std::uint64_t seed) {
  std::vector<MemoryReport> out;
  for (int n : n_frames) {
    std::unique_ptr<GridGenerator> gen = factory();
    CountingSink sink;
    std::mt19937_64 rng(seed);
    out.push_back(generate_video(prompt, n, *gen, params, sink, rng, seed).memory);
  }
  return out;
}

std::string memory_csv(std::span<const MemoryReport> reports) {
  std::ostringstream os;
  os << "n_frames,peak_frames,peak_bytes\n";
  for (const MemoryReport& r : reports) {
    os << r.requested_frames << "," << r.peak_resident_frames << "," << r.peak_resident_bytes
       << "\n";
  }
  return os.str();
}

}  // namespace gridvid::pipeline
