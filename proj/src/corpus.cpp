// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gridvid/errors.hpp"

namespace gridvid::corpus {

namespace {

constexpr std::array<std::string_view, kShapeCount> kShapeNames{"square", "circle", "triangle"};
constexpr std::array<std::string_view, kColorCount> kColorNames{
    "red", "green", "blue", "yellow", "cyan", "magenta", "white", "orange"};
constexpr std::array<std::string_view, kDirectionCount> kDirectionNames{
    "left", "right", "up", "down", "up-right", "down-left"};
constexpr std::array<std::string_view, kBackgroundCount> kBackgroundNames{
    "black", "gray", "navy", "brown"};

constexpr std::array<std::array<std::uint8_t, 3>, kColorCount> kColorRgb{{
    {255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 0},
    {0, 255, 255}, {255, 0, 255}, {255, 255, 255}, {255, 128, 0},
}};
constexpr std::array<std::array<std::uint8_t, 3>, kBackgroundCount> kBackgroundRgb{{
    {0, 0, 0}, {128, 128, 128}, {0, 0, 128}, {128, 64, 0},
}};

constexpr std::array<std::string_view, 8> kFunctionWords{
    "a", "moving", "standing", "still", "slowly", "quickly", "on", "background"};

template <std::size_t N>
int index_of(const std::array<std::string_view, N>& names, std::string_view word) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == word) return static_cast<int>(i);
  }
  return -1;
}

const std::map<std::string, int, std::less<>>& vocabulary() {
  static const std::map<std::string, int, std::less<>> vocab = [] {
    std::map<std::string, int, std::less<>> v;
    int next = 0;
    auto add = [&](std::string_view w) { v.emplace(std::string(w), next++); };
    for (auto w : kFunctionWords) add(w);
    for (auto w : kColorNames) add(w);
    for (auto w : kShapeNames) add(w);
    for (auto w : kDirectionNames) add(w);
    for (auto w : kBackgroundNames) add(w);
    return v;
  }();
  return vocab;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

bool covers(Shape shape, int size, int i, int j) {
  const double half = size / 2.0;
  const double px = i + 0.5 - half;
  const double py = j + 0.5 - half;
  switch (shape) {
    case Shape::kSquare: return true;
    case Shape::kCircle: return px * px + py * py <= half * half;
    case Shape::kTriangle: return std::abs(px) <= (j + 0.5) / 2.0 + 0.5;
  }
  return false;
}

}  // namespace

std::string_view name(Shape s) { return kShapeNames[static_cast<int>(s)]; }
std::string_view name(Color c) { return kColorNames[static_cast<int>(c)]; }
std::string_view name(Direction d) { return kDirectionNames[static_cast<int>(d)]; }
std::string_view name(Background b) { return kBackgroundNames[static_cast<int>(b)]; }

std::array<std::uint8_t, 3> rgb(Color c) { return kColorRgb[static_cast<int>(c)]; }
std::array<std::uint8_t, 3> rgb(Background b) { return kBackgroundRgb[static_cast<int>(b)]; }
float normalize_u8(std::uint8_t v) { return static_cast<float>(v / 127.5 - 1.0); }

Pace SceneSpec::pace() const noexcept {
  if (speed <= 0.0) return Pace::kStill;
  return speed < kQuickSpeed ? Pace::kSlow : Pace::kQuick;
}

int default_shape_size(int frame_size) { return std::max(3, (5 * frame_size + 8) / 16); }

std::array<double, 2> direction_vector(Direction d) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (d) {
    case Direction::kLeft: return {-1.0, 0.0};
    case Direction::kRight: return {1.0, 0.0};
    case Direction::kUp: return {0.0, -1.0};
    case Direction::kDown: return {0.0, 1.0};
    case Direction::kUpRight: return {r, -r};
    case Direction::kDownLeft: return {-r, r};
  }
  return {0.0, 0.0};
}

std::array<int, 2> shape_origin(const SceneSpec& scene, int t) {
  const auto dir = direction_vector(scene.direction);
  const double limit = scene.frame_size - scene.shape_size;
  const double x = std::clamp(scene.start_x + t * scene.speed * dir[0], 0.0, limit);
  const double y = std::clamp(scene.start_y + t * scene.speed * dir[1], 0.0, limit);
  return {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))};
}

Frame render(const SceneSpec& scene, int t) {
  if (t < 0) throw DomainError("frame index must be non-negative");
  if (scene.shape_size < 1 || scene.shape_size > scene.frame_size) {
    throw DomainError("shape size must fit inside the frame");
  }
  Frame f(scene.frame_size, scene.frame_size, 3);
  const auto bg = rgb(scene.background);
  const auto fg = rgb(scene.color);
  for (int y = 0; y < scene.frame_size; ++y) {
    for (int x = 0; x < scene.frame_size; ++x) {
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = normalize_u8(bg[c]);
    }
  }
  const auto [ox, oy] = shape_origin(scene, t);
  for (int j = 0; j < scene.shape_size; ++j) {
    for (int i = 0; i < scene.shape_size; ++i) {
      if (!covers(scene.shape, scene.shape_size, i, j)) continue;
      for (int c = 0; c < 3; ++c) f.at(ox + i, oy + j, c) = normalize_u8(fg[c]);
    }
  }
  return f;
}

std::vector<Frame> render_video(const SceneSpec& scene, int n_frames) {
  std::vector<Frame> frames;
  frames.reserve(std::max(n_frames, 0));
  for (int t = 0; t < n_frames; ++t) frames.push_back(render(scene, t));
  return frames;
}

std::string prompt_of(const SceneSpec& scene) {
  std::ostringstream os;
  os << "a " << name(scene.color) << ' ' << name(scene.shape) << ' ';
  switch (scene.pace()) {
    case Pace::kStill: os << "standing still"; break;
    case Pace::kSlow: os << "moving " << name(scene.direction) << " slowly"; break;
    case Pace::kQuick: os << "moving " << name(scene.direction) << " quickly"; break;
  }
  os << " on a " << name(scene.background) << " background";
  return os.str();
}

PromptFields fields_of(const SceneSpec& scene) {
  PromptFields f{scene.shape, scene.color, scene.direction, scene.pace(), scene.background};
  if (f.pace == Pace::kStill) f.direction = Direction::kRight;
  return f;
}

PromptFields parse_prompt(std::string_view text) {
  const auto words = split_words(text);
  auto fail = [&](const std::string& why) {
    return ParseError("prompt '" + std::string(text) + "': " + why);
  };
  std::size_t i = 0;
  auto expect = [&](std::string_view w) {
    if (i >= words.size() || words[i] != w) throw fail("expected '" + std::string(w) + "'");
    ++i;
  };
  auto next = [&]() -> std::string_view {
    if (i >= words.size()) throw fail("unexpected end");
    return words[i++];
  };
  PromptFields f;
  expect("a");
  const int color = index_of(kColorNames, next());
  if (color < 0) throw fail("unknown color");
  const int shape = index_of(kShapeNames, next());
  if (shape < 0) throw fail("unknown shape");
  f.color = static_cast<Color>(color);
  f.shape = static_cast<Shape>(shape);
  const std::string_view motion = next();
  if (motion == "standing") {
    expect("still");
    f.pace = Pace::kStill;
    f.direction = Direction::kRight;
  } else if (motion == "moving") {
    const int dir = index_of(kDirectionNames, next());
    if (dir < 0) throw fail("unknown direction");
    f.direction = static_cast<Direction>(dir);
    const std::string_view pace = next();
    if (pace == "slowly") {
      f.pace = Pace::kSlow;
    } else if (pace == "quickly") {
      f.pace = Pace::kQuick;
    } else {
      throw fail("unknown pace");
    }
  } else {
    throw fail("expected 'moving' or 'standing'");
  }
  expect("on");
  expect("a");
  const int bg = index_of(kBackgroundNames, next());
  if (bg < 0) throw fail("unknown background");
  f.background = static_cast<Background>(bg);
  expect("background");
  if (i != words.size()) throw fail("trailing words");
  return f;
}

int vocabulary_size() { return static_cast<int>(vocabulary().size()); }

std::vector<int> tokenize(std::string_view text) {
  std::vector<int> ids;
  for (std::string_view w : split_words(text)) {
    auto it = vocabulary().find(w);
    if (it == vocabulary().end()) {
      throw ParseError("word '" + std::string(w) + "' is outside the prompt vocabulary");
    }
    ids.push_back(it->second);
  }
  return ids;
}

SceneSpec random_scene(std::mt19937_64& rng, int frame_size, int n_frames) {
  static constexpr std::array<double, 4> kSpeeds{1.0 / 8.0, 1.0 / 6.0, 1.0 / 4.0, 1.0 / 3.0};
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  SceneSpec s;
  s.frame_size = frame_size;
  s.shape_size = default_shape_size(frame_size);
  s.shape = static_cast<Shape>(pick(kShapeCount));
  s.color = static_cast<Color>(pick(kColorCount));
  s.direction = static_cast<Direction>(pick(kDirectionCount));
  s.background = static_cast<Background>(pick(kBackgroundCount));
  s.speed = kSpeeds[pick(static_cast<int>(kSpeeds.size()))];
  const auto dir = direction_vector(s.direction);
  const double limit = frame_size - s.shape_size;
  std::array<double, 2> start{};
  for (int axis = 0; axis < 2; ++axis) {
    const double travel = std::max(n_frames - 1, 0) * s.speed * dir[axis];
    double lo = std::max(0.0, -travel);
    double hi = std::min(limit, limit - travel);
    if (lo > hi) {
      // The trajectory cannot fit: start at the side it moves away from.
      lo = hi = travel > 0 ? 0.0 : limit;
    }
    const int lo_i = static_cast<int>(std::ceil(lo));
    const int hi_i = std::max(lo_i, static_cast<int>(std::floor(hi)));
    start[axis] = std::uniform_int_distribution<int>(lo_i, hi_i)(rng);
  }
  s.start_x = start[0];
  s.start_y = start[1];
  s.seed = rng();
  return s;
}

GridImage oracle_fill(const GridImage& masked, const SceneSpec& scene,
                      const schedule::InterpStep& step) {
  const int k = masked.layout.cells();
  if (static_cast<int>(step.fills.size()) + 2 != k) {
    throw ContractError("interpolation step does not match the grid's cell count");
  }
  if (scene.frame_size != masked.layout.frame_size()) {
    throw UnsupportedError("scene frame size differs from the grid layout");
  }
  GridImage out = masked;
  for (int cell = 0; cell < k; ++cell) {
    const Frame truth = render(scene, step.index_of_cell(cell));
    if (masked.mask.contains(cell)) {
      write_cell(out, cell, truth);
    } else if (extract_cell(masked, cell) != truth) {
      throw ContractError("known cell " + std::to_string(cell) +
                          " is inconsistent with frame " + std::to_string(step.index_of_cell(cell)));
    }
  }
  out.mask.clear();
  return out;
}

}  // namespace gridvid::corpus
