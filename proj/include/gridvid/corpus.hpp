// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gridvid/frame.hpp"
#include "gridvid/grid_codec.hpp"
#include "gridvid/schedule.hpp"

namespace gridvid::corpus {

enum class Shape : std::uint8_t { kSquare, kCircle, kTriangle };
enum class Color : std::uint8_t { kRed, kGreen, kBlue, kYellow, kCyan, kMagenta, kWhite, kOrange };
enum class Direction : std::uint8_t { kLeft, kRight, kUp, kDown, kUpRight, kDownLeft };
enum class Background : std::uint8_t { kBlack, kGray, kNavy, kBrown };
enum class Pace : std::uint8_t { kStill, kSlow, kQuick };

inline constexpr int kShapeCount = 3;
inline constexpr int kColorCount = 8;
inline constexpr int kDirectionCount = 6;
inline constexpr int kBackgroundCount = 4;

std::string_view name(Shape s);
std::string_view name(Color c);
std::string_view name(Direction d);
std::string_view name(Background b);

// 8-bit RGB; normalized value = v / 127.5 - 1.
std::array<std::uint8_t, 3> rgb(Color c);
std::array<std::uint8_t, 3> rgb(Background b);
float normalize_u8(std::uint8_t v);

// Speeds below this many pixels/frame read as "slowly".
inline constexpr double kQuickSpeed = 0.2;

struct SceneSpec {
  Shape shape = Shape::kSquare;
  Color color = Color::kRed;
  Direction direction = Direction::kRight;
  double speed = 0.25;  // pixels per frame along the direction
  double start_x = 0.0;  // top-left of the shape's bounding box
  double start_y = 0.0;
  Background background = Background::kBlack;
  int frame_size = 32;
  int shape_size = 10;
  std::uint64_t seed = 0;

  Pace pace() const noexcept;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

// Default shape extent for a frame size.
int default_shape_size(int frame_size);

// Unit displacement per frame for a direction (diagonals normalized).
std::array<double, 2> direction_vector(Direction d);

// Top-left of the shape at frame t; clamped so the shape stays inside.
std::array<int, 2> shape_origin(const SceneSpec& scene, int t);

Frame render(const SceneSpec& scene, int t);
std::vector<Frame> render_video(const SceneSpec& scene, int n_frames);

// Closed-vocabulary caption, e.g. "a red square moving right slowly on a
// black background". Grammar: docs/prompt_grammar.md.
std::string prompt_of(const SceneSpec& scene);

struct PromptFields {
  Shape shape = Shape::kSquare;
  Color color = Color::kRed;
  Direction direction = Direction::kRight;
  Pace pace = Pace::kSlow;
  Background background = Background::kBlack;
  friend bool operator==(const PromptFields&, const PromptFields&) = default;
};

PromptFields fields_of(const SceneSpec& scene);
// Throws ParseError when the text is outside the grammar.
PromptFields parse_prompt(std::string_view text);

// Token ids over the closed vocabulary. Unknown words throw ParseError.
int vocabulary_size();
std::vector<int> tokenize(std::string_view text);

// A scene drawn uniformly from the vocabulary whose trajectory stays inside
// the frame for n_frames when the speed allows it.
SceneSpec random_scene(std::mt19937_64& rng, int frame_size, int n_frames);

// Replaces every masked cell by the rendered ground truth for its frame index.
// Known cells must already match the rendering.
GridImage oracle_fill(const GridImage& masked, const SceneSpec& scene,
                      const schedule::InterpStep& step);

struct Video {
  std::vector<Frame> frames;
  std::optional<SceneSpec> scene;
  std::string prompt;
};

// Writes n_scenes (prompt, video) pairs plus an index to dir.
void build_dataset(const std::filesystem::path& dir, int n_scenes, int frames_per_video,
                   std::uint64_t seed, int frame_size = 32);

}  // namespace gridvid::corpus
