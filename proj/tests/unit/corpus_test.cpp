// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "doctest.h"
#include "gridvid/dataset.hpp"
#include "gridvid/errors.hpp"
#include "gridvid/gvf.hpp"
#include "gridvid/io.hpp"
#include "gridvid/metrics.hpp"
#include "support.hpp"

using namespace gridvid;
using namespace gridvid::corpus;

TEST_SUITE("corpus") {

TEST_CASE("static scene renders the same frame at every t") {
  const auto s = testing::scene(Shape::kCircle, Color::kGreen, Direction::kUp, 0.0, 4, 5);
  const Frame f0 = render(s, 0);
  for (int t : {1, 7, 100}) CHECK(render(s, t) == f0);
  CHECK(render(s, 3) == render(s, 3));
  CHECK_THROWS_AS(render(s, -1), DomainError);
}

TEST_CASE("centroid follows the motion law") {
  auto s = testing::scene(Shape::kSquare, Color::kRed, Direction::kRight, 2.0, 1, 8, 32);
  const auto a = metrics::foreground(render(s, 0));
  const auto b = metrics::foreground(render(s, 5));
  CHECK(b.centroid_x - a.centroid_x == doctest::Approx(10.0));
  CHECK(b.centroid_y == doctest::Approx(a.centroid_y));

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const SceneSpec r = random_scene(rng, 32, 28);
    const auto dir = direction_vector(r.direction);
    for (int t = 1; t < 28; ++t) {
      const auto o0 = shape_origin(r, t - 1);
      const auto o1 = shape_origin(r, t);
      const double limit = r.frame_size - r.shape_size;
      const double ex = std::clamp(r.start_x + t * r.speed * dir[0], 0.0, limit) -
                        std::clamp(r.start_x + (t - 1) * r.speed * dir[0], 0.0, limit);
      CHECK(std::abs((o1[0] - o0[0]) - ex) <= 1.0);
    }
  }
}

TEST_CASE("shapes stay inside the frame") {
  auto s = testing::scene(Shape::kTriangle, Color::kWhite, Direction::kDownLeft, 1.0, 3, 3);
  const Frame f = render(s, 500);
  const auto fg = metrics::foreground(f);
  CHECK(fg.min_x == 0);
  CHECK(fg.max_y == 15);
  CHECK(fg.pixels > 0);
}

TEST_CASE("prompt template") {
  auto s = testing::scene(Shape::kSquare, Color::kRed, Direction::kRight, 0.125, 0, 0);
  CHECK(prompt_of(s) == "a red square moving right slowly on a black background");
  s.speed = 0.25;
  s.background = Background::kNavy;
  CHECK(prompt_of(s) == "a red square moving right quickly on a navy background");
  s.speed = 0.0;
  CHECK(prompt_of(s) == "a red square standing still on a navy background");
}

TEST_CASE("prompt round trip over the vocabulary") {
  std::set<std::string> prompts;
  for (int sh = 0; sh < kShapeCount; ++sh) {
    for (int co = 0; co < kColorCount; ++co) {
      for (int d = 0; d < kDirectionCount; ++d) {
        for (double speed : {0.0, 0.125, 0.25}) {
          for (int bg = 0; bg < kBackgroundCount; ++bg) {
            SceneSpec s;
            s.shape = static_cast<Shape>(sh);
            s.color = static_cast<Color>(co);
            s.direction = static_cast<Direction>(d);
            s.speed = speed;
            s.background = static_cast<Background>(bg);
            const std::string p = prompt_of(s);
            CHECK(parse_prompt(p) == fields_of(s));
            prompts.insert(p);
            for (int id : tokenize(p)) CHECK(id < vocabulary_size());
          }
        }
      }
    }
  }
  CHECK(prompts.size() == static_cast<std::size_t>(kShapeCount * kColorCount * kBackgroundCount *
                                                   (2 * kDirectionCount + 1)));
}

TEST_CASE("prompt parse errors") {
  CHECK_THROWS_AS(parse_prompt("a purple square moving right slowly on a black background"),
                  ParseError);
  CHECK_THROWS_AS(parse_prompt("a red square"), ParseError);
  CHECK_THROWS_AS(parse_prompt("a red square standing still on a black background now"),
                  ParseError);
  CHECK_THROWS_AS(tokenize("a red dodecahedron"), ParseError);
}

TEST_CASE("random scenes are deterministic") {
  std::mt19937_64 a(4), b(4);
  for (int i = 0; i < 20; ++i) CHECK(random_scene(a, 16, 56) == random_scene(b, 16, 56));
  CHECK(dataset_scene(7, 3, 16, 28) == dataset_scene(7, 3, 16, 28));
  CHECK(!(dataset_scene(7, 3, 16, 28) == dataset_scene(7, 4, 16, 28)));
}

TEST_CASE("dataset build is byte reproducible") {
  const auto d1 = testing::temp_dir("corpus_a");
  const auto d2 = testing::temp_dir("corpus_b");
  build_dataset(d1, 10, 28, 7, 16);
  build_dataset(d2, 10, 28, 7, 16);
  CHECK(io::read_file(d1 / "dataset.json") == io::read_file(d2 / "dataset.json"));
  for (const auto& e : read_dataset_index(d1).entries) {
    CHECK(io::read_file(d1 / e.file) == io::read_file(d2 / e.file));
  }
  const auto videos = load_dataset(d1);
  REQUIRE(videos.size() == 10);
  std::mt19937_64 rng(1);
  for (const auto& v : videos) {
    CHECK(v.frames.size() == 28);
    CHECK(v.scene.has_value());
    CHECK(v.frames == render_video(*v.scene, 28));
    CHECK(v.prompt == prompt_of(*v.scene));
    CHECK_NOTHROW(schedule::training_sample(static_cast<int>(v.frames.size()), 3, rng));
  }
  CHECK(load_dataset(d1, 3).size() == 3);
}

TEST_CASE("empty dataset") {
  const auto d = testing::temp_dir("corpus_empty");
  build_dataset(d, 0, 28, 1, 16);
  const auto idx = read_dataset_index(d);
  CHECK(idx.entries.empty());
  CHECK(idx.frames_per_video == 28);
  CHECK(load_dataset(d).empty());
}

TEST_CASE("scene json round trip") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    const SceneSpec s = random_scene(rng, 16, 28);
    CHECK(scene_from_json(scene_to_json(s)) == s);
  }
  CHECK_THROWS_AS(scene_from_json("{\"shape\": \"blob\"}"), ParseError);
}

TEST_CASE("oracle fill") {
  const auto s = testing::scene(Shape::kCircle, Color::kBlue, Direction::kRight, 0.25, 1, 4);
  const schedule::ScheduleParams p;
  const GridLayout layout(2, 16, 0);
  for (int level : {1, 2}) {
    for (const auto& step : schedule::level_steps(0, level, p)) {
      std::vector<Frame> truth;
      for (int c = 0; c < 4; ++c) truth.push_back(render(s, step.index_of_cell(c)));
      const GridImage full = pack(truth, layout);
      CHECK(oracle_fill(apply_mask(full, {1, 2}), s, step) == full);
      CHECK(oracle_fill(full, s, step) == full);
    }
  }
  const auto step = schedule::level_steps(0, 1, p)[0];
  const GridImage wrong = pack(render_video(s, 4), layout);
  CHECK_THROWS_AS(oracle_fill(apply_mask(wrong, {1, 2}), s, step), ContractError);
  auto big = s;
  big.frame_size = 32;
  CHECK_THROWS_AS(oracle_fill(apply_mask(wrong, {1, 2}), big, step), UnsupportedError);
}

}  // TEST_SUITE
