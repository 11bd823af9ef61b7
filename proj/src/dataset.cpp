// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/dataset.hpp"

#include <algorithm>
#include <cstdio>

#include "gridvid/errors.hpp"
#include "gridvid/gvf.hpp"
#include "gridvid/io.hpp"
#include "json.hpp"

namespace gridvid::corpus {

namespace {

using ordered_json = nlohmann::ordered_json;

template <typename E>
E enum_from_name(const std::string& text, int count, const char* what) {
  for (int i = 0; i < count; ++i) {
    if (name(static_cast<E>(i)) == text) return static_cast<E>(i);
  }
  throw ParseError(std::string("unknown ") + what + " '" + text + "'");
}

ordered_json scene_json(const SceneSpec& s) {
  ordered_json j;
  j["shape"] = std::string(name(s.shape));
  j["color"] = std::string(name(s.color));
  j["direction"] = std::string(name(s.direction));
  j["speed"] = s.speed;
  j["start_x"] = s.start_x;
  j["start_y"] = s.start_y;
  j["background"] = std::string(name(s.background));
  j["frame_size"] = s.frame_size;
  j["shape_size"] = s.shape_size;
  j["seed"] = s.seed;
  return j;
}

SceneSpec scene_of(const ordered_json& j) {
  try {
    SceneSpec s;
    s.shape = enum_from_name<Shape>(j.at("shape").get<std::string>(), kShapeCount, "shape");
    s.color = enum_from_name<Color>(j.at("color").get<std::string>(), kColorCount, "color");
    s.direction = enum_from_name<Direction>(j.at("direction").get<std::string>(),
                                            kDirectionCount, "direction");
    s.speed = j.at("speed").get<double>();
    s.start_x = j.at("start_x").get<double>();
    s.start_y = j.at("start_y").get<double>();
    s.background = enum_from_name<Background>(j.at("background").get<std::string>(),
                                              kBackgroundCount, "background");
    s.frame_size = j.at("frame_size").get<int>();
    s.shape_size = j.at("shape_size").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scene record: ") + e.what());
  }
}

std::string scene_file(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05d.gvf", i);
  return buf;
}

}  // namespace

SceneSpec dataset_scene(std::uint64_t seed, int index, int frame_size, int frames_per_video) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index) + 1);
  SceneSpec s = random_scene(rng, frame_size, frames_per_video);
  s.seed = seed;
  return s;
}

std::string scene_to_json(const SceneSpec& scene) { return scene_json(scene).dump(); }

SceneSpec scene_from_json(const std::string& text) {
  try {
    return scene_of(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scene json: ") + e.what());
  }
}

void build_dataset(const std::filesystem::path& dir, int n_scenes, int frames_per_video,
                   std::uint64_t seed, int frame_size) {
  if (n_scenes < 0 || frames_per_video < 1) {
    throw DomainError("dataset needs n_scenes >= 0 and frames_per_video >= 1");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir.string() + ": " + ec.message());
  ordered_json index;
  index["format"] = "gridvid-dataset/1";
  index["n_scenes"] = n_scenes;
  index["frames_per_video"] = frames_per_video;
  index["frame_size"] = frame_size;
  index["seed"] = seed;
  index["scenes"] = ordered_json::array();
  for (int i = 0; i < n_scenes; ++i) {
    const SceneSpec s = dataset_scene(seed, i, frame_size, frames_per_video);
    Video v;
    v.frames = render_video(s, frames_per_video);
    v.prompt = prompt_of(s);
    const std::string file = scene_file(i);
    try {
      write_gvf(v, dir / file);
    } catch (const IoError& e) {
      throw IoError(std::string("dataset scene ") + std::to_string(i) + ": " + e.what());
    }
    ordered_json entry;
    entry["file"] = file;
    entry["prompt"] = v.prompt;
    entry["scene"] = scene_json(s);
    index["scenes"].push_back(std::move(entry));
  }
  io::write_file_atomic(dir / "dataset.json", index.dump(1) + "\n");
}

DatasetIndex read_dataset_index(const std::filesystem::path& dir) {
  const std::string text = io::read_file(dir / "dataset.json");
  try {
    const ordered_json j = ordered_json::parse(text);
    if (j.at("format").get<std::string>() != "gridvid-dataset/1") {
      throw ParseError(dir.string() + ": unknown dataset format");
    }
    DatasetIndex idx;
    idx.frames_per_video = j.at("frames_per_video").get<int>();
    idx.frame_size = j.at("frame_size").get<int>();
    idx.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("scenes")) {
      idx.entries.push_back(
          {e.at("file").get<std::string>(), e.at("prompt").get<std::string>(), scene_of(e.at("scene"))});
    }
    return idx;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir.string() + "/dataset.json: " + e.what());
  }
}

std::vector<Video> load_dataset(const std::filesystem::path& dir, std::optional<int> limit) {
  const DatasetIndex idx = read_dataset_index(dir);
  std::size_t n = idx.entries.size();
  if (limit) n = std::min(n, static_cast<std::size_t>(std::max(*limit, 0)));
  std::vector<Video> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Video v = read_gvf(dir / idx.entries[i].file);
    v.scene = idx.entries[i].scene;
    if (v.prompt.empty()) v.prompt = idx.entries[i].prompt;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Video> load_video_dir(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir / "dataset.json")) return load_dataset(dir);
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".gvf") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Video> out;
  for (const auto& f : files) out.push_back(read_gvf(f));
  return out;
}

}  // namespace gridvid::corpus
