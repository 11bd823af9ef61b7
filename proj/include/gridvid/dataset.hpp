// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gridvid/corpus.hpp"

// On-disk corpus: DIR/dataset.json indexes DIR/scene_NNNNN.gvf files.
namespace gridvid::corpus {

struct DatasetEntry {
  std::string file;
  std::string prompt;
  SceneSpec scene;
};

struct DatasetIndex {
  int frames_per_video = 0;
  int frame_size = 0;
  std::uint64_t seed = 0;
  std::vector<DatasetEntry> entries;
};

// Scene i of a corpus built with the given seed.
SceneSpec dataset_scene(std::uint64_t seed, int index, int frame_size, int frames_per_video);

std::string scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const std::string& text);

DatasetIndex read_dataset_index(const std::filesystem::path& dir);
// Loads the first `limit` videos (all when unset) with their scenes.
std::vector<Video> load_dataset(const std::filesystem::path& dir,
                                std::optional<int> limit = std::nullopt);
// Every .gvf file in a directory, sorted by name; dataset.json scenes are
// attached when present.
std::vector<Video> load_video_dir(const std::filesystem::path& dir);

}  // namespace gridvid::corpus
