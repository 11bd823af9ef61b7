// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <span>
#include <vector>

#include "gridvid/frame.hpp"

namespace gridvid {

struct CellRect {
  int x = 0;
  int y = 0;
  int size = 0;
  friend bool operator==(const CellRect&, const CellRect&) = default;
};

// Geometry of a G x G grid of square inside frames separated by a gutter.
// Cells are ordered row-major; cell 0 is the earliest frame.
class GridLayout {
 public:
  GridLayout() = default;
  GridLayout(int grid_side, int frame_size, int gutter = 0, int channels = 3);

  int grid_side() const noexcept { return grid_side_; }
  int cells() const noexcept { return grid_side_ * grid_side_; }
  int frame_size() const noexcept { return frame_size_; }
  int gutter() const noexcept { return gutter_; }
  int channels() const noexcept { return channels_; }
  int canvas_size() const noexcept {
    return grid_side_ * frame_size_ + (grid_side_ - 1) * gutter_;
  }

  CellRect cell(int index) const;

  friend bool operator==(const GridLayout&, const GridLayout&) = default;

 private:
  int grid_side_ = 2;
  int frame_size_ = 16;
  int gutter_ = 0;
  int channels_ = 3;
};

// Cell rectangles, row-major, matching pack()'s placement.
std::vector<CellRect> layout_geometry(const GridLayout& layout);

// 2x2 grid of 254 px frames with a 4 px gutter: a 512 px canvas.
GridLayout full_size_layout_2x2();
// 4x4 grid of 128 px frames without gutter: a 512 px canvas.
GridLayout full_size_layout_4x4();

struct GridImage {
  GridLayout layout;
  Frame canvas;
  std::set<int> mask;

  friend bool operator==(const GridImage&, const GridImage&) = default;
};

GridImage pack(std::span<const Frame> frames, const GridLayout& layout);
std::vector<Frame> unpack(const GridImage& grid);

// Copies one inside frame out of the canvas.
Frame extract_cell(const GridImage& grid, int index);
// Overwrites one inside frame of the canvas.
void write_cell(GridImage& grid, int index, const Frame& frame);

GridImage apply_mask(const GridImage& grid, const std::set<int>& positions);

// Resets every gutter pixel to the fill value.
void clear_gutters(GridImage& grid);

// Checks the mask and gutter invariants; throws ContractError on violation.
void validate_grid(const GridImage& grid);

}  // namespace gridvid
