// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/grid_codec.hpp"

#include <algorithm>
#include <string>

#include "gridvid/errors.hpp"

namespace gridvid {

GridLayout::GridLayout(int grid_side, int frame_size, int gutter, int channels)
    : grid_side_(grid_side), frame_size_(frame_size), gutter_(gutter), channels_(channels) {
  if (grid_side < 1 || grid_side > 4) {
    throw DomainError("grid side must be in [1, 4], got " + std::to_string(grid_side));
  }
  if (frame_size < 1 || gutter < 0 || channels < 1) {
    throw DomainError("invalid grid layout geometry");
  }
}

CellRect GridLayout::cell(int index) const {
  if (index < 0 || index >= cells()) {
    throw IndexError("cell " + std::to_string(index) + " outside grid of " +
                     std::to_string(cells()));
  }
  const int pitch = frame_size_ + gutter_;
  return {(index % grid_side_) * pitch, (index / grid_side_) * pitch, frame_size_};
}

std::vector<CellRect> layout_geometry(const GridLayout& layout) {
  std::vector<CellRect> rects;
  rects.reserve(layout.cells());
  for (int i = 0; i < layout.cells(); ++i) rects.push_back(layout.cell(i));
  return rects;
}

GridLayout full_size_layout_2x2() { return GridLayout(2, 254, 4); }
GridLayout full_size_layout_4x4() { return GridLayout(4, 128, 0); }

Frame extract_cell(const GridImage& grid, int index) {
  const CellRect r = grid.layout.cell(index);
  const int ch = grid.layout.channels();
  Frame out(r.size, r.size, ch);
  for (int y = 0; y < r.size; ++y) {
    const float* src = &grid.canvas.data()[(static_cast<std::size_t>(r.y + y) * grid.canvas.width() + r.x) * ch];
    std::copy_n(src, static_cast<std::size_t>(r.size) * ch, &out.at(0, y, 0));
  }
  return out;
}

void write_cell(GridImage& grid, int index, const Frame& frame) {
  const CellRect r = grid.layout.cell(index);
  if (frame.width() != r.size || frame.height() != r.size ||
      frame.channels() != grid.layout.channels()) {
    throw DimensionError("frame does not fit grid cell " + std::to_string(index));
  }
  const int ch = grid.layout.channels();
  for (int y = 0; y < r.size; ++y) {
    float* dst = &grid.canvas.data()[(static_cast<std::size_t>(r.y + y) * grid.canvas.width() + r.x) * ch];
    std::copy_n(frame.data().data() + static_cast<std::size_t>(y) * r.size * ch,
                static_cast<std::size_t>(r.size) * ch, dst);
  }
}

GridImage pack(std::span<const Frame> frames, const GridLayout& layout) {
  if (static_cast<int>(frames.size()) != layout.cells()) {
    throw ArityError("pack expects " + std::to_string(layout.cells()) + " frames, got " +
                     std::to_string(frames.size()));
  }
  for (const Frame& f : frames) {
    if (f.width() != layout.frame_size() || f.height() != layout.frame_size() ||
        f.channels() != layout.channels()) {
      throw DimensionError("frame size does not match layout frame size " +
                           std::to_string(layout.frame_size()));
    }
  }
  GridImage grid{layout, Frame(layout.canvas_size(), layout.canvas_size(), layout.channels()), {}};
  for (int i = 0; i < layout.cells(); ++i) write_cell(grid, i, frames[i]);
  return grid;
}

std::vector<Frame> unpack(const GridImage& grid) {
  std::vector<Frame> frames;
  frames.reserve(grid.layout.cells());
  for (int i = 0; i < grid.layout.cells(); ++i) frames.push_back(extract_cell(grid, i));
  return frames;
}

GridImage apply_mask(const GridImage& grid, const std::set<int>& positions) {
  GridImage out = grid;
  const Frame blank(grid.layout.frame_size(), grid.layout.frame_size(), grid.layout.channels());
  for (int p : positions) {
    if (p < 0 || p >= grid.layout.cells()) {
      throw IndexError("mask position " + std::to_string(p) + " outside grid");
    }
    write_cell(out, p, blank);
    out.mask.insert(p);
  }
  return out;
}

void clear_gutters(GridImage& grid) {
  if (grid.layout.gutter() == 0) return;
  std::vector<Frame> cells = unpack(grid);
  grid.canvas = Frame(grid.layout.canvas_size(), grid.layout.canvas_size(), grid.layout.channels());
  for (int i = 0; i < grid.layout.cells(); ++i) write_cell(grid, i, cells[i]);
}

void validate_grid(const GridImage& grid) {
  const int side = grid.layout.canvas_size();
  if (grid.canvas.width() != side || grid.canvas.height() != side ||
      grid.canvas.channels() != grid.layout.channels()) {
    throw ContractError("grid canvas does not match its layout");
  }
  std::vector<bool> inside(static_cast<std::size_t>(side) * side, false);
  for (int i = 0; i < grid.layout.cells(); ++i) {
    const CellRect r = grid.layout.cell(i);
    const bool masked = grid.mask.contains(i);
    for (int y = r.y; y < r.y + r.size; ++y) {
      for (int x = r.x; x < r.x + r.size; ++x) {
        inside[static_cast<std::size_t>(y) * side + x] = true;
        if (!masked) continue;
        for (int c = 0; c < grid.layout.channels(); ++c) {
          if (grid.canvas.at(x, y, c) != kFillValue) {
            throw ContractError("masked cell " + std::to_string(i) + " holds non-fill pixels");
          }
        }
      }
    }
  }
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if (inside[static_cast<std::size_t>(y) * side + x]) continue;
      for (int c = 0; c < grid.layout.channels(); ++c) {
        if (grid.canvas.at(x, y, c) != kFillValue) {
          throw ContractError("gutter pixel holds a non-fill value");
        }
      }
    }
  }
}

}  // namespace gridvid
