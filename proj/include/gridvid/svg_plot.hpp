// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridvid::plot {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
};

// Plain comma-separated text without quoting; blank lines are skipped.
CsvTable parse_csv(std::string_view text);

// peak_frames (left axis) and peak_bytes (right axis) against n_frames.
std::string memory_curve_svg(const CsvTable& table);

// One bar per row of a metric,value table.
std::string metric_bars_svg(const CsvTable& table);

// Picks the chart from the header: n_frames/peak_frames gives a memory
// curve, metric/value gives bars.
std::string plot_csv(std::string_view text);

}  // namespace gridvid::plot
