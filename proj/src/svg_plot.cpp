// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gridvid/errors.hpp"

namespace gridvid::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 70.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double number(const std::string& s, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("csv row " + std::to_string(row + 1) + ": '" + s + "' is not a number");
  }
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Axis range padded so a flat series sits mid-plot.
std::pair<double, double> range_of(const std::vector<double>& v, bool from_zero) {
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  if (from_zero) lo = std::min(lo, 0.0);
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(hi) * 0.5, 1.0);
    return {lo - pad, hi + pad};
  }
  return {lo, hi + 0.05 * (hi - lo)};
}

std::ostringstream open_svg(const std::string& title) {
  std::ostringstream o;
  o << R"(<?xml version="1.0" encoding="UTF-8"?>)" << "\n"
    << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")"
    << kHeight << R"(" viewBox="0 0 )" << kWidth << ' ' << kHeight << R"(">)" << "\n"
    << R"(<rect width="100%" height="100%" fill="white"/>)" << "\n"
    << R"(<text x=")" << kWidth / 2 << R"(" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">)"
    << escape(title) << "</text>\n";
  return o;
}

void axes(std::ostringstream& o) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  o << R"(<g stroke="black" stroke-width="1">)"
    << R"(<line x1=")" << x0 << R"(" y1=")" << y0 << R"(" x2=")" << x1 << R"(" y2=")" << y0 << R"("/>)"
    << R"(<line x1=")" << x0 << R"(" y1=")" << y0 << R"(" x2=")" << x0 << R"(" y2=")" << y1 << R"("/>)"
    << "</g>\n";
}

void label(std::ostringstream& o, double x, double y, const std::string& text,
           const char* anchor = "middle", const char* color = "black") {
  o << R"(<text x=")" << px(x) << R"(" y=")" << px(y) << R"(" text-anchor=")" << anchor
    << R"(" font-family="sans-serif" font-size="11" fill=")" << color << R"(">)" << escape(text)
    << "</text>\n";
}

}  // namespace

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t b = 0;
    while (true) {
      const auto c = line.find(',', b);
      cells.push_back(trim(std::string_view(line).substr(b, c == std::string::npos ? c : c - b)));
      if (c == std::string::npos) break;
      b = c + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) {
        throw ParseError("csv row " + std::to_string(t.rows.size() + 1) + " has " +
                         std::to_string(cells.size()) + " fields, header has " +
                         std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ParseError("csv has no header");
  return t;
}

std::string memory_curve_svg(const CsvTable& table) {
  const int cx = table.column("n_frames");
  const int cf = table.column("peak_frames");
  const int cb = table.column("peak_bytes");
  if (cx < 0 || cf < 0) throw ParseError("memory csv needs n_frames and peak_frames columns");
  if (table.rows.empty()) throw InsufficientSamplesError("memory csv has no rows");
  std::vector<double> xs, fs, bs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    xs.push_back(number(table.rows[r][cx], r));
    fs.push_back(number(table.rows[r][cf], r));
    if (cb >= 0) bs.push_back(number(table.rows[r][cb], r));
  }
  auto o = open_svg("Peak resident memory vs. video length");
  axes(o);
  const auto [xlo, xhi] = range_of(xs, true);
  const auto [flo, fhi] = range_of(fs, true);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto X = [&](double v) { return kLeft + (v - xlo) / (xhi - xlo) * pw; };
  auto series = [&](const std::vector<double>& ys, double lo, double hi, const char* color) {
    auto Y = [&](double v) { return kHeight - kBottom - (v - lo) / (hi - lo) * ph; };
    o << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="2" points=")";
    for (std::size_t i = 0; i < xs.size(); ++i) o << px(X(xs[i])) << ',' << px(Y(ys[i])) << ' ';
    o << "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      o << R"(<circle cx=")" << px(X(xs[i])) << R"(" cy=")" << px(Y(ys[i])) << R"(" r="3" fill=")"
        << color << "\"/>\n";
    }
  };
  series(fs, flo, fhi, "#1f77b4");
  for (double v : xs) label(o, X(v), kHeight - kBottom + 16, fmt(v));
  label(o, kLeft - 6, kHeight - kBottom, fmt(flo), "end", "#1f77b4");
  label(o, kLeft - 6, kTop + 4, fmt(fhi), "end", "#1f77b4");
  label(o, kWidth / 2, kHeight - 16, "requested frames");
  label(o, 16, kTop - 10, "peak frames", "start", "#1f77b4");
  if (!bs.empty()) {
    const auto [blo, bhi] = range_of(bs, true);
    series(bs, blo, bhi, "#d62728");
    label(o, kWidth - kRight + 6, kHeight - kBottom, fmt(blo), "start", "#d62728");
    label(o, kWidth - kRight + 6, kTop + 4, fmt(bhi), "start", "#d62728");
    label(o, kWidth - 16, kTop - 10, "peak bytes", "end", "#d62728");
  }
  o << "</svg>\n";
  return o.str();
}

std::string metric_bars_svg(const CsvTable& table) {
  const int cm = table.column("metric");
  const int cv = table.column("value");
  if (cm < 0 || cv < 0) throw ParseError("metric csv needs metric and value columns");
  if (table.rows.empty()) throw InsufficientSamplesError("metric csv has no rows");
  std::vector<double> vs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) vs.push_back(number(table.rows[r][cv], r));
  auto o = open_svg("Metrics");
  axes(o);
  const auto [lo, hi] = range_of(vs, true);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto Y = [&](double v) { return kHeight - kBottom - (v - lo) / (hi - lo) * ph; };
  const double slot = pw / static_cast<double>(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const double x = kLeft + slot * (i + 0.15);
    const double top = std::min(Y(vs[i]), Y(0.0));
    const double h = std::abs(Y(vs[i]) - Y(0.0));
    o << R"(<rect x=")" << px(x) << R"(" y=")" << px(top) << R"(" width=")" << px(slot * 0.7)
      << R"(" height=")" << px(h) << R"(" fill="#2ca02c"/>)" << "\n";
    label(o, x + slot * 0.35, top - 4, fmt(vs[i]));
    label(o, x + slot * 0.35, kHeight - kBottom + 16, table.rows[i][cm]);
  }
  o << "</svg>\n";
  return o.str();
}

std::string plot_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  if (t.column("n_frames") >= 0 && t.column("peak_frames") >= 0) return memory_curve_svg(t);
  if (t.column("metric") >= 0 && t.column("value") >= 0) return metric_bars_svg(t);
  throw UnsupportedError("no chart for csv columns starting with '" + t.header.front() + "'");
}

}  // namespace gridvid::plot
