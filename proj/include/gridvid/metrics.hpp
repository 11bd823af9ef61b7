// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridvid/corpus.hpp"

namespace gridvid::metrics {

using FeatureVector = std::vector<double>;

// frame_signature layout:
//   [0, 24)   8-bin histogram per channel, fractions of pixels
//   [24, 30)  foreground area, centroid x, y, variance x, y, covariance xy
//             (coordinates in units of the frame side)
//   [30, 46)  fixed-seed random projection of an 8x8 average-pooled frame
// Blocks are scaled by 1, 0.5 and 0.25 respectively.
inline constexpr int kHistogramBins = 8;
inline constexpr int kHistogramDims = 3 * kHistogramBins;
inline constexpr int kMomentDims = 6;
inline constexpr int kProjectionDims = 16;
inline constexpr int kSignatureDims = kHistogramDims + kMomentDims + kProjectionDims;

FeatureVector frame_signature(const Frame& frame);

// Pixels whose color is more than this far (max channel difference, in
// normalized units) from the most common color count as foreground.
inline constexpr double kForegroundThreshold = 0.1;

struct ForegroundStats {
  int pixels = 0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  std::array<double, 3> mean_color{};  // normalized
  int min_x = 0, max_x = -1, min_y = 0, max_y = -1;
};

ForegroundStats foreground(const Frame& frame);

// Mean signature over every placement of the described shape in a frame of
// the given size.
FeatureVector prompt_signature(std::string_view prompt, int frame_size);

// Cosine similarity; 0 when either vector is all zero.
double cosine(std::span<const double> a, std::span<const double> b);

// Mean over frames of cosine(frame_signature, prompt_signature).
double clipsim_proxy(const corpus::Video& video, std::string_view prompt);

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

GaussianMoments estimate_moments(std::span<const FeatureVector> features);

struct FrechetOptions {
  double epsilon = 1e-6;
  double clip = 1e-8;
};

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b,
                        const FrechetOptions& options = {});

class VideoFeatureExtractor {
 public:
  virtual ~VideoFeatureExtractor() = default;
  virtual FeatureVector extract(std::span<const Frame> frames) const = 0;
  virtual std::string id() const = 0;
};

// Mean, standard deviation and mean lag-1 difference of the frame signature
// sequence.
class SignatureVideoExtractor final : public VideoFeatureExtractor {
 public:
  FeatureVector extract(std::span<const Frame> frames) const override;
  std::string id() const override { return "signature-stats/1"; }
};

const VideoFeatureExtractor& default_video_extractor();

double fvd(std::span<const corpus::Video> a, std::span<const corpus::Video> b,
           const VideoFeatureExtractor& extractor = default_video_extractor(),
           const FrechetOptions& options = {});

// Mean FVD over aligned non-overlapping clips of block_len frames; a trailing
// partial block is dropped.
double block_fvd(std::span<const corpus::Video> a, std::span<const corpus::Video> b, int block_len,
                 const VideoFeatureExtractor& extractor = default_video_extractor(),
                 const FrechetOptions& options = {});

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int classes() const = 0;
  virtual std::vector<double> probabilities(const Frame& frame) const = 0;
  virtual std::string id() const = 0;
};

// Shape x color classes (class = shape * 8 + color) from the foreground's
// fill ratio, vertical asymmetry and mean color.
class GrammarClassifier final : public Classifier {
 public:
  int classes() const override { return corpus::kShapeCount * corpus::kColorCount; }
  std::vector<double> probabilities(const Frame& frame) const override;
  std::string id() const override { return "grammar/1"; }
  static int class_of(corpus::Shape shape, corpus::Color color) {
    return static_cast<int>(shape) * corpus::kColorCount + static_cast<int>(color);
  }
};

// exp(E_x KL(p(y|x) || p(y))). Rows must be probability vectors.
double inception_score(std::span<const std::vector<double>> probabilities);
double inception_score(std::span<const Frame> frames, const Classifier& classifier);
// A video's class distribution is the mean over its frames.
double inception_score(std::span<const corpus::Video> videos, const Classifier& classifier);

}  // namespace gridvid::metrics
