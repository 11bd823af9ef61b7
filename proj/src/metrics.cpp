// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "gridvid/errors.hpp"

namespace gridvid::metrics {

namespace {

constexpr int kPool = 8;
constexpr double kMomentScale = 0.5;
constexpr double kProjectionScale = 0.25;

const Eigen::MatrixXd& projection_matrix() {
  static const Eigen::MatrixXd m = [] {
    std::mt19937_64 rng(0x51C7A7E5ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int in = kPool * kPool * 3;
    Eigen::MatrixXd p(kProjectionDims, in);
    for (int r = 0; r < kProjectionDims; ++r) {
      for (int c = 0; c < in; ++c) p(r, c) = normal(rng) / std::sqrt(static_cast<double>(in));
    }
    return p;
  }();
  return m;
}

std::array<std::uint8_t, 3> pixel_u8(const Frame& f, int x, int y) {
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double q = std::nearbyint((f.at(x, y, c) + 1.0) * 127.5);
    out[c] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
  }
  return out;
}

std::array<double, 3> mode_color(const Frame& f) {
  std::map<std::array<std::uint8_t, 3>, int> counts;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) ++counts[pixel_u8(f, x, y)];
  }
  std::array<std::uint8_t, 3> best{};
  int best_n = -1;
  for (const auto& [color, n] : counts) {
    if (n > best_n) {
      best = color;
      best_n = n;
    }
  }
  return {corpus::normalize_u8(best[0]), corpus::normalize_u8(best[1]),
          corpus::normalize_u8(best[2])};
}

void require_rgb(const Frame& f) {
  if (f.channels() != 3 || f.width() < 1 || f.height() < 1) {
    throw DimensionError("metrics expect non-empty 3-channel frames");
  }
}

std::vector<FeatureVector> signatures(std::span<const Frame> frames) {
  std::vector<FeatureVector> out;
  out.reserve(frames.size());
  for (const Frame& f : frames) out.push_back(frame_signature(f));
  return out;
}

}  // namespace

ForegroundStats foreground(const Frame& f) {
  require_rgb(f);
  const auto mode = mode_color(f);
  ForegroundStats s;
  s.min_x = f.width();
  s.min_y = f.height();
  double sx = 0.0, sy = 0.0;
  std::array<double, 3> color{};
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double diff = 0.0;
      for (int c = 0; c < 3; ++c) diff = std::max(diff, std::abs(f.at(x, y, c) - mode[c]));
      if (diff <= kForegroundThreshold) continue;
      ++s.pixels;
      sx += x + 0.5;
      sy += y + 0.5;
      for (int c = 0; c < 3; ++c) color[c] += f.at(x, y, c);
      s.min_x = std::min(s.min_x, x);
      s.max_x = std::max(s.max_x, x);
      s.min_y = std::min(s.min_y, y);
      s.max_y = std::max(s.max_y, y);
    }
  }
  if (s.pixels > 0) {
    s.centroid_x = sx / s.pixels;
    s.centroid_y = sy / s.pixels;
    for (int c = 0; c < 3; ++c) s.mean_color[c] = color[c] / s.pixels;
  } else {
    s.min_x = s.min_y = 0;
  }
  return s;
}

FeatureVector frame_signature(const Frame& f) {
  require_rgb(f);
  FeatureVector sig(kSignatureDims, 0.0);
  const double n = static_cast<double>(f.width()) * f.height();
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double u = (std::clamp(static_cast<double>(f.at(x, y, c)), -1.0, 1.0) + 1.0) / 2.0;
        const int bin = std::min(kHistogramBins - 1, static_cast<int>(u * kHistogramBins));
        sig[c * kHistogramBins + bin] += 1.0 / n;
      }
    }
  }

  const auto mode = mode_color(f);
  double area = 0.0, mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double diff = 0.0;
      for (int c = 0; c < 3; ++c) diff = std::max(diff, std::abs(f.at(x, y, c) - mode[c]));
      if (diff <= kForegroundThreshold) continue;
      const double u = (x + 0.5) / f.width();
      const double v = (y + 0.5) / f.height();
      area += 1.0;
      mx += u;
      my += v;
      mxx += u * u;
      myy += v * v;
      mxy += u * v;
    }
  }
  if (area > 0.0) {
    mx /= area;
    my /= area;
    double* m = sig.data() + kHistogramDims;
    m[0] = kMomentScale * area / n;
    m[1] = kMomentScale * mx;
    m[2] = kMomentScale * my;
    m[3] = kMomentScale * (mxx / area - mx * mx);
    m[4] = kMomentScale * (myy / area - my * my);
    m[5] = kMomentScale * (mxy / area - mx * my);
  }

  Eigen::VectorXd pooled(kPool * kPool * 3);
  for (int by = 0; by < kPool; ++by) {
    const int y0 = by * f.height() / kPool;
    const int y1 = std::max(y0 + 1, (by + 1) * f.height() / kPool);
    for (int bx = 0; bx < kPool; ++bx) {
      const int x0 = bx * f.width() / kPool;
      const int x1 = std::max(x0 + 1, (bx + 1) * f.width() / kPool);
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int y = y0; y < std::min(y1, f.height()); ++y) {
          for (int x = x0; x < std::min(x1, f.width()); ++x) acc += f.at(x, y, c);
        }
        pooled((by * kPool + bx) * 3 + c) = acc / ((y1 - y0) * (x1 - x0));
      }
    }
  }
  const Eigen::VectorXd proj = projection_matrix() * pooled;
  for (int i = 0; i < kProjectionDims; ++i) {
    sig[kHistogramDims + kMomentDims + i] = kProjectionScale * proj(i);
  }
  return sig;
}

FeatureVector prompt_signature(std::string_view prompt, int frame_size) {
  const corpus::PromptFields fields = corpus::parse_prompt(prompt);
  corpus::SceneSpec s;
  s.shape = fields.shape;
  s.color = fields.color;
  s.background = fields.background;
  s.frame_size = frame_size;
  s.shape_size = corpus::default_shape_size(frame_size);
  s.speed = 0.0;
  FeatureVector mean(kSignatureDims, 0.0);
  int count = 0;
  for (int y = 0; y + s.shape_size <= frame_size; ++y) {
    for (int x = 0; x + s.shape_size <= frame_size; ++x) {
      s.start_x = x;
      s.start_y = y;
      const FeatureVector sig = frame_signature(corpus::render(s, 0));
      for (int i = 0; i < kSignatureDims; ++i) mean[i] += sig[i];
      ++count;
    }
  }
  for (double& v : mean) v /= count;
  return mean;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine of vectors of different lengths");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

double clipsim_proxy(const corpus::Video& video, std::string_view prompt) {
  if (video.frames.empty()) throw DomainError("clipsim of an empty video");
  const FeatureVector target = prompt_signature(prompt, video.frames.front().width());
  double acc = 0.0;
  for (const Frame& f : video.frames) acc += cosine(frame_signature(f), target);
  return acc / static_cast<double>(video.frames.size());
}

GaussianMoments estimate_moments(std::span<const FeatureVector> features) {
  if (features.size() < 2) {
    throw InsufficientSamplesError("moments need at least 2 feature vectors, got " +
                                   std::to_string(features.size()));
  }
  const auto d = static_cast<Eigen::Index>(features.front().size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()), d);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (static_cast<Eigen::Index>(features[i].size()) != d) {
      throw DimensionError("feature vectors differ in dimension");
    }
    for (Eigen::Index k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), k) = features[i][k];
  }
  if (!x.allFinite()) throw NumericalError("non-finite feature value");
  GaussianMoments m;
  m.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
  m.cov = (centered.transpose() * centered) / static_cast<double>(features.size() - 1);
  m.cov = 0.5 * (m.cov + m.cov.transpose());
  return m;
}

namespace {

// Symmetric PSD square root; eigenvalues below -clip are an error.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a, double clip, double* trace_sqrt = nullptr) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -clip) {
      throw NumericalError("matrix has a negative eigenvalue " + std::to_string(ev(i)));
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  if (trace_sqrt != nullptr) *trace_sqrt = ev.sum();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b,
                        const FrechetOptions& options) {
  const Eigen::Index d = a.mean.size();
  if (b.mean.size() != d || a.cov.rows() != d || a.cov.cols() != d || b.cov.rows() != d ||
      b.cov.cols() != d) {
    throw DimensionError("frechet_distance: moment dimensions differ");
  }
  if (!a.mean.allFinite() || !b.mean.allFinite() || !a.cov.allFinite() || !b.cov.allFinite()) {
    throw NumericalError("frechet_distance: non-finite moments");
  }
  if (a.mean == b.mean && a.cov == b.cov) return 0.0;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd sa = 0.5 * (a.cov + a.cov.transpose()) + options.epsilon * eye;
  const Eigen::MatrixXd sb = 0.5 * (b.cov + b.cov.transpose()) + options.epsilon * eye;
  const Eigen::MatrixXd root_a = psd_sqrt(sa, options.clip);
  Eigen::MatrixXd inner = root_a * sb * root_a;
  inner = 0.5 * (inner + inner.transpose());
  double tr_cross = 0.0;
  psd_sqrt(inner, options.clip, &tr_cross);
  const double d2 = (a.mean - b.mean).squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_cross;
  return std::max(d2, 0.0);
}

FeatureVector SignatureVideoExtractor::extract(std::span<const Frame> frames) const {
  if (frames.empty()) throw DomainError("video features of an empty clip");
  const std::vector<FeatureVector> sig = signatures(frames);
  const std::size_t n = sig.size();
  const int d = kSignatureDims;
  FeatureVector out(3 * d, 0.0);
  for (const auto& s : sig) {
    for (int i = 0; i < d; ++i) out[i] += s[i] / n;
  }
  for (const auto& s : sig) {
    for (int i = 0; i < d; ++i) out[d + i] += (s[i] - out[i]) * (s[i] - out[i]) / n;
  }
  for (int i = 0; i < d; ++i) out[d + i] = std::sqrt(out[d + i]);
  if (n > 1) {
    for (std::size_t t = 1; t < n; ++t) {
      for (int i = 0; i < d; ++i) out[2 * d + i] += (sig[t][i] - sig[t - 1][i]) / (n - 1);
    }
  }
  return out;
}

const VideoFeatureExtractor& default_video_extractor() {
  static const SignatureVideoExtractor e;
  return e;
}

namespace {

std::vector<FeatureVector> video_features(std::span<const corpus::Video> set, int begin, int len,
                                          const VideoFeatureExtractor& extractor) {
  std::vector<FeatureVector> out;
  out.reserve(set.size());
  for (const auto& v : set) {
    out.push_back(extractor.extract(std::span<const Frame>(v.frames).subspan(begin, len)));
  }
  return out;
}

int common_length(std::span<const corpus::Video> set, const char* name) {
  if (set.size() < 2) {
    throw InsufficientSamplesError(std::string("fvd set ") + name + " needs at least 2 videos");
  }
  const auto len = set.front().frames.size();
  for (const auto& v : set) {
    if (v.frames.size() != len) {
      throw DimensionError(std::string("fvd set ") + name + " mixes frame counts");
    }
  }
  if (len == 0) throw DomainError("fvd of empty videos");
  return static_cast<int>(len);
}

}  // namespace

double fvd(std::span<const corpus::Video> a, std::span<const corpus::Video> b,
           const VideoFeatureExtractor& extractor, const FrechetOptions& options) {
  const int la = common_length(a, "a");
  const int lb = common_length(b, "b");
  const auto fa = video_features(a, 0, la, extractor);
  const auto fb = video_features(b, 0, lb, extractor);
  return frechet_distance(estimate_moments(fa), estimate_moments(fb), options);
}

double block_fvd(std::span<const corpus::Video> a, std::span<const corpus::Video> b, int block_len,
                 const VideoFeatureExtractor& extractor, const FrechetOptions& options) {
  const int la = common_length(a, "a");
  const int lb = common_length(b, "b");
  if (block_len < 1 || block_len > std::min(la, lb)) {
    throw DomainError("block length " + std::to_string(block_len) + " exceeds the video length");
  }
  const int blocks = std::min(la, lb) / block_len;
  double acc = 0.0;
  for (int k = 0; k < blocks; ++k) {
    const auto fa = video_features(a, k * block_len, block_len, extractor);
    const auto fb = video_features(b, k * block_len, block_len, extractor);
    acc += frechet_distance(estimate_moments(fa), estimate_moments(fb), options);
  }
  return acc / blocks;
}

namespace {

struct ShapePrototype {
  double fill = 0.0;
  double asymmetry = 0.0;
};

// Fill ratio of the bounding box and (bottom - top) / total pixel balance.
ShapePrototype shape_features(const Frame& f, const ForegroundStats& s) {
  const auto mode = mode_color(f);
  const int w = s.max_x - s.min_x + 1;
  const int h = s.max_y - s.min_y + 1;
  double top = 0.0, bottom = 0.0;
  const double mid = (s.min_y + s.max_y + 1) / 2.0;
  for (int y = s.min_y; y <= s.max_y; ++y) {
    for (int x = s.min_x; x <= s.max_x; ++x) {
      double diff = 0.0;
      for (int c = 0; c < 3; ++c) diff = std::max(diff, std::abs(f.at(x, y, c) - mode[c]));
      if (diff <= kForegroundThreshold) continue;
      (y + 0.5 < mid ? top : bottom) += 1.0;
    }
  }
  return {s.pixels / static_cast<double>(w * h), (bottom - top) / s.pixels};
}

ShapePrototype prototype(corpus::Shape shape, int size) {
  corpus::SceneSpec s;
  s.shape = shape;
  s.color = corpus::Color::kWhite;
  s.background = corpus::Background::kBlack;
  s.frame_size = 2 * size + 2;
  s.shape_size = size;
  s.start_x = 1;
  s.start_y = 1;
  s.speed = 0.0;
  const Frame f = corpus::render(s, 0);
  return shape_features(f, foreground(f));
}

}  // namespace

std::vector<double> GrammarClassifier::probabilities(const Frame& frame) const {
  const int nc = classes();
  const ForegroundStats s = foreground(frame);
  if (s.pixels == 0) return std::vector<double>(nc, 1.0 / nc);
  const ShapePrototype seen = shape_features(frame, s);
  const int size = std::max(s.max_x - s.min_x + 1, s.max_y - s.min_y + 1);
  std::array<double, corpus::kShapeCount> shape_logit{};
  for (int k = 0; k < corpus::kShapeCount; ++k) {
    const ShapePrototype p = prototype(static_cast<corpus::Shape>(k), size);
    const double df = seen.fill - p.fill;
    const double da = seen.asymmetry - p.asymmetry;
    shape_logit[k] = -(df * df + da * da) / (2.0 * 0.08 * 0.08);
  }
  std::array<double, corpus::kColorCount> color_logit{};
  for (int k = 0; k < corpus::kColorCount; ++k) {
    const auto ref = corpus::rgb(static_cast<corpus::Color>(k));
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double diff = s.mean_color[c] - corpus::normalize_u8(ref[c]);
      d2 += diff * diff;
    }
    color_logit[k] = -d2 / (2.0 * 0.2 * 0.2);
  }
  std::vector<double> p(nc);
  double mx = -1e300;
  for (int sh = 0; sh < corpus::kShapeCount; ++sh) {
    for (int co = 0; co < corpus::kColorCount; ++co) {
      mx = std::max(mx, shape_logit[sh] + color_logit[co]);
    }
  }
  double z = 0.0;
  for (int sh = 0; sh < corpus::kShapeCount; ++sh) {
    for (int co = 0; co < corpus::kColorCount; ++co) {
      const double v = std::exp(shape_logit[sh] + color_logit[co] - mx);
      p[sh * corpus::kColorCount + co] = v;
      z += v;
    }
  }
  for (double& v : p) v /= z;
  return p;
}

double inception_score(std::span<const std::vector<double>> probabilities) {
  if (probabilities.empty()) throw InsufficientSamplesError("inception score of no samples");
  const std::size_t c = probabilities.front().size();
  std::vector<double> marginal(c, 0.0);
  for (const auto& row : probabilities) {
    if (row.size() != c) throw DimensionError("classifier rows differ in class count");
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || v > 1.0) throw ContractError("classifier output is not a probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ContractError("classifier output does not sum to 1");
    for (std::size_t k = 0; k < c; ++k) marginal[k] += row[k];
  }
  for (double& v : marginal) v /= static_cast<double>(probabilities.size());
  double kl = 0.0;
  for (const auto& row : probabilities) {
    for (std::size_t k = 0; k < c; ++k) {
      if (row[k] > 0.0) kl += row[k] * (std::log(row[k]) - std::log(marginal[k]));
    }
  }
  return std::exp(kl / static_cast<double>(probabilities.size()));
}

double inception_score(std::span<const Frame> frames, const Classifier& classifier) {
  std::vector<std::vector<double>> rows;
  rows.reserve(frames.size());
  for (const Frame& f : frames) rows.push_back(classifier.probabilities(f));
  return inception_score(rows);
}

double inception_score(std::span<const corpus::Video> videos, const Classifier& classifier) {
  std::vector<std::vector<double>> rows;
  for (const auto& v : videos) {
    if (v.frames.empty()) throw DomainError("inception score of an empty video");
    std::vector<double> mean(classifier.classes(), 0.0);
    for (const Frame& f : v.frames) {
      const auto p = classifier.probabilities(f);
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k] / v.frames.size();
    }
    rows.push_back(std::move(mean));
  }
  return inception_score(rows);
}

}  // namespace gridvid::metrics
