// Copyright 2026 The CMSC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cmsc::eval {

namespace {

void require_same(const BoundaryImage& a, const BoundaryImage& b, const char* what) {
  if (!a.same_size(b)) {
    throw ShapeError(std::string(what) + ": size mismatch " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

void require_binary(const BoundaryImage& img, const char* what) {
  for (float v : img.pixels()) {
    if (v != 0.0f && v != 1.0f) {
      throw ShapeError(std::string(what) + ": expected a binary image");
    }
  }
}

bool in_mask(const BoundaryImage* mask, int y, int x) {
  return mask == nullptr || mask->at(y, x) != 0.0f;
}

// Any nonzero, in-mask pixel within Chebyshev distance tol of (y, x)?
bool near_any(const BoundaryImage& img, const BoundaryImage* mask, int y, int x, int tol) {
  const int y0 = std::max(0, y - tol), y1 = std::min(img.height() - 1, y + tol);
  const int x0 = std::max(0, x - tol), x1 = std::min(img.width() - 1, x + tol);
  for (int yy = y0; yy <= y1; ++yy) {
    for (int xx = x0; xx <= x1; ++xx) {
      if (img.at(yy, xx) != 0.0f && in_mask(mask, yy, xx)) return true;
    }
  }
  return false;
}

float window_max(const BoundaryImage& img, const BoundaryImage* mask, int y, int x, int tol) {
  const int y0 = std::max(0, y - tol), y1 = std::min(img.height() - 1, y + tol);
  const int x0 = std::max(0, x - tol), x1 = std::min(img.width() - 1, x + tol);
  float m = -1.0f;
  for (int yy = y0; yy <= y1; ++yy) {
    for (int xx = x0; xx <= x1; ++xx) {
      if (in_mask(mask, yy, xx)) m = std::max(m, img.at(yy, xx));
    }
  }
  return m;
}

}  // namespace

BprScore score_from_counts(const MatchResult& c) {
  BprScore s;
  s.counts = c;
  s.precision = c.total_pred == 0 ? 1.0 : static_cast<double>(c.matched_pred) / c.total_pred;
  s.recall = c.total_gt == 0 ? 1.0 : static_cast<double>(c.matched_gt) / c.total_gt;
  const double denom = s.precision + s.recall;
  s.f = denom == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / denom;
  return s;
}

MatchResult match_boundaries(const BoundaryImage& pred, const BoundaryImage& gt, int tol,
                             const BoundaryImage* mask) {
  require_same(pred, gt, "bpr");
  if (mask) require_same(pred, *mask, "bpr mask");
  require_binary(pred, "bpr prediction");
  require_binary(gt, "bpr ground truth");
  if (tol < 0) throw ConfigError("bpr: tolerance must be >= 0");
  MatchResult r;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!in_mask(mask, y, x)) continue;
      if (pred.at(y, x) != 0.0f) {
        ++r.total_pred;
        r.matched_pred += near_any(gt, mask, y, x, tol);
      }
      if (gt.at(y, x) != 0.0f) {
        ++r.total_gt;
        r.matched_gt += near_any(pred, mask, y, x, tol);
      }
    }
  }
  return r;
}

BprScore bpr(const BoundaryImage& pred, const BoundaryImage& gt, int tol,
             const BoundaryImage* mask) {
  return score_from_counts(match_boundaries(pred, gt, tol, mask));
}

std::vector<double> default_thresholds() {
  std::vector<double> t(255);
  for (int k = 1; k <= 255; ++k) t[static_cast<std::size_t>(k - 1)] = k / 256.0;
  return t;
}

PrAccumulator::PrAccumulator(std::vector<double> thresholds, int tol)
    : thresholds_(std::move(thresholds)), tol_(tol) {
  if (thresholds_.empty()) throw ConfigError("pr_curve: no thresholds");
  for (std::size_t i = 1; i < thresholds_.size(); ++i) {
    if (!(thresholds_[i] > thresholds_[i - 1])) {
      throw ConfigError("pr_curve: thresholds must be strictly increasing");
    }
  }
  if (tol_ < 0) throw ConfigError("pr_curve: tolerance must be >= 0");
  const std::size_t bins = thresholds_.size() + 1;
  pred_hist_.assign(bins, 0);
  matched_pred_hist_.assign(bins, 0);
  matched_gt_hist_.assign(bins, 0);
}

void PrAccumulator::add(const BoundaryImage& conf, const BoundaryImage& gt,
                        const BoundaryImage* mask) {
  require_same(conf, gt, "pr_curve");
  if (mask) require_same(conf, *mask, "pr_curve mask");
  require_binary(gt, "pr_curve ground truth");
  auto cleared = [&](double v) {
    return static_cast<std::size_t>(
        std::upper_bound(thresholds_.begin(), thresholds_.end(), v) - thresholds_.begin());
  };
  for (int y = 0; y < conf.height(); ++y) {
    for (int x = 0; x < conf.width(); ++x) {
      if (!in_mask(mask, y, x)) continue;
      const float c = conf.at(y, x);
      if (!(c >= 0.0f && c <= 1.0f)) throw NumericalError("pr_curve: confidence outside [0,1]");
      const std::size_t k = cleared(c);
      ++pred_hist_[k];
      if (near_any(gt, mask, y, x, tol_)) ++matched_pred_hist_[k];
      if (gt.at(y, x) != 0.0f) {
        ++total_gt_;
        const float m = window_max(conf, mask, y, x, tol_);
        ++matched_gt_hist_[m < 0.0f ? 0 : cleared(m)];
      }
    }
  }
  ++frames_;
}

std::vector<MatchResult> PrAccumulator::counts() const {
  const std::size_t n = thresholds_.size();
  std::vector<MatchResult> out(n);
  // A value that clears k thresholds is predicted at threshold indices < k.
  std::int64_t tp = 0, mp = 0, mg = 0;
  for (std::size_t i = n; i-- > 0;) {
    tp += pred_hist_[i + 1];
    mp += matched_pred_hist_[i + 1];
    mg += matched_gt_hist_[i + 1];
    out[i] = MatchResult{mp, tp, mg, total_gt_};
  }
  return out;
}

double curve_auc(std::vector<PrPoint> points) {
  std::stable_sort(points.begin(), points.end(),
                   [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  double auc = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    auc += (points[i].recall - points[i - 1].recall) *
           (points[i].precision + points[i - 1].precision) * 0.5;
  }
  return auc;
}

PrCurve PrAccumulator::curve() const {
  PrCurve c;
  const auto counts = this->counts();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const BprScore s = score_from_counts(counts[i]);
    c.points.push_back(PrPoint{thresholds_[i], s.precision, s.recall, s.f});
    if (i == 0 || s.f > c.best_f) {
      c.best_f = s.f;
      c.best_threshold = thresholds_[i];
    }
  }
  c.auc = curve_auc(c.points);
  return c;
}

PrCurve pr_curve(const BoundaryImage& confidences, const BoundaryImage& gt_binary,
                 const std::vector<double>& thresholds, int tol, const BoundaryImage* mask) {
  PrAccumulator acc(thresholds, tol);
  acc.add(confidences, gt_binary, mask);
  return acc.curve();
}

double mse_metric(const BoundaryImage& pred, const BoundaryImage& gt) {
  require_same(pred, gt, "mse");
  double acc = 0.0;
  auto a = pred.pixels();
  auto b = gt.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return a.empty() ? 0.0 : acc / static_cast<double>(a.size());
}

double laplacian_sharpness(const BoundaryImage& img) {
  if (img.height() < 3 || img.width() < 3) {
    throw ShapeError("laplacian_sharpness: image must be at least 3x3");
  }
  double acc = 0.0;
  for (int y = 1; y + 1 < img.height(); ++y) {
    for (int x = 1; x + 1 < img.width(); ++x) {
      const double l = static_cast<double>(img.at(y - 1, x)) + img.at(y + 1, x) +
                       img.at(y, x - 1) + img.at(y, x + 1) - 4.0 * img.at(y, x);
      acc += std::abs(l);
    }
  }
  return acc / (static_cast<double>(img.height() - 2) * (img.width() - 2));
}

ErrorProfile error_vs_border_distance(std::span<const BoundaryImage> preds,
                                      std::span<const BoundaryImage> gts, int patch) {
  if (preds.size() != gts.size()) throw ShapeError("error profile: prediction/target count mismatch");
  if (patch < 1) throw ConfigError("error profile: patch must be >= 1");
  const std::size_t bins = static_cast<std::size_t>((patch + 1) / 2);
  ErrorProfile prof;
  std::vector<double> sums(bins, 0.0);
  prof.pixel_counts.assign(bins, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require_same(preds[i], gts[i], "error profile");
    if (preds[i].height() != patch || preds[i].width() != patch) {
      throw ShapeError("error profile: expected " + std::to_string(patch) + "x" +
                       std::to_string(patch) + " patches");
    }
    for (int y = 0; y < patch; ++y) {
      for (int x = 0; x < patch; ++x) {
        const auto d = static_cast<std::size_t>(std::min({y, x, patch - 1 - y, patch - 1 - x}));
        sums[d] += std::abs(static_cast<double>(preds[i].at(y, x)) - gts[i].at(y, x));
        ++prof.pixel_counts[d];
      }
    }
  }
  prof.mean_abs_error.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    prof.mean_abs_error[b] = prof.pixel_counts[b] ? sums[b] / prof.pixel_counts[b] : 0.0;
  }
  return prof;
}

BoundaryImage interior_mask(int height, int width, int rings) {
  BoundaryImage m(height, width, 0.0f);
  for (int y = rings; y < height - rings; ++y) {
    for (int x = rings; x < width - rings; ++x) m.at(y, x) = 1.0f;
  }
  return m;
}

BoundaryImage binarize(const BoundaryImage& image, double threshold) {
  BoundaryImage out(image.height(), image.width());
  auto src = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1.0f : 0.0f;
  return out;
}

std::string format_table(std::span<const MetricRow> rows) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%6s  %-14s  %12s\n", "step", "metric", "value");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%6d  %-14s  %12.6f\n", r.step, r.metric.c_str(), r.value);
    os << buf;
  }
  return os.str();
}

std::string format_csv(std::span<const MetricRow> rows) {
  std::ostringstream os;
  os << "step,metric,value\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9g", r.value);
    os << r.step << ',' << r.metric << ',' << buf << '\n';
  }
  return os.str();
}

}  // namespace cmsc::eval
