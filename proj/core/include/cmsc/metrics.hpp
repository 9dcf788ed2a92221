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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmsc/image.hpp"

namespace cmsc::eval {

/// Numerators and denominators of boundary precision and recall.
struct MatchResult {
  std::int64_t matched_pred = 0;
  std::int64_t total_pred = 0;
  std::int64_t matched_gt = 0;
  std::int64_t total_gt = 0;

  MatchResult& operator+=(const MatchResult& o) {
    matched_pred += o.matched_pred;
    total_pred += o.total_pred;
    matched_gt += o.matched_gt;
    total_gt += o.total_gt;
    return *this;
  }
  bool operator==(const MatchResult&) const = default;
};

struct BprScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  MatchResult counts;
};

/// P = matched_pred / total_pred (1 if nothing predicted), R likewise for
/// the ground truth, F = 2PR / (P + R) (0 if P + R = 0).
BprScore score_from_counts(const MatchResult& counts);

/// Proximity matching: a predicted pixel is correct when some ground-truth
/// pixel lies within Chebyshev distance `tol`, and a ground-truth pixel is
/// recalled when some predicted pixel does. With a mask, pixels where the
/// mask is zero are removed from both images before matching.
/// Inputs must be binary (every value 0 or 1).
MatchResult match_boundaries(const BoundaryImage& pred, const BoundaryImage& gt, int tol = 1,
                             const BoundaryImage* mask = nullptr);

BprScore bpr(const BoundaryImage& pred, const BoundaryImage& gt, int tol = 1,
             const BoundaryImage* mask = nullptr);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;
  double auc = 0.0;
  double best_f = 0.0;
  double best_threshold = 0.0;
};

/// 255 evenly spaced thresholds k/256, k = 1..255.
std::vector<double> default_thresholds();

/// Accumulates thresholded match counts over many frames in one pass per
/// frame; curve() then scores the pooled counts (dataset-level P/R).
class PrAccumulator {
 public:
  explicit PrAccumulator(std::vector<double> thresholds = default_thresholds(), int tol = 1);

  /// `confidences` in [0,1]; predicted at threshold t when value >= t.
  void add(const BoundaryImage& confidences, const BoundaryImage& gt_binary,
           const BoundaryImage* mask = nullptr);

  const std::vector<double>& thresholds() const { return thresholds_; }
  std::vector<MatchResult> counts() const;
  PrCurve curve() const;
  std::size_t frames() const { return frames_; }

 private:
  std::vector<double> thresholds_;
  int tol_;
  std::size_t frames_ = 0;
  std::int64_t total_gt_ = 0;
  // Histograms indexed by the number of thresholds a value clears.
  std::vector<std::int64_t> pred_hist_;
  std::vector<std::int64_t> matched_pred_hist_;
  std::vector<std::int64_t> matched_gt_hist_;
};

PrCurve pr_curve(const BoundaryImage& confidences, const BoundaryImage& gt_binary,
                 const std::vector<double>& thresholds, int tol = 1,
                 const BoundaryImage* mask = nullptr);

/// AUC by the trapezoid rule over (recall, precision) sorted by recall.
double curve_auc(std::vector<PrPoint> points);

double mse_metric(const BoundaryImage& pred, const BoundaryImage& gt);

/// Mean |response| of the 3x3 Laplacian (centre -4, 4-neighbours 1) over
/// interior pixels.
double laplacian_sharpness(const BoundaryImage& image);

/// Mean absolute error binned by Chebyshev distance to the patch border.
struct ErrorProfile {
  std::vector<double> mean_abs_error;
  std::vector<std::int64_t> pixel_counts;
};

ErrorProfile error_vs_border_distance(std::span<const BoundaryImage> preds,
                                      std::span<const BoundaryImage> gts, int patch);

/// Ones everywhere except the outer `rings` pixel rings.
BoundaryImage interior_mask(int height, int width, int rings);

/// `value >= threshold` as 0/1.
BoundaryImage binarize(const BoundaryImage& image, double threshold);

struct MetricRow {
  int step = 0;
  std::string metric;
  double value = 0.0;
};

std::string format_table(std::span<const MetricRow> rows);
/// Header "step,metric,value".
std::string format_csv(std::span<const MetricRow> rows);

}  // namespace cmsc::eval
