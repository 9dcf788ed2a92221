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

#include <cmath>
#include <cstdlib>
#include <vector>

#include "cmsc/billiard.hpp"
#include "cmsc/metrics.hpp"
#include "cmsc/rng.hpp"
#include "doctest.h"

using namespace cmsc;
using namespace cmsc::eval;

namespace {

BoundaryImage random_binary(int h, int w, double p, SeededRng& rng) {
  BoundaryImage img(h, w);
  for (float& v : img.pixels()) v = rng.uniform01() < p ? 1.0f : 0.0f;
  return img;
}

// All-pairs matcher: O(|pred| * |gt|).
MatchResult brute_force(const BoundaryImage& pred, const BoundaryImage& gt, int tol,
                        const BoundaryImage* mask) {
  std::vector<std::pair<int, int>> p, g;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (mask && mask->at(y, x) == 0.0f) continue;
      if (pred.at(y, x) != 0.0f) p.push_back({y, x});
      if (gt.at(y, x) != 0.0f) g.push_back({y, x});
    }
  auto near = [tol](std::pair<int, int> a, std::pair<int, int> b) {
    return std::abs(a.first - b.first) <= tol && std::abs(a.second - b.second) <= tol;
  };
  MatchResult m;
  m.total_pred = static_cast<std::int64_t>(p.size());
  m.total_gt = static_cast<std::int64_t>(g.size());
  for (auto a : p) {
    for (auto b : g) {
      if (near(a, b)) {
        ++m.matched_pred;
        break;
      }
    }
  }
  for (auto b : g) {
    for (auto a : p) {
      if (near(a, b)) {
        ++m.matched_gt;
        break;
      }
    }
  }
  return m;
}

}  // namespace

TEST_CASE("bpr basics") {
  BoundaryImage gt(9, 9);
  gt.at(4, 2) = gt.at(4, 3) = gt.at(4, 4) = 1.0f;
  const BprScore self = bpr(gt, gt);
  CHECK(self.precision == 1.0);
  CHECK(self.recall == 1.0);
  CHECK(self.f == 1.0);

  BoundaryImage shifted(9, 9);
  shifted.at(5, 3) = shifted.at(5, 4) = shifted.at(5, 5) = 1.0f;
  CHECK(bpr(shifted, gt, 1).f == 1.0);

  BoundaryImage one(9, 9), two(9, 9);
  one.at(4, 4) = 1.0f;
  two.at(4, 6) = 1.0f;
  CHECK(bpr(two, one, 1).f == 0.0);
  CHECK(bpr(two, one, 2).f == 1.0);

  const BoundaryImage empty(9, 9);
  const BprScore none = bpr(empty, gt);
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f == 0.0);
  const BprScore both_empty = bpr(empty, empty);
  CHECK(both_empty.f == 1.0);

  BoundaryImage grey(9, 9);
  grey.at(0, 0) = 0.5f;
  CHECK_THROWS_AS(bpr(grey, gt), ShapeError);
  CHECK_THROWS_AS(bpr(BoundaryImage(3, 3), gt), ShapeError);
}

TEST_CASE("bpr equals the brute-force matcher") {
  SeededRng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform(0.02, 0.4);
    const BoundaryImage pred = random_binary(12, 12, p, rng);
    const BoundaryImage gt = random_binary(12, 12, p, rng);
    const BoundaryImage mask = random_binary(12, 12, 0.8, rng);
    for (int tol : {0, 1, 2}) {
      CHECK(match_boundaries(pred, gt, tol) == brute_force(pred, gt, tol, nullptr));
      CHECK(match_boundaries(pred, gt, tol, &mask) == brute_force(pred, gt, tol, &mask));
    }
  }
}

TEST_CASE("bpr properties: tolerance monotone, all-ones mask is identity") {
  SeededRng rng(7);
  const BoundaryImage ones(16, 16, 1.0f);
  for (int i = 0; i < 100; ++i) {
    const BoundaryImage pred = random_binary(16, 16, 0.1, rng);
    const BoundaryImage gt = random_binary(16, 16, 0.1, rng);
    BprScore prev = bpr(pred, gt, 0);
    for (int tol = 1; tol <= 4; ++tol) {
      const BprScore cur = bpr(pred, gt, tol);
      CHECK(cur.precision >= prev.precision);
      CHECK(cur.recall >= prev.recall);
      prev = cur;
    }
    CHECK(match_boundaries(pred, gt, 1, &ones) == match_boundaries(pred, gt, 1));
  }
}

TEST_CASE("pr_curve on a hand-enumerated three-pixel image") {
  BoundaryImage conf(1, 9), gt(1, 9);
  conf.at(0, 0) = 0.2f;
  conf.at(0, 4) = 0.6f;
  conf.at(0, 8) = 0.9f;
  gt.at(0, 4) = gt.at(0, 8) = 1.0f;
  const PrCurve c = pr_curve(conf, gt, {0.1, 0.5, 0.7, 0.95});
  REQUIRE(c.points.size() == 4);
  // t=0.1: 3 predicted, 2 correct.  t=0.5: both gt pixels.  t=0.7: one.
  // t=0.95: nothing predicted (P := 1, R = 0).
  CHECK(c.points[0].precision == doctest::Approx(2.0 / 3));
  CHECK(c.points[0].recall == 1.0);
  CHECK(c.points[0].f == doctest::Approx(0.8));
  CHECK(c.points[1].f == 1.0);
  CHECK(c.points[2].precision == 1.0);
  CHECK(c.points[2].recall == 0.5);
  CHECK(c.points[2].f == doctest::Approx(2.0 / 3));
  CHECK(c.points[3].precision == 1.0);
  CHECK(c.points[3].recall == 0.0);
  CHECK(c.points[3].f == 0.0);
  CHECK(c.best_f == 1.0);
  CHECK(c.best_threshold == 0.5);
  // Sorted by recall (ties keep threshold order): (0,1) (.5,1) (1,2/3) (1,1).
  CHECK(c.auc == doctest::Approx(0.5 + 0.5 * (1.0 + 2.0 / 3) / 2));
}

TEST_CASE("pr_curve extremes") {
  SeededRng rng(3);
  const BoundaryImage gt = random_binary(20, 20, 0.1, rng);
  const auto th = default_thresholds();
  CHECK(th.size() == 255);
  CHECK(th.front() == doctest::Approx(1.0 / 256));
  const PrCurve perfect = pr_curve(gt, gt, th);
  for (const auto& p : perfect.points) CHECK(p.f == 1.0);
  const PrCurve zero = pr_curve(BoundaryImage(20, 20), gt, th);
  for (const auto& p : zero.points) CHECK(p.recall == 0.0);
  CHECK(zero.auc == 0.0);
}

TEST_CASE("PrAccumulator pools counts across frames") {
  SeededRng rng(11);
  const std::vector<double> th = {0.25, 0.5, 0.75};
  PrAccumulator acc(th, 1);
  std::vector<MatchResult> want(th.size());
  for (int f = 0; f < 10; ++f) {
    BoundaryImage conf(10, 10);
    for (float& v : conf.pixels()) v = static_cast<float>(rng.uniform01() < 0.2 ? rng.uniform01() : 0.0);
    const BoundaryImage gt = random_binary(10, 10, 0.15, rng);
    const BoundaryImage mask = random_binary(10, 10, 0.9, rng);
    acc.add(conf, gt, &mask);
    for (std::size_t i = 0; i < th.size(); ++i) want[i] += match_boundaries(binarize(conf, th[i]), gt, 1, &mask);
  }
  CHECK(acc.counts() == want);
  CHECK(acc.frames() == 10);
  const PrCurve c = acc.curve();
  for (std::size_t i = 0; i < th.size(); ++i) {
    CHECK(c.points[i].f == doctest::Approx(score_from_counts(want[i]).f));
  }
}

TEST_CASE("mse and laplacian sharpness") {
  BoundaryImage a(2, 2), b(2, 2, 1.0f);
  CHECK(mse_metric(a, b) == 1.0);
  CHECK(mse_metric(a, a) == 0.0);

  CHECK(laplacian_sharpness(BoundaryImage(6, 6, 0.3f)) == 0.0);
  BoundaryImage dot(5, 5);
  dot.at(2, 2) = 1.0f;
  // Direct convolution over the 3x3 interior: centre |-4|, four neighbours |1|.
  double sum = 0.0;
  for (int y = 1; y < 4; ++y)
    for (int x = 1; x < 4; ++x)
      sum += std::abs(dot.at(y - 1, x) + dot.at(y + 1, x) + dot.at(y, x - 1) + dot.at(y, x + 1) -
                      4 * dot.at(y, x));
  CHECK(sum == 8.0);
  CHECK(laplacian_sharpness(dot) == doctest::Approx(sum / 9));

  // A 2x2 box blur does not sharpen rasterised ring images.
  SeededRng rng(8);
  for (int i = 0; i < 50; ++i) {
    const sim::World w = sim::sample_world(sim::SimConfig::desk(), rng);
    const BoundaryImage img = sim::rasterize(w);
    BoundaryImage blur(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const int y1 = std::min(y + 1, img.height() - 1), x1 = std::min(x + 1, img.width() - 1);
        blur.at(y, x) = (img.at(y, x) + img.at(y1, x) + img.at(y, x1) + img.at(y1, x1)) / 4;
      }
    CHECK(laplacian_sharpness(blur) <= laplacian_sharpness(img));
  }
}

TEST_CASE("error_vs_border_distance") {
  const int patch = 6;
  std::vector<BoundaryImage> gts(3, BoundaryImage(patch, patch));
  auto same = error_vs_border_distance(gts, gts, patch);
  CHECK(same.mean_abs_error.size() == 3);
  for (double e : same.mean_abs_error) CHECK(e == 0.0);

  std::vector<BoundaryImage> ring = gts;
  for (auto& r : ring) {
    for (int i = 0; i < patch; ++i) r.at(0, i) = r.at(patch - 1, i) = r.at(i, 0) = r.at(i, patch - 1) = 1.0f;
  }
  const auto rp = error_vs_border_distance(ring, gts, patch);
  CHECK(rp.mean_abs_error[0] == 1.0);
  CHECK(rp.mean_abs_error[1] == 0.0);
  CHECK(rp.mean_abs_error[2] == 0.0);

  // Loop-binning oracle on random data, odd patch side.
  SeededRng rng(4);
  const int p = 7;
  std::vector<BoundaryImage> preds, targets;
  for (int i = 0; i < 5; ++i) {
    BoundaryImage a(p, p), b(p, p);
    for (float& v : a.pixels()) v = static_cast<float>(rng.uniform01());
    for (float& v : b.pixels()) v = static_cast<float>(rng.uniform01());
    preds.push_back(a);
    targets.push_back(b);
  }
  std::vector<double> sums(4, 0.0);
  std::vector<std::int64_t> counts(4, 0);
  for (int i = 0; i < 5; ++i)
    for (int y = 0; y < p; ++y)
      for (int x = 0; x < p; ++x) {
        int d = y;
        d = std::min(d, x);
        d = std::min(d, p - 1 - y);
        d = std::min(d, p - 1 - x);
        sums[static_cast<std::size_t>(d)] += std::abs(static_cast<double>(preds[static_cast<std::size_t>(i)].at(y, x)) -
                                                      targets[static_cast<std::size_t>(i)].at(y, x));
        ++counts[static_cast<std::size_t>(d)];
      }
  const auto prof = error_vs_border_distance(preds, targets, p);
  CHECK(prof.pixel_counts == counts);
  for (std::size_t b = 0; b < 4; ++b) CHECK(prof.mean_abs_error[b] == doctest::Approx(sums[b] / counts[b]));
}

TEST_CASE("metric tables") {
  const std::vector<MetricRow> rows = {{1, "best_f", 0.5}, {2, "best_f", 0.25}};
  const std::string csv = format_csv(rows);
  CHECK(csv.rfind("step,metric,value\n", 0) == 0);
  CHECK(csv.find("2,best_f,0.25") != std::string::npos);
  CHECK_FALSE(format_table(rows).empty());
}
