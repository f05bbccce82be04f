// Copyright 2026 The cenet Authors. All Rights Reserved.
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


#include "cenet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace cenet {

namespace {

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionError("mask sizes differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

template <typename S>
double auc_impl(std::span<const S> scores, std::span<const std::uint8_t> gt) {
  check_same_size(scores.size(), gt.size());
  std::vector<std::size_t> order;
  order.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kIgnoreLabel) continue;
    if (!std::isfinite(double(scores[i]))) throw NumericError("non-finite score at pixel " + std::to_string(i));
    order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based, tie-averaged) ranks of the positives.
  double rank_sum = 0.0;
  std::uint64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * double(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (gt[order[t]]) {
        rank_sum += avg_rank;
        ++pos;
      } else {
        ++neg;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) {
    throw ContractError("AUC needs both positive and negative pixels (got " + std::to_string(pos) + " positive, " +
                        std::to_string(neg) + " negative)");
  }
  const double p = double(pos), n = double(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

}  // namespace

ConfusionCounts confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  check_same_size(pred.size(), gt.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kIgnoreLabel) continue;
    const bool p = pred[i] != 0, g = gt[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double overlap_error(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  const ConfusionCounts c = confusion(pred, gt);
  const std::uint64_t uni = c.tp + c.fp + c.fn;
  return uni == 0 ? 0.0 : 1.0 - double(c.tp) / double(uni);
}

double dice_coefficient(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  const ConfusionCounts c = confusion(pred, gt);
  const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : 2.0 * double(c.tp) / double(denom);
}

SenAcc sen_acc(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  const ConfusionCounts c = confusion(pred, gt);
  SenAcc r;
  r.sensitivity = c.tp + c.fn == 0 ? 1.0 : double(c.tp) / double(c.tp + c.fn);
  r.accuracy = c.total() == 0 ? 1.0 : double(c.tp + c.tn) / double(c.total());
  return r;
}

double auc(std::span<const float> scores, std::span<const std::uint8_t> gt) { return auc_impl(scores, gt); }
double auc(std::span<const double> scores, std::span<const std::uint8_t> gt) { return auc_impl(scores, gt); }

Boundaries extract_boundaries(const LabelMap& labels, std::size_t count) {
  if (count == 0) throw ContractError("boundary count must be >= 1");
  const std::size_t h = labels.height, w = labels.width;
  Boundaries out{std::vector<std::vector<double>>(count, std::vector<double>(w, double(h))),
                 std::vector<std::vector<std::size_t>>(count)};
  std::vector<bool> found(count);
  for (std::size_t c = 0; c < w; ++c) {
    std::fill(found.begin(), found.end(), false);
    std::size_t running = 0;
    for (std::size_t r = 0; r < h; ++r) {
      const std::uint8_t label = labels.at(r, c);
      if (label != kIgnoreLabel) running = std::max<std::size_t>(running, label);
      for (std::size_t b = 0; b < count && b < running; ++b) {
        if (!found[b]) {
          found[b] = true;
          out.rows[b][c] = double(r);
        }
      }
    }
    for (std::size_t b = 0; b < count; ++b) {
      if (!found[b]) out.missing[b].push_back(c);
    }
  }
  return out;
}

BoundaryReport boundary_mae(const LabelMap& pred, const std::vector<std::vector<double>>& gt_rows) {
  if (gt_rows.empty()) throw ContractError("boundary_mae needs at least one reference boundary");
  for (const auto& row : gt_rows) {
    if (row.size() != pred.width) {
      throw DimensionError("reference boundary has " + std::to_string(row.size()) + " columns, prediction has " +
                           std::to_string(pred.width));
    }
  }
  const Boundaries found = extract_boundaries(pred, gt_rows.size());
  BoundaryReport rep{std::vector<double>(gt_rows.size(), 0.0), found.missing};
  for (std::size_t b = 0; b < gt_rows.size(); ++b) {
    double sum = 0.0;
    for (std::size_t c = 0; c < pred.width; ++c) sum += std::abs(found.rows[b][c] - gt_rows[b][c]);
    rep.mae[b] = pred.width ? sum / double(pred.width) : 0.0;
  }
  return rep;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / double(values.size() - 1));
  return r;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << "image_id,metric_name,value\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.value);
    os << r.image_id << ',' << r.metric << ',' << buf << '\n';
  }
}

}  // namespace cenet
