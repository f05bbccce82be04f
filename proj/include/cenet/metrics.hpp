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


#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cenet/labels.hpp"

namespace cenet {

// Binary-mask metrics. Masks are flat byte arrays where nonzero means
// foreground; ground-truth entries equal to kIgnoreLabel are skipped.

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

/// 1 - |S n G| / |S u G|; 0 when both masks are empty.
double overlap_error(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

/// 2|S n G| / (|S| + |G|); 1 when both masks are empty.
double dice_coefficient(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

struct SenAcc {
  double sensitivity = 0.0;
  double accuracy = 0.0;
};

/// Sensitivity is 1 when the ground truth has no positives.
SenAcc sen_acc(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

/// Probability that a random positive outscores a random negative, ties
/// counted half. Rank-based, O(n log n). Throws ContractError unless both
/// classes are present.
double auc(std::span<const float> scores, std::span<const std::uint8_t> gt);
double auc(std::span<const double> scores, std::span<const std::uint8_t> gt);

/// Layer boundaries of a top-to-bottom layered label map (classes 0..B).
/// Boundary b at column c is the first row whose label exceeds b after a
/// running max down the column; absent boundaries sit at the image bottom.
struct Boundaries {
  std::vector<std::vector<double>> rows;           // [B][W]
  std::vector<std::vector<std::size_t>> missing;   // columns per boundary
};

Boundaries extract_boundaries(const LabelMap& labels, std::size_t count);

struct BoundaryReport {
  std::vector<double> mae;                        // pixels, per boundary
  std::vector<std::vector<std::size_t>> missing;  // flagged columns
};

/// Mean absolute row error per boundary against reference positions [B][W].
BoundaryReport boundary_mae(const LabelMap& pred, const std::vector<std::vector<double>>& gt_rows);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two values
};

MeanStd mean_std(std::span<const double> values);

struct MetricRow {
  std::string image_id;
  std::string metric;
  double value = 0.0;
};

/// CSV with header image_id,metric_name,value and six-decimal values.
void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows);

}  // namespace cenet
