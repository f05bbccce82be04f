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
#include <span>
#include <vector>

#include "cenet/error.hpp"
#include "cenet/tensor.hpp"

namespace cenet {

/// Mask value excluded from losses and metrics.
inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Dense per-pixel class indices, row-major [H,W].
struct LabelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;
  LabelMap(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), labels(h * w, fill) {}

  std::uint8_t& at(std::size_t r, std::size_t c) { return labels[r * width + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return labels[r * width + c]; }
  std::size_t size() const noexcept { return labels.size(); }
  bool operator==(const LabelMap&) const = default;
};

/// One-hot targets [N,K,H,W] and a validity mask [N,1,H,W] (0 at ignored
/// pixels). With K == 1 the task is binary and labels must be 0 or 1.
template <typename T>
struct Targets {
  Tensor<T> onehot;
  Tensor<T> valid;
};

template <typename T>
Targets<T> encode_targets(std::span<const LabelMap> masks, std::size_t num_classes) {
  if (masks.empty()) throw ContractError("encode_targets needs at least one mask");
  const std::size_t h = masks[0].height, w = masks[0].width, hw = h * w;
  const std::size_t k = num_classes;
  if (k == 0) throw ContractError("num_classes must be >= 1");
  Targets<T> t{Tensor<T>({masks.size(), k, h, w}), Tensor<T>({masks.size(), 1, h, w})};
  for (std::size_t n = 0; n < masks.size(); ++n) {
    const LabelMap& m = masks[n];
    if (m.height != h || m.width != w) {
      throw DimensionError("mask batch mixes sizes " + std::to_string(h) + "x" + std::to_string(w) + " and " +
                           std::to_string(m.height) + "x" + std::to_string(m.width));
    }
    for (std::size_t i = 0; i < hw; ++i) {
      const std::uint8_t label = m.labels[i];
      if (label == kIgnoreLabel) continue;
      t.valid[n * hw + i] = T(1);
      const std::size_t limit = k == 1 ? 2 : k;
      if (label >= limit) {
        throw DataError("mask label " + std::to_string(label) + " out of range for " + std::to_string(k) +
                        " class(es) at pixel " + std::to_string(i));
      }
      if (k == 1) {
        t.onehot[n * hw + i] = T(label);
      } else {
        t.onehot[(n * k + label) * hw + i] = T(1);
      }
    }
  }
  return t;
}

}  // namespace cenet
