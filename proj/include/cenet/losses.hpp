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

#include <vector>

#include "cenet/autograd.hpp"
#include "cenet/model.hpp"

namespace cenet {

/// Per-class dice weights; nonnegative and summing to one.
struct ClassWeights {
  std::vector<double> weights;

  static ClassWeights uniform(std::size_t num_classes);
  /// Throws ContractError unless |sum - 1| <= 1e-6 and all entries >= 0.
  void validate(std::size_t num_classes) const;
};

inline constexpr double kDiceEps = 1e-6;

/// 1 - sum_k 2 w_k (sum p g + eps) / (sum p^2 + sum g^2 + eps), sums over
/// every valid pixel of the batch. `valid` is [N,1,H,W] or null.
template <typename T>
Var<T> dice_loss(const Var<T>& probs, const Tensor<T>& onehot, const Tensor<T>* valid, const ClassWeights& weights,
                 double eps = kDiceEps);

/// Mean over valid pixels of -sum_k g_k log p_k. With K == 1 it is the
/// binary form -[g log p + (1 - g) log(1 - p)].
template <typename T>
Var<T> cross_entropy_loss(const Var<T>& probs, const Tensor<T>& onehot, const Tensor<T>* valid);

/// (lambda / 2) * sum of squared conv and transposed-conv weights.
double weight_regularization(const ParamStore& params, double lambda);

struct TotalLoss {
  Var<float> loss;  // data term + reg; gradient equals the data term's
  double reg = 0.0;
};

/// The regularizer enters as a constant: the matching decay is applied by
/// the optimizer, so differentiating it here would count it twice.
TotalLoss total_loss(const Var<float>& data_loss, const ParamStore& params, double lambda);

}  // namespace cenet
