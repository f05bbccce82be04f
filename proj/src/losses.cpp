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


#include "cenet/losses.hpp"

#include <cmath>

namespace cenet {

ClassWeights ClassWeights::uniform(std::size_t num_classes) {
  if (num_classes == 0) throw ContractError("class weights need at least one class");
  return ClassWeights{std::vector<double>(num_classes, 1.0 / double(num_classes))};
}

void ClassWeights::validate(std::size_t num_classes) const {
  if (weights.size() != num_classes) {
    throw ContractError("expected " + std::to_string(num_classes) + " class weights, got " +
                        std::to_string(weights.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractError("class weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ContractError("class weights sum to " + std::to_string(sum) + ", not 1");
}

namespace {

template <typename T>
void check_loss_inputs(const Shape& ps, const Tensor<T>& onehot, const Tensor<T>* valid) {
  if (ps.size() != 4) throw DimensionError("loss expects [N,K,H,W] probabilities, got " + shape_str(ps));
  if (onehot.shape() != ps) {
    throw DimensionError("targets " + shape_str(onehot.shape()) + " do not match probabilities " + shape_str(ps));
  }
  if (valid && valid->shape() != Shape{ps[0], 1, ps[2], ps[3]}) {
    throw DimensionError("validity mask " + shape_str(valid->shape()) + " does not match " + shape_str(ps));
  }
}

}  // namespace

template <typename T>
Var<T> dice_loss(const Var<T>& probs, const Tensor<T>& onehot, const Tensor<T>* valid, const ClassWeights& weights,
                 double eps) {
  const Shape& ps = probs.shape();
  check_loss_inputs(ps, onehot, valid);
  const std::size_t n = ps[0], k = ps[1], hw = ps[2] * ps[3];
  weights.validate(k);
  const Tensor<T>& p = probs.value();
  // Per-class sums in double regardless of T.
  std::vector<double> inter(k, 0.0), denom(k, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t base = (b * k + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double v = valid ? double((*valid)[b * hw + i]) : 1.0;
        const double pi = p[base + i], gi = onehot[base + i];
        inter[c] += v * pi * gi;
        denom[c] += v * (pi * pi + gi * gi);
      }
    }
  }
  double loss = 1.0;
  for (std::size_t c = 0; c < k; ++c) loss -= 2.0 * weights.weights[c] * (inter[c] + eps) / (denom[c] + eps);

  Tensor<T> target = onehot;
  std::optional<Tensor<T>> mask;
  if (valid) mask = *valid;
  std::vector<double> w = weights.weights;
  return probs.tape()->record(
      "dice_loss", Tensor<T>::scalar(T(loss)), {probs},
      [=, target = std::move(target), mask = std::move(mask)](const BackwardArgs<T>& g) {
        Tensor<T>& gp = *g.grads[0];
        const Tensor<T>& pv = *g.inputs[0];
        const double go = g.grad_out[0];
        for (std::size_t b = 0; b < n; ++b) {
          for (std::size_t c = 0; c < k; ++c) {
            const double d = denom[c] + eps;
            const double num = inter[c] + eps;
            const std::size_t base = (b * k + c) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
              const double v = mask ? double((*mask)[b * hw + i]) : 1.0;
              if (v == 0.0) continue;
              const double pi = pv[base + i], gi = target[base + i];
              const double dl = -2.0 * w[c] * v * (gi / d - 2.0 * pi * num / (d * d));
              gp[base + i] += T(go * dl);
            }
          }
        }
      });
}

template <typename T>
Var<T> cross_entropy_loss(const Var<T>& probs, const Tensor<T>& onehot, const Tensor<T>* valid) {
  const Shape& ps = probs.shape();
  check_loss_inputs(ps, onehot, valid);
  const std::size_t n = ps[0], k = ps[1], hw = ps[2] * ps[3];
  const Tensor<T>& p = probs.value();
  double count = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t i = 0; i < hw; ++i) count += valid ? double((*valid)[b * hw + i]) : 1.0;
  }
  auto clamp = [](double x) { return std::max(x, kLogClamp); };
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t base = (b * k + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double v = valid ? double((*valid)[b * hw + i]) : 1.0;
        if (v == 0.0) continue;
        const double pi = p[base + i], gi = onehot[base + i];
        double term = gi * std::log(clamp(pi));
        if (k == 1) term += (1.0 - gi) * std::log(clamp(1.0 - pi));
        total -= v * term;
      }
    }
  }
  const double scale = count > 0.0 ? 1.0 / count : 0.0;

  Tensor<T> target = onehot;
  std::optional<Tensor<T>> mask;
  if (valid) mask = *valid;
  return probs.tape()->record(
      "cross_entropy_loss", Tensor<T>::scalar(T(total * scale)), {probs},
      [=, target = std::move(target), mask = std::move(mask)](const BackwardArgs<T>& g) {
        Tensor<T>& gp = *g.grads[0];
        const Tensor<T>& pv = *g.inputs[0];
        const double go = g.grad_out[0] * scale;
        for (std::size_t b = 0; b < n; ++b) {
          for (std::size_t c = 0; c < k; ++c) {
            const std::size_t base = (b * k + c) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
              const double v = mask ? double((*mask)[b * hw + i]) : 1.0;
              if (v == 0.0) continue;
              const double pi = pv[base + i], gi = target[base + i];
              // Clamped logs are flat, matching the log op.
              double d = pi > kLogClamp ? -gi / pi : 0.0;
              if (k == 1 && 1.0 - pi > kLogClamp) d += (1.0 - gi) / (1.0 - pi);
              gp[base + i] += T(go * v * d);
            }
          }
        }
      });
}

double weight_regularization(const ParamStore& params, double lambda) {
  if (lambda < 0.0) throw ContractError("weight decay must be >= 0");
  double sq = 0.0;
  for (const auto& e : params.entries()) {
    if (!is_decayed(e.kind)) continue;
    for (float v : e.value.data()) sq += double(v) * double(v);
  }
  return 0.5 * lambda * sq;
}

TotalLoss total_loss(const Var<float>& data_loss, const ParamStore& params, double lambda) {
  const double reg = weight_regularization(params, lambda);
  return TotalLoss{affine(data_loss, 1.0f, float(reg)), reg};
}

#define CENET_INSTANTIATE(T)                                                                                  \
  template Var<T> dice_loss<T>(const Var<T>&, const Tensor<T>&, const Tensor<T>*, const ClassWeights&, double); \
  template Var<T> cross_entropy_loss<T>(const Var<T>&, const Tensor<T>&, const Tensor<T>*);

CENET_INSTANTIATE(float)
CENET_INSTANTIATE(double)
#undef CENET_INSTANTIATE

}  // namespace cenet
