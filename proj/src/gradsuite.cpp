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


#include "cenet/gradsuite.hpp"

#include <cmath>

#include "cenet/labels.hpp"
#include "cenet/losses.hpp"
#include "cenet/nn.hpp"
#include "cenet/rng.hpp"

namespace cenet {

namespace {

using V = Var<double>;
using T = Tensor<double>;

T random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  T t(std::move(s));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

/// Values bounded away from zero, for kinked ops.
T away_from_zero(Shape s, Rng& rng) {
  T t(std::move(s));
  for (auto& v : t.data()) {
    const double m = rng.uniform(0.1, 1.0);
    v = rng.below(2) ? m : -m;
  }
  return t;
}

/// Distinct values separated by at least 1e-2, for max selection.
T distinct(Shape s, Rng& rng) {
  T t(std::move(s));
  const auto perm = permutation(t.size(), rng);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.01 * double(perm[i]) - 0.005 * double(t.size());
  return t;
}

/// sum(y * R) for a fixed random R, so every output element matters.
V project(Tape<double>& tape, const V& y, std::uint64_t seed) {
  Rng rng(seed);
  return sum_all(mul(y, tape.constant(random_tensor(y.shape(), rng))));
}

}  // namespace

std::vector<OpGradCheck> run_gradient_suite(std::uint64_t seed, double tol) {
  std::vector<OpGradCheck> out;
  Rng rng(derive_seed(seed, "gradient-suite"));
  const std::uint64_t ps = rng.next();
  auto check = [&](std::string name, const GradFunction& fn, std::vector<T> points) {
    out.push_back({std::move(name), grad_check(fn, points, 1e-5, tol)});
  };

  // Elementwise, including broadcasting of the second operand.
  check("add", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, add(x[0], x[1]), ps); },
        {random_tensor({2, 3, 4}, rng), random_tensor({3, 4}, rng)});
  check("sub", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, sub(x[0], x[1]), ps); },
        {random_tensor({2, 3, 4}, rng), random_tensor({2, 3, 4}, rng)});
  check("mul", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, mul(x[0], x[1]), ps); },
        {random_tensor({2, 3, 4}, rng), random_tensor({4}, rng)});
  check("relu", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, relu(x[0]), ps); },
        {away_from_zero({3, 5}, rng)});
  check("exp", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, exp(x[0]), ps); },
        {random_tensor({3, 5}, rng)});
  check("log", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, log(x[0]), ps); },
        {random_tensor({3, 5}, rng, 0.2, 2.0)});
  check("sigmoid", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, sigmoid(x[0]), ps); },
        {random_tensor({3, 5}, rng, -3.0, 3.0)});
  check("affine", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, affine(x[0], -1.5, 0.25), ps); },
        {random_tensor({7}, rng)});
  check("add_n",
        [&](Tape<double>& t, const std::vector<V>& x) { return project(t, add_n<double>({x[0], x[1], x[0]}), ps); },
        {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)});

  // Reductions.
  check("reduce_sum",
        [&](Tape<double>& t, const std::vector<V>& x) { return project(t, reduce(ReduceKind::Sum, x[0], {1}), ps); },
        {random_tensor({2, 3, 4}, rng)});
  check("reduce_mean", [&](Tape<double>& t, const std::vector<V>& x) {
    return project(t, reduce(ReduceKind::Mean, x[0], {0, 2}, true), ps);
  }, {random_tensor({2, 3, 4}, rng)});
  check("reduce_max",
        [&](Tape<double>& t, const std::vector<V>& x) { return project(t, reduce(ReduceKind::Max, x[0], {2}), ps); },
        {distinct({2, 3, 4}, rng)});

  // Linear algebra and layout.
  check("matmul", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, matmul(x[0], x[1]), ps); },
        {random_tensor({3, 4}, rng), random_tensor({4, 5}, rng)});
  check("transpose2d", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, transpose2d(x[0]), ps); },
        {random_tensor({3, 4}, rng)});
  check("reshape", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, reshape(x[0], {4, 3}), ps); },
        {random_tensor({2, 6}, rng)});
  check("slice", [&](Tape<double>& t, const std::vector<V>& x) { return project(t, slice(x[0], 1, 1, 2), ps); },
        {random_tensor({2, 4, 3}, rng)});
  check("pad_zero",
        [&](Tape<double>& t, const std::vector<V>& x) { return project(t, pad_zero(x[0], 1, 2, 0, 1), ps); },
        {random_tensor({1, 2, 3, 3}, rng)});
  check("concat_channels", [&](Tape<double>& t, const std::vector<V>& x) {
    return project(t, concat_channels<double>({x[0], x[1]}), ps);
  }, {random_tensor({2, 1, 3, 3}, rng), random_tensor({2, 2, 3, 3}, rng)});

  // Convolutions.
  struct ConvCase {
    const char* name;
    ConvSpec spec;
    std::size_t n, h, w;
    bool bias;
  };
  const ConvCase convs[] = {
      {"conv2d", conv_spec(2, 3, 3, 1, 1), 2, 5, 5, true},
      {"conv2d_stride2", conv_spec(2, 2, 3, 2, 1), 1, 7, 6, false},
      {"conv2d_1x1", conv_spec(3, 2, 1), 2, 3, 3, true},
      {"conv2d_dilation3", conv_spec(2, 2, 3, 1, 3, 3), 1, 7, 7, true},
      {"conv2d_dilation5", conv_spec(1, 2, 3, 1, 5, 5), 1, 11, 11, true},
  };
  for (const auto& c : convs) {
    const ConvSpec spec = c.spec;
    const bool bias = c.bias;
    std::vector<T> pts = {random_tensor({c.n, spec.in_channels, c.h, c.w}, rng),
                          random_tensor({spec.out_channels, spec.in_channels, spec.kernel[0], spec.kernel[1]}, rng)};
    if (bias) pts.push_back(random_tensor({spec.out_channels}, rng));
    check(c.name, [=](Tape<double>& t, const std::vector<V>& x) {
      return project(t, bias ? conv2d(x[0], x[1], &x[2], spec) : conv2d<double>(x[0], x[1], nullptr, spec), ps);
    }, pts);
  }
  {
    const TransposedConvSpec spec = transposed_conv_spec(2, 3, 3, 2, 1, 1);
    check("transposed_conv2d", [=](Tape<double>& t, const std::vector<V>& x) {
      return project(t, transposed_conv2d(x[0], x[1], &x[2], spec), ps);
    }, {random_tensor({2, 2, 3, 3}, rng), random_tensor({2, 3, 3, 3}, rng), random_tensor({3}, rng)});
    const TransposedConvSpec spec4 = transposed_conv_spec(2, 1, 4, 2, 1);
    check("transposed_conv2d_k4", [=](Tape<double>& t, const std::vector<V>& x) {
      return project(t, transposed_conv2d<double>(x[0], x[1], nullptr, spec4), ps);
    }, {random_tensor({1, 2, 3, 2}, rng), random_tensor({2, 1, 4, 4}, rng)});
  }

  // Pooling and resampling.
  check("max_pool2d",
        [&](Tape<double>& t, const std::vector<V>& x) { return project(t, max_pool2d(x[0], pool_spec(2)), ps); },
        {distinct({1, 2, 6, 6}, rng)});
  check("max_pool2d_padded", [&](Tape<double>& t, const std::vector<V>& x) {
    return project(t, max_pool2d(x[0], pool_spec(3, 2, 1)), ps);
  }, {distinct({1, 2, 5, 5}, rng)});
  check("bilinear_upsample",
        [&](Tape<double>& t, const std::vector<V>& x) { return project(t, bilinear_upsample(x[0], 7, 5), ps); },
        {random_tensor({1, 2, 3, 2}, rng)});

  // Normalization and output activations.
  check("batch_norm_train", [&](Tape<double>& t, const std::vector<V>& x) {
    T rm({3}), rv({3}, 1.0);
    return project(t, batch_norm2d(x[0], x[1], x[2], rm, rv, BnMode::Train), ps);
  }, {random_tensor({2, 3, 3, 3}, rng), random_tensor({3}, rng, 0.5, 1.5), random_tensor({3}, rng)});
  check("batch_norm_eval", [&](Tape<double>& t, const std::vector<V>& x) {
    T rm({3}, 0.1), rv({3}, 0.7);
    return project(t, batch_norm2d(x[0], x[1], x[2], rm, rv, BnMode::Eval), ps);
  }, {random_tensor({2, 3, 2, 2}, rng), random_tensor({3}, rng, 0.5, 1.5), random_tensor({3}, rng)});
  check("softmax_channels",
        [&](Tape<double>& t, const std::vector<V>& x) { return project(t, softmax_channels(x[0]), ps); },
        {random_tensor({2, 3, 2, 3}, rng, -2.0, 2.0)});

  // Losses on random probabilities and labels, with one ignored pixel.
  {
    auto targets = [&](std::size_t k) {
      std::vector<LabelMap> masks(2, LabelMap(3, 4));
      for (auto& m : masks) {
        for (auto& l : m.labels) l = std::uint8_t(rng.below(k == 1 ? 2 : k));
      }
      masks[1].labels[5] = kIgnoreLabel;
      return encode_targets<double>(masks, k);
    };
    const auto t1 = targets(1), t3 = targets(3);
    const ClassWeights w3{{0.2, 0.5, 0.3}};
    check("dice_loss", [=](Tape<double>& t, const std::vector<V>& x) {
      (void)t;
      return dice_loss(x[0], t1.onehot, &t1.valid, ClassWeights::uniform(1));
    }, {random_tensor({2, 1, 3, 4}, rng, 0.05, 0.95)});
    check("dice_loss_multiclass", [=](Tape<double>& t, const std::vector<V>& x) {
      (void)t;
      return dice_loss(softmax_channels(x[0]), t3.onehot, &t3.valid, w3);
    }, {random_tensor({2, 3, 3, 4}, rng, -2.0, 2.0)});
    check("cross_entropy_binary", [=](Tape<double>& t, const std::vector<V>& x) {
      (void)t;
      return cross_entropy_loss(x[0], t1.onehot, &t1.valid);
    }, {random_tensor({2, 1, 3, 4}, rng, 0.05, 0.95)});
    check("cross_entropy_multiclass", [=](Tape<double>& t, const std::vector<V>& x) {
      (void)t;
      return cross_entropy_loss(softmax_channels(x[0]), t3.onehot, &t3.valid);
    }, {random_tensor({2, 3, 3, 4}, rng, -2.0, 2.0)});
  }
  return out;
}

}  // namespace cenet
