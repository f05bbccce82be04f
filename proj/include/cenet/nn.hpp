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

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "cenet/autograd.hpp"

namespace cenet {

/// Geometry of a 2-D convolution. Dilation is isotropic; a rate of 1 is the
/// ordinary dense convolution.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::array<std::size_t, 2> kernel{1, 1};
  std::array<std::size_t, 2> stride{1, 1};
  std::array<std::size_t, 2> padding{0, 0};
  std::size_t dilation = 1;

  /// floor((in + 2p - r(k-1) - 1) / s) + 1; throws ConfigError when < 1.
  std::size_t output_extent(std::size_t in, std::size_t axis) const;
  std::string str() const;
};

/// Square-kernel shorthand.
ConvSpec conv_spec(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride = 1,
                   std::size_t padding = 0, std::size_t dilation = 1);

struct TransposedConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::array<std::size_t, 2> kernel{1, 1};
  std::array<std::size_t, 2> stride{1, 1};
  std::array<std::size_t, 2> padding{0, 0};
  std::array<std::size_t, 2> output_padding{0, 0};

  /// (in - 1) s - 2p + k + output_padding; throws ConfigError when < 1.
  std::size_t output_extent(std::size_t in, std::size_t axis) const;
  std::string str() const;
};

TransposedConvSpec transposed_conv_spec(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                                        std::size_t stride, std::size_t padding = 0,
                                        std::size_t output_padding = 0);

/// Max pooling window. Padded cells never win the max.
struct PoolSpec {
  std::array<std::size_t, 2> kernel{2, 2};
  std::array<std::size_t, 2> stride{2, 2};
  std::array<std::size_t, 2> padding{0, 0};

  std::size_t output_extent(std::size_t in, std::size_t axis) const;
  std::string str() const;
};

/// Non-overlapping square pool (stride == kernel).
PoolSpec pool_spec(std::size_t kernel, std::size_t stride = 0, std::size_t padding = 0);

/// x: [N,Cin,H,W], w: [Cout,Cin,kh,kw], b: [Cout] or null.
/// y[n,o,i,j] = b[o] + sum_{c,u,v} x[n,c, i*s - p + r*u, j*s - p + r*v] w[o,c,u,v]
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>* b, const ConvSpec& spec);

/// x: [N,Cin,H,W], w: [Cin,Cout,kh,kw]. Forward is the data-gradient of the
/// matching conv2d, so the two are exact adjoints.
template <typename T>
Var<T> transposed_conv2d(const Var<T>& x, const Var<T>& w, const Var<T>* b, const TransposedConvSpec& spec);

/// Ties resolve to the first element in row-major window order.
template <typename T>
Var<T> max_pool2d(const Var<T>& x, const PoolSpec& spec);

/// Half-pixel (align_corners = false) bilinear resize of the two trailing axes.
template <typename T>
Var<T> bilinear_upsample(const Var<T>& x, std::size_t out_h, std::size_t out_w);

enum class BnMode { Train, Eval };

inline constexpr double kBnMomentum = 0.1;
inline constexpr double kBnEps = 1e-5;

/// Per-channel normalization over (N,H,W). Train mode uses batch statistics
/// and folds them into the running estimates (unbiased variance); eval mode
/// uses the running estimates only.
template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                    Tensor<T>& running_var, BnMode mode, double momentum = kBnMomentum, double eps = kBnEps);

/// Softmax over axis 1 of [N,K,H,W], K >= 2.
template <typename T>
Var<T> softmax_channels(const Var<T>& x);

// Tensor-level kernels, shared with the data pipeline.

/// Resizes the trailing two axes of a rank >= 2 tensor.
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, std::size_t out_h, std::size_t out_w);

/// Result of the layer-by-layer receptive-field recurrence
/// rf += (k - 1) * r * jump, jump *= s, starting from rf = jump = 1.
struct ReceptiveField {
  std::size_t rf = 1;
  std::size_t jump = 1;
};

using RfLayer = std::variant<ConvSpec, PoolSpec>;

ReceptiveField receptive_field(const std::vector<RfLayer>& chain);

}  // namespace cenet
