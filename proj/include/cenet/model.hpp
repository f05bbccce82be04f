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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cenet/autograd.hpp"
#include "cenet/nn.hpp"

namespace cenet {

enum class Variant { UNet, Backbone, CeNet };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct ModelConfig {
  Variant variant = Variant::CeNet;
  std::size_t num_classes = 1;
  double width_multiplier = 1.0;
  bool enable_dac = true;
  bool enable_rmp = true;
  std::size_t input_channels = 3;

  /// Canonical configuration of a variant; backbone starts with both
  /// context blocks disabled.
  static ModelConfig of(Variant v, std::size_t num_classes = 1, double width = 1.0);

  /// Throws ConfigError on inconsistent switches or vanishing widths.
  void validate() const;
  /// floor(base * width_multiplier), rejecting zero.
  std::size_t scaled(std::size_t base) const;
};

enum class ParamKind { ConvWeight, TransposedConvWeight, Bias, BnGamma, BnBeta, BnRunningMean, BnRunningVar };

inline bool is_trainable(ParamKind k) { return k != ParamKind::BnRunningMean && k != ParamKind::BnRunningVar; }
inline bool is_decayed(ParamKind k) { return k == ParamKind::ConvWeight || k == ParamKind::TransposedConvWeight; }

/// Declared parameter of an architecture; the source of truth for names,
/// shapes, and initialization.
struct ParamDecl {
  std::string name;
  Shape shape;
  ParamKind kind;
  std::size_t fan_in = 1;
};

/// Named, insertion-ordered collection of model tensors.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    ParamKind kind;
    Tensor<float> value;
  };

  void add(std::string name, Tensor<float> value, ParamKind kind);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor<float>& at(const std::string& name);
  const Tensor<float>& at(const std::string& name) const;
  ParamKind kind(const std::string& name) const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<Entry>& entries() noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// Scalar count; trainable-only by default.
  std::size_t element_count(bool trainable_only = true) const;

  bool operator==(const ParamStore& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Binds store tensors onto a tape for one forward pass.
class ForwardContext {
 public:
  ForwardContext(Tape<float>& tape, ParamStore& params, BnMode mode, bool requires_grad = true)
      : tape_(tape), params_(params), mode_(mode), requires_grad_(requires_grad) {}

  /// Leaf variable for a trainable tensor; bound at most once per pass.
  Var<float> param(const std::string& name);
  Tensor<float>& buffer(const std::string& name) { return params_.at(name); }

  Tape<float>& tape() noexcept { return tape_; }
  BnMode mode() const noexcept { return mode_; }
  const std::map<std::string, Var<float>>& bound() const noexcept { return bound_; }

  /// Optional (layer, output shape) recorder used by the model summary.
  void trace(const std::string& layer, const Shape& shape) {
    if (trace_) trace_->emplace_back(layer, shape);
  }
  void set_trace(std::vector<std::pair<std::string, Shape>>* sink) { trace_ = sink; }

 private:
  Tape<float>& tape_;
  ParamStore& params_;
  BnMode mode_;
  bool requires_grad_;
  std::map<std::string, Var<float>> bound_;
  std::vector<std::pair<std::string, Shape>>* trace_ = nullptr;
};

// ---------------------------------------------------------------------------
// Layers. Each registers its parameters into a declaration list on
// construction and reads them back by name in forward().

using DeclList = std::vector<ParamDecl>;

struct ConvLayer {
  std::string name;
  ConvSpec spec;
  bool bias = false;

  ConvLayer() = default;
  ConvLayer(DeclList& decls, std::string name, ConvSpec spec, bool bias);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
};

struct TransposedConvLayer {
  std::string name;
  TransposedConvSpec spec;
  bool bias = false;

  TransposedConvLayer() = default;
  TransposedConvLayer(DeclList& decls, std::string name, TransposedConvSpec spec, bool bias);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
};

struct BatchNormLayer {
  std::string name;
  std::size_t channels = 0;

  BatchNormLayer() = default;
  BatchNormLayer(DeclList& decls, std::string name, std::size_t channels);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
};

/// Two 3x3 convs with an identity or 1x1-projection shortcut.
struct BasicBlock {
  ConvLayer conv1, conv2;
  BatchNormLayer bn1, bn2;
  std::optional<ConvLayer> down;
  std::optional<BatchNormLayer> down_bn;

  BasicBlock(DeclList& decls, const std::string& prefix, std::size_t in_ch, std::size_t out_ch, std::size_t stride);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
};

/// Residual encoder: 7x7/2 stem, 3x3/2 max pool, four stages of basic blocks.
struct ResNetEncoder {
  static constexpr std::size_t kBlocks[4] = {3, 4, 6, 3};
  static constexpr std::size_t kChannels[4] = {64, 128, 256, 512};

  ConvLayer stem_conv;
  BatchNormLayer stem_bn;
  PoolSpec stem_pool;
  std::vector<std::vector<BasicBlock>> stages;
  std::array<std::size_t, 4> channels{};

  ResNetEncoder(DeclList& decls, const ModelConfig& cfg);
  /// Outputs of the four stages (strides 4, 8, 16, 32).
  std::vector<Var<float>> forward(ForwardContext& ctx, const Var<float>& x) const;
};

/// Dense atrous convolution: four cascades of 3x3 dilated convs (rates 1,
/// 3, 5) closed by 1x1 convs, ReLU at each branch end, summed with x.
struct DacBlock {
  std::vector<std::vector<ConvLayer>> branches;
  std::size_t channels = 0;

  DacBlock(DeclList& decls, const std::string& prefix, std::size_t channels);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
  /// Geometry of each branch, for receptive-field accounting.
  std::vector<std::vector<RfLayer>> branch_chains() const;
};

/// Residual multi-kernel pooling: max pools 2/3/5/6 (stride = kernel), 1x1
/// conv to one channel each, bilinear upsampling, concatenation after x.
struct RmpBlock {
  static constexpr std::size_t kKernels[4] = {2, 3, 5, 6};

  std::vector<ConvLayer> reducers;
  std::size_t channels = 0;
  /// When set, inputs smaller than a pool kernel are padded so that pool
  /// degenerates to a global max; otherwise they are rejected.
  bool pad_small_inputs = false;

  RmpBlock(DeclList& decls, const std::string& prefix, std::size_t channels, bool pad_small_inputs = false);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
  PoolSpec pool_for(std::size_t kernel, std::size_t h, std::size_t w) const;
};

/// 1x1 conv (C -> mid) -> 3x3 transposed conv /2 -> 1x1 conv (mid -> out),
/// each followed by BN + ReLU. Doubles the spatial size.
struct DecoderBlock {
  ConvLayer conv1, conv3;
  TransposedConvLayer deconv2;
  BatchNormLayer bn1, bn2, bn3;

  /// `mid == 0` selects in_ch / 4.
  DecoderBlock(DeclList& decls, const std::string& prefix, std::size_t in_ch, std::size_t out_ch, std::size_t mid = 0);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
};

/// Conv3x3-BN-ReLU twice.
struct DoubleConv {
  ConvLayer conv1, conv2;
  BatchNormLayer bn1, bn2;

  DoubleConv(DeclList& decls, const std::string& prefix, std::size_t in_ch, std::size_t out_ch);
  Var<float> forward(ForwardContext& ctx, const Var<float>& x) const;
};

/// Segmentation network of one configured variant.
class Model {
 public:
  explicit Model(ModelConfig cfg);
  ~Model();
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;

  const ModelConfig& config() const noexcept { return cfg_; }
  const DeclList& decls() const noexcept { return decls_; }

  /// Fan-in scaled normal weights, zero biases and betas, unit gammas.
  /// Each tensor draws from a stream keyed by (seed, name), so shared
  /// layers initialize identically across variants.
  ParamStore init_params(std::uint64_t seed) const;

  /// Checks that `store` has exactly the declared names and shapes.
  void validate(const ParamStore& store) const;

  /// Per-pixel probabilities [N,K,H,W]: sigmoid when K == 1, softmax otherwise.
  Var<float> forward(ForwardContext& ctx, const Var<float>& image) const;
  Var<float> forward_logits(ForwardContext& ctx, const Var<float>& image) const;

  /// Trainable scalar count.
  std::size_t parameter_count() const;

  /// Minimum spatial divisor of accepted inputs.
  static constexpr std::size_t kInputDivisor = 32;

  struct Impl;

 private:
  ModelConfig cfg_;
  DeclList decls_;
  std::unique_ptr<Impl> impl_;
};

/// Convenience: eval-mode probabilities for a plain tensor, no gradients.
Tensor<float> predict(const Model& model, ParamStore& params, const Tensor<float>& image);

void save_weights(const ParamStore& store, const std::filesystem::path& path);
/// Loads and validates against `model`; mismatches name the tensor with
/// expected and found shapes.
ParamStore load_weights(const Model& model, const std::filesystem::path& path);

/// Text summary: per-layer output shapes for an input size, per-parameter
/// shapes and counts, and totals.
std::string model_summary(const Model& model, std::size_t height, std::size_t width);

}  // namespace cenet
