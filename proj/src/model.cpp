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

#include "cenet/model.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "cenet/rng.hpp"
#include "cenet/serialize.hpp"

namespace cenet {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::UNet: return "unet";
    case Variant::Backbone: return "backbone";
    case Variant::CeNet: return "cenet";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "unet") return Variant::UNet;
  if (s == "backbone") return Variant::Backbone;
  if (s == "cenet") return Variant::CeNet;
  throw ConfigError("unknown model variant '" + s + "' (expected unet, backbone or cenet)");
}

ModelConfig ModelConfig::of(Variant v, std::size_t num_classes, double width) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.num_classes = num_classes;
  cfg.width_multiplier = width;
  cfg.enable_dac = cfg.enable_rmp = v == Variant::CeNet;
  return cfg;
}

void ModelConfig::validate() const {
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (input_channels < 1) throw ConfigError("input_channels must be >= 1");
  if (!(width_multiplier > 0.0 && width_multiplier <= 1.0)) {
    throw ConfigError("width_multiplier must lie in (0, 1], got " + std::to_string(width_multiplier));
  }
  if (variant == Variant::UNet && (enable_dac || enable_rmp)) {
    throw ConfigError("the unet variant has no context extractor; disable enable_dac and enable_rmp");
  }
  for (std::size_t c : ResNetEncoder::kChannels) scaled(c);
  scaled(32);
  if (variant == Variant::UNet) scaled(1024);
}

std::size_t ModelConfig::scaled(std::size_t base) const {
  const auto c = std::size_t(std::floor(double(base) * width_multiplier + 1e-9));
  if (c == 0) {
    throw ConfigError("width_multiplier " + std::to_string(width_multiplier) + " reduces a " + std::to_string(base) +
                      "-channel layer to zero channels");
  }
  return c;
}

// ---------------------------------------------------------------------------
// ParamStore

void ParamStore::add(std::string name, Tensor<float> value, ParamKind kind) {
  if (index_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), kind, std::move(value)});
}

Tensor<float>& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("no parameter named '" + name + "'");
  return entries_[it->second].value;
}

const Tensor<float>& ParamStore::at(const std::string& name) const {
  return const_cast<ParamStore&>(*this).at(name);
}

ParamKind ParamStore::kind(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("no parameter named '" + name + "'");
  return entries_[it->second].kind;
}

std::size_t ParamStore::element_count(bool trainable_only) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (!trainable_only || is_trainable(e.kind)) n += e.value.size();
  }
  return n;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.kind != b.kind || a.value != b.value) return false;
  }
  return true;
}

Var<float> ForwardContext::param(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var<float> v = tape_.leaf(params_.at(name), requires_grad_);
  bound_.emplace(name, v);
  return v;
}

// ---------------------------------------------------------------------------
// Layers

ConvLayer::ConvLayer(DeclList& decls, std::string n, ConvSpec s, bool b) : name(std::move(n)), spec(s), bias(b) {
  const std::size_t fan_in = spec.in_channels * spec.kernel[0] * spec.kernel[1];
  decls.push_back({name + ".weight",
                   {spec.out_channels, spec.in_channels, spec.kernel[0], spec.kernel[1]},
                   ParamKind::ConvWeight,
                   fan_in});
  if (bias) decls.push_back({name + ".bias", {spec.out_channels}, ParamKind::Bias, fan_in});
}

Var<float> ConvLayer::forward(ForwardContext& ctx, const Var<float>& x) const {
  Var<float> w = ctx.param(name + ".weight");
  if (bias) {
    Var<float> b = ctx.param(name + ".bias");
    return conv2d(x, w, &b, spec);
  }
  return conv2d<float>(x, w, nullptr, spec);
}

TransposedConvLayer::TransposedConvLayer(DeclList& decls, std::string n, TransposedConvSpec s, bool b)
    : name(std::move(n)), spec(s), bias(b) {
  // Each output pixel sees about Cin * (k / s)^2 taps.
  const std::size_t taps = spec.in_channels * spec.kernel[0] * spec.kernel[1];
  const std::size_t fan_in = std::max<std::size_t>(1, taps / (spec.stride[0] * spec.stride[1]));
  decls.push_back({name + ".weight",
                   {spec.in_channels, spec.out_channels, spec.kernel[0], spec.kernel[1]},
                   ParamKind::TransposedConvWeight,
                   fan_in});
  if (bias) decls.push_back({name + ".bias", {spec.out_channels}, ParamKind::Bias, fan_in});
}

Var<float> TransposedConvLayer::forward(ForwardContext& ctx, const Var<float>& x) const {
  Var<float> w = ctx.param(name + ".weight");
  if (bias) {
    Var<float> b = ctx.param(name + ".bias");
    return transposed_conv2d(x, w, &b, spec);
  }
  return transposed_conv2d<float>(x, w, nullptr, spec);
}

BatchNormLayer::BatchNormLayer(DeclList& decls, std::string n, std::size_t c) : name(std::move(n)), channels(c) {
  decls.push_back({name + ".gamma", {c}, ParamKind::BnGamma, 1});
  decls.push_back({name + ".beta", {c}, ParamKind::BnBeta, 1});
  decls.push_back({name + ".running_mean", {c}, ParamKind::BnRunningMean, 1});
  decls.push_back({name + ".running_var", {c}, ParamKind::BnRunningVar, 1});
}

Var<float> BatchNormLayer::forward(ForwardContext& ctx, const Var<float>& x) const {
  return batch_norm2d(x, ctx.param(name + ".gamma"), ctx.param(name + ".beta"), ctx.buffer(name + ".running_mean"),
                      ctx.buffer(name + ".running_var"), ctx.mode());
}

BasicBlock::BasicBlock(DeclList& decls, const std::string& prefix, std::size_t in_ch, std::size_t out_ch,
                       std::size_t stride) {
  conv1 = ConvLayer(decls, prefix + ".conv1", conv_spec(in_ch, out_ch, 3, stride, 1), false);
  bn1 = BatchNormLayer(decls, prefix + ".bn1", out_ch);
  conv2 = ConvLayer(decls, prefix + ".conv2", conv_spec(out_ch, out_ch, 3, 1, 1), false);
  bn2 = BatchNormLayer(decls, prefix + ".bn2", out_ch);
  if (stride != 1 || in_ch != out_ch) {
    down = ConvLayer(decls, prefix + ".downsample.conv", conv_spec(in_ch, out_ch, 1, stride, 0), false);
    down_bn = BatchNormLayer(decls, prefix + ".downsample.bn", out_ch);
  }
}

Var<float> BasicBlock::forward(ForwardContext& ctx, const Var<float>& x) const {
  Var<float> y = relu(bn1.forward(ctx, conv1.forward(ctx, x)));
  y = bn2.forward(ctx, conv2.forward(ctx, y));
  Var<float> shortcut = down ? down_bn->forward(ctx, down->forward(ctx, x)) : x;
  return relu(add(y, shortcut));
}

ResNetEncoder::ResNetEncoder(DeclList& decls, const ModelConfig& cfg) {
  for (std::size_t i = 0; i < 4; ++i) channels[i] = cfg.scaled(kChannels[i]);
  stem_conv = ConvLayer(decls, "encoder.stem.conv", conv_spec(cfg.input_channels, channels[0], 7, 2, 3), false);
  stem_bn = BatchNormLayer(decls, "encoder.stem.bn", channels[0]);
  stem_pool = pool_spec(3, 2, 1);
  std::size_t in_ch = channels[0];
  for (std::size_t s = 0; s < 4; ++s) {
    std::vector<BasicBlock> blocks;
    for (std::size_t b = 0; b < kBlocks[s]; ++b) {
      const std::size_t stride = (s > 0 && b == 0) ? 2 : 1;
      const std::string prefix = "encoder.stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1);
      blocks.emplace_back(decls, prefix, in_ch, channels[s], stride);
      in_ch = channels[s];
    }
    stages.push_back(std::move(blocks));
  }
}

std::vector<Var<float>> ResNetEncoder::forward(ForwardContext& ctx, const Var<float>& x) const {
  Var<float> y = relu(stem_bn.forward(ctx, stem_conv.forward(ctx, x)));
  y = max_pool2d(y, stem_pool);
  ctx.trace("encoder.stem", y.shape());
  std::vector<Var<float>> outs;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    for (const auto& block : stages[s]) y = block.forward(ctx, y);
    ctx.trace("encoder.stage" + std::to_string(s + 1), y.shape());
    outs.push_back(y);
  }
  return outs;
}

DacBlock::DacBlock(DeclList& decls, const std::string& prefix, std::size_t c) : channels(c) {
  static constexpr std::size_t kRates[3] = {1, 3, 5};
  // Branch b (1-based) stacks the 3x3 convs listed here, then a 1x1 conv
  // (except branch 1, which is a single 3x3).
  const std::vector<std::vector<std::size_t>> rates = {{kRates[0]}, {kRates[1]}, {kRates[0], kRates[1]},
                                                       {kRates[0], kRates[1], kRates[2]}};
  for (std::size_t b = 0; b < rates.size(); ++b) {
    std::vector<ConvLayer> convs;
    const std::string bp = prefix + ".branch" + std::to_string(b + 1);
    for (std::size_t i = 0; i < rates[b].size(); ++i) {
      const std::size_t r = rates[b][i];
      convs.emplace_back(decls, bp + ".conv" + std::to_string(i + 1), conv_spec(c, c, 3, 1, r, r), true);
    }
    if (b > 0) {
      convs.emplace_back(decls, bp + ".conv" + std::to_string(rates[b].size() + 1), conv_spec(c, c, 1), true);
    }
    branches.push_back(std::move(convs));
  }
}

Var<float> DacBlock::forward(ForwardContext& ctx, const Var<float>& x) const {
  if (x.shape().size() != 4 || x.shape()[1] != channels) {
    throw DimensionError("DAC block expects " + std::to_string(channels) + " channels, got " + shape_str(x.shape()));
  }
  std::vector<Var<float>> terms{x};
  for (const auto& branch : branches) {
    Var<float> y = x;
    for (const auto& conv : branch) y = conv.forward(ctx, y);
    terms.push_back(relu(y));
  }
  Var<float> out = add_n(terms);
  ctx.trace("context.dac", out.shape());
  return out;
}

std::vector<std::vector<RfLayer>> DacBlock::branch_chains() const {
  std::vector<std::vector<RfLayer>> chains;
  for (const auto& branch : branches) {
    std::vector<RfLayer> chain;
    for (const auto& conv : branch) chain.emplace_back(conv.spec);
    chains.push_back(std::move(chain));
  }
  return chains;
}

RmpBlock::RmpBlock(DeclList& decls, const std::string& prefix, std::size_t c, bool pad_small)
    : channels(c), pad_small_inputs(pad_small) {
  for (std::size_t k : kKernels) {
    reducers.emplace_back(decls, prefix + ".pool" + std::to_string(k) + ".conv", conv_spec(c, 1, 1), true);
  }
}

PoolSpec RmpBlock::pool_for(std::size_t k, std::size_t h, std::size_t w) const {
  PoolSpec spec = pool_spec(k);
  const std::size_t extent[2] = {h, w};
  for (std::size_t a = 0; a < 2; ++a) {
    if (extent[a] >= k) continue;
    if (!pad_small_inputs) {
      throw ConfigError("RMP " + std::to_string(k) + "x" + std::to_string(k) + " pool needs spatial size >= " +
                        std::to_string(k) + ", got " + std::to_string(h) + "x" + std::to_string(w) +
                        " (the 6x6 pool bounds the minimum input)");
    }
    spec.padding[a] = (k - extent[a] + 1) / 2;
  }
  return spec;
}

Var<float> RmpBlock::forward(ForwardContext& ctx, const Var<float>& x) const {
  const Shape& xs = x.shape();
  if (xs.size() != 4 || xs[1] != channels) {
    throw DimensionError("RMP block expects " + std::to_string(channels) + " channels, got " + shape_str(xs));
  }
  const std::size_t h = xs[2], w = xs[3];
  // Validate every kernel before doing any work.
  std::vector<PoolSpec> pools;
  for (std::size_t k : kKernels) pools.push_back(pool_for(k, h, w));
  std::vector<Var<float>> parts{x};
  for (std::size_t i = 0; i < pools.size(); ++i) {
    Var<float> pooled = max_pool2d(x, pools[i]);
    Var<float> reduced = reducers[i].forward(ctx, pooled);
    parts.push_back(bilinear_upsample(reduced, h, w));
  }
  Var<float> out = concat_channels(parts);
  ctx.trace("context.rmp", out.shape());
  return out;
}

DecoderBlock::DecoderBlock(DeclList& decls, const std::string& prefix, std::size_t in_ch, std::size_t out_ch,
                           std::size_t mid) {
  if (mid == 0) {
    if (in_ch < 4) {
      throw ConfigError("decoder block " + prefix + " needs >= 4 input channels, got " + std::to_string(in_ch));
    }
    mid = in_ch / 4;
  }
  conv1 = ConvLayer(decls, prefix + ".conv1", conv_spec(in_ch, mid, 1), false);
  bn1 = BatchNormLayer(decls, prefix + ".bn1", mid);
  deconv2 = TransposedConvLayer(decls, prefix + ".deconv2", transposed_conv_spec(mid, mid, 3, 2, 1, 1), false);
  bn2 = BatchNormLayer(decls, prefix + ".bn2", mid);
  conv3 = ConvLayer(decls, prefix + ".conv3", conv_spec(mid, out_ch, 1), false);
  bn3 = BatchNormLayer(decls, prefix + ".bn3", out_ch);
}

Var<float> DecoderBlock::forward(ForwardContext& ctx, const Var<float>& x) const {
  Var<float> y = relu(bn1.forward(ctx, conv1.forward(ctx, x)));
  y = relu(bn2.forward(ctx, deconv2.forward(ctx, y)));
  return relu(bn3.forward(ctx, conv3.forward(ctx, y)));
}

DoubleConv::DoubleConv(DeclList& decls, const std::string& prefix, std::size_t in_ch, std::size_t out_ch) {
  conv1 = ConvLayer(decls, prefix + ".conv1", conv_spec(in_ch, out_ch, 3, 1, 1), false);
  bn1 = BatchNormLayer(decls, prefix + ".bn1", out_ch);
  conv2 = ConvLayer(decls, prefix + ".conv2", conv_spec(out_ch, out_ch, 3, 1, 1), false);
  bn2 = BatchNormLayer(decls, prefix + ".bn2", out_ch);
}

Var<float> DoubleConv::forward(ForwardContext& ctx, const Var<float>& x) const {
  Var<float> y = relu(bn1.forward(ctx, conv1.forward(ctx, x)));
  return relu(bn2.forward(ctx, conv2.forward(ctx, y)));
}

// ---------------------------------------------------------------------------
// Model

struct Model::Impl {
  // Residual variants.
  std::optional<ResNetEncoder> encoder;
  std::optional<DacBlock> dac;
  std::optional<RmpBlock> rmp;
  std::vector<DecoderBlock> decoders;  // dec4, dec3, dec2, dec1
  TransposedConvLayer head_deconv;
  ConvLayer head_conv2, head_conv3;

  // U-Net.
  std::vector<DoubleConv> unet_down;  // enc1..enc4, bottleneck
  std::vector<TransposedConvLayer> unet_up;
  std::vector<DoubleConv> unet_dec;
  ConvLayer unet_head;
};

Model::Model(ModelConfig cfg) : cfg_(cfg), impl_(std::make_unique<Impl>()) {
  cfg_.validate();
  Impl& m = *impl_;
  const std::size_t k = cfg_.num_classes;
  if (cfg_.variant == Variant::UNet) {
    const std::size_t base[5] = {64, 128, 256, 512, 1024};
    std::size_t ch[5];
    for (int i = 0; i < 5; ++i) ch[i] = cfg_.scaled(base[i]);
    std::size_t in_ch = cfg_.input_channels;
    for (int i = 0; i < 5; ++i) {
      const std::string name = i < 4 ? "unet.enc" + std::to_string(i + 1) : std::string("unet.bottleneck");
      m.unet_down.emplace_back(decls_, name, in_ch, ch[i]);
      in_ch = ch[i];
    }
    for (int i = 3; i >= 0; --i) {
      const std::string lvl = std::to_string(i + 1);
      m.unet_up.emplace_back(decls_, "unet.up" + lvl, transposed_conv_spec(ch[i + 1], ch[i], 2, 2), true);
      m.unet_dec.emplace_back(decls_, "unet.dec" + lvl, 2 * ch[i], ch[i]);
    }
    m.unet_head = ConvLayer(decls_, "unet.head", conv_spec(ch[0], k, 1), true);
    return;
  }

  m.encoder.emplace(decls_, cfg_);
  const auto& f = m.encoder->channels;
  if (cfg_.enable_dac) m.dac.emplace(decls_, "context.dac", f[3]);
  if (cfg_.enable_rmp) m.rmp.emplace(decls_, "context.rmp", f[3], true);
  const std::size_t ctx_ch = f[3] + (cfg_.enable_rmp ? 4 : 0);
  // The first decoder keeps the bottleneck width of the encoder output so
  // that RMP only adds its four input channels.
  if (f[3] < 4) throw ConfigError("decoder4 needs >= 4 input channels, got " + std::to_string(f[3]));
  m.decoders.emplace_back(decls_, "decoder.dec4", ctx_ch, f[2], f[3] / 4);
  m.decoders.emplace_back(decls_, "decoder.dec3", f[2], f[1]);
  m.decoders.emplace_back(decls_, "decoder.dec2", f[1], f[0]);
  m.decoders.emplace_back(decls_, "decoder.dec1", f[0], f[0]);
  const std::size_t hc = cfg_.scaled(32);
  m.head_deconv = TransposedConvLayer(decls_, "head.deconv1", transposed_conv_spec(f[0], hc, 4, 2, 1), true);
  m.head_conv2 = ConvLayer(decls_, "head.conv2", conv_spec(hc, hc, 3, 1, 1), true);
  m.head_conv3 = ConvLayer(decls_, "head.conv3", conv_spec(hc, k, 3, 1, 1), true);
}

Model::~Model() = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;

ParamStore Model::init_params(std::uint64_t seed) const {
  ParamStore store;
  for (const auto& d : decls_) {
    Tensor<float> t(d.shape);
    switch (d.kind) {
      case ParamKind::ConvWeight:
      case ParamKind::TransposedConvWeight: {
        Rng rng(derive_seed(seed, d.name));
        const double stddev = std::sqrt(2.0 / double(d.fan_in));
        for (auto& v : t.data()) v = float(stddev * rng.normal());
        break;
      }
      case ParamKind::BnGamma:
      case ParamKind::BnRunningVar: t.fill(1.0f); break;
      default: break;
    }
    store.add(d.name, std::move(t), d.kind);
  }
  return store;
}

void Model::validate(const ParamStore& store) const {
  for (const auto& d : decls_) {
    if (!store.contains(d.name)) {
      throw ConfigError("missing tensor '" + d.name + "': expected shape " + shape_str(d.shape) + ", found none");
    }
    const Shape& found = store.at(d.name).shape();
    if (found != d.shape) {
      throw ConfigError("tensor '" + d.name + "' has mismatched shape: expected " + shape_str(d.shape) + ", found " +
                        shape_str(found));
    }
  }
  if (store.size() != decls_.size()) {
    for (const auto& e : store.entries()) {
      bool known = false;
      for (const auto& d : decls_) known = known || d.name == e.name;
      if (!known) throw ConfigError("unexpected tensor '" + e.name + "' for this model configuration");
    }
  }
}

Var<float> Model::forward_logits(ForwardContext& ctx, const Var<float>& image) const {
  const Shape& s = image.shape();
  if (s.size() != 4 || s[1] != cfg_.input_channels) {
    throw DimensionError("model expects [N," + std::to_string(cfg_.input_channels) + ",H,W] input, got " +
                         shape_str(s));
  }
  if (s[2] % kInputDivisor || s[3] % kInputDivisor) {
    throw ContractError("input spatial size " + std::to_string(s[2]) + "x" + std::to_string(s[3]) +
                        " is not divisible by 32; pad the image with pad_to_32 first");
  }
  const Impl& m = *impl_;
  if (cfg_.variant == Variant::UNet) {
    std::vector<Var<float>> skips;
    Var<float> y = image;
    for (std::size_t i = 0; i < m.unet_down.size(); ++i) {
      if (i > 0) y = max_pool2d(y, pool_spec(2));
      y = m.unet_down[i].forward(ctx, y);
      ctx.trace(i < 4 ? "unet.enc" + std::to_string(i + 1) : std::string("unet.bottleneck"), y.shape());
      skips.push_back(y);
    }
    for (std::size_t j = 0; j < m.unet_up.size(); ++j) {
      const std::size_t level = 3 - j;
      y = m.unet_up[j].forward(ctx, y);
      y = concat_channels<float>({skips[level], y});
      y = m.unet_dec[j].forward(ctx, y);
      ctx.trace("unet.dec" + std::to_string(level + 1), y.shape());
    }
    y = m.unet_head.forward(ctx, y);
    ctx.trace("unet.head", y.shape());
    return y;
  }

  std::vector<Var<float>> e = m.encoder->forward(ctx, image);
  Var<float> c = e[3];
  if (m.dac) c = m.dac->forward(ctx, c);
  if (m.rmp) c = m.rmp->forward(ctx, c);
  Var<float> d = add(m.decoders[0].forward(ctx, c), e[2]);
  ctx.trace("decoder.dec4", d.shape());
  d = add(m.decoders[1].forward(ctx, d), e[1]);
  ctx.trace("decoder.dec3", d.shape());
  d = add(m.decoders[2].forward(ctx, d), e[0]);
  ctx.trace("decoder.dec2", d.shape());
  d = m.decoders[3].forward(ctx, d);
  ctx.trace("decoder.dec1", d.shape());
  Var<float> y = relu(m.head_deconv.forward(ctx, d));
  y = relu(m.head_conv2.forward(ctx, y));
  y = m.head_conv3.forward(ctx, y);
  ctx.trace("head", y.shape());
  return y;
}

Var<float> Model::forward(ForwardContext& ctx, const Var<float>& image) const {
  Var<float> logits = forward_logits(ctx, image);
  return cfg_.num_classes == 1 ? sigmoid(logits) : softmax_channels(logits);
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& d : decls_) {
    if (is_trainable(d.kind)) n += shape_numel(d.shape);
  }
  return n;
}

Tensor<float> predict(const Model& model, ParamStore& params, const Tensor<float>& image) {
  Tape<float> tape;
  ForwardContext ctx(tape, params, BnMode::Eval, false);
  return model.forward(ctx, tape.constant(image)).value();
}

void save_weights(const ParamStore& store, const std::filesystem::path& path) {
  std::vector<NamedTensor> tensors;
  tensors.reserve(store.size());
  for (const auto& e : store.entries()) tensors.push_back({e.name, e.value});
  write_tensor_file(path, tensors);
}

ParamStore load_weights(const Model& model, const std::filesystem::path& path) {
  std::vector<NamedTensor> tensors = read_tensor_file(path);
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < tensors.size(); ++i) by_name.emplace(tensors[i].name, i);
  ParamStore store;
  for (const auto& d : model.decls()) {
    auto it = by_name.find(d.name);
    if (it == by_name.end()) {
      throw ConfigError("weights file '" + path.string() + "' lacks tensor '" + d.name + "' (expected shape " +
                        shape_str(d.shape) + ")");
    }
    Tensor<float>& t = tensors[it->second].tensor;
    if (t.shape() != d.shape) {
      throw ConfigError("weights file '" + path.string() + "': tensor '" + d.name + "' expected shape " +
                        shape_str(d.shape) + ", found " + shape_str(t.shape()));
    }
    store.add(d.name, std::move(t), d.kind);
  }
  if (tensors.size() != model.decls().size()) {
    for (const auto& nt : tensors) {
      if (!store.contains(nt.name)) {
        throw ConfigError("weights file '" + path.string() + "' has unexpected tensor '" + nt.name + "'");
      }
    }
  }
  return store;
}

std::string model_summary(const Model& model, std::size_t height, std::size_t width) {
  const ModelConfig& cfg = model.config();
  ParamStore params = model.init_params(0);
  std::vector<std::pair<std::string, Shape>> trace;
  {
    Tape<float> tape;
    ForwardContext ctx(tape, params, BnMode::Eval, false);
    ctx.set_trace(&trace);
    Var<float> out = model.forward(ctx, tape.constant(Tensor<float>({1, cfg.input_channels, height, width})));
    trace.emplace_back("output", out.shape());
  }

  std::ostringstream os;
  os << "model: " << variant_name(cfg.variant) << " classes=" << cfg.num_classes
     << " width=" << cfg.width_multiplier << " dac=" << (cfg.enable_dac ? "on" : "off")
     << " rmp=" << (cfg.enable_rmp ? "on" : "off") << " input=[1," << cfg.input_channels << "," << height << ","
     << width << "]\n\n";
  os << "layer outputs:\n";
  for (const auto& [name, shape] : trace) os << "  " << std::left << std::setw(24) << name << shape_str(shape) << "\n";

  os << "\nparameters:\n";
  for (const auto& d : model.decls()) {
    if (!is_trainable(d.kind)) continue;
    os << "  " << std::left << std::setw(48) << d.name << std::setw(18) << shape_str(d.shape) << std::right
       << std::setw(10) << shape_numel(d.shape) << "\n";
  }
  std::size_t buffers = 0;
  for (const auto& d : model.decls()) {
    if (!is_trainable(d.kind)) buffers += shape_numel(d.shape);
  }
  os << "\ntrainable parameters: " << model.parameter_count() << "\n";
  os << "buffers (batch-norm statistics): " << buffers << "\n";
  return os.str();
}

}  // namespace cenet
