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


#include "cenet/rf.hpp"

#include <algorithm>

namespace cenet {

namespace {

ConvSpec as_ones_conv(const RfLayer& layer) {
  if (const auto* c = std::get_if<ConvSpec>(&layer)) {
    ConvSpec s = *c;
    s.in_channels = s.out_channels = 1;
    return s;
  }
  const PoolSpec& p = std::get<PoolSpec>(layer);
  ConvSpec s;
  s.kernel = p.kernel;
  s.stride = p.stride;
  s.padding = p.padding;
  return s;
}

}  // namespace

std::size_t influence_extent(const std::vector<RfLayer>& chain) {
  const ReceptiveField rf = receptive_field(chain);
  // Wide enough that the centre output never sees padding.
  std::size_t n = 2 * rf.rf + 4 * rf.jump + 1;
  Tape<double> tape;
  Var<double> x = tape.leaf(Tensor<double>({1, 1, n, n}, 1.0));
  Var<double> y = x;
  for (const auto& layer : chain) {
    const ConvSpec s = as_ones_conv(layer);
    Var<double> w = tape.constant(Tensor<double>({1, 1, s.kernel[0], s.kernel[1]}, 1.0));
    y = conv2d<double>(y, w, nullptr, s);
  }
  const std::size_t oh = y.shape()[2], ow = y.shape()[3];
  Var<double> centre = slice(slice(y, 2, oh / 2, 1), 3, ow / 2, 1);
  tape.backward(sum_all(centre));
  const Tensor<double>& g = x.grad();
  std::size_t lo = n, hi = 0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (g[r * n + c] != 0.0) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
  }
  return lo > hi ? 0 : hi - lo + 1;
}

std::vector<RfEntry> dac_branch_fields() {
  DeclList decls;
  const DacBlock dac(decls, "dac", 1);
  std::vector<RfEntry> out;
  const auto chains = dac.branch_chains();
  for (std::size_t b = 0; b < chains.size(); ++b) {
    out.push_back({"branch" + std::to_string(b + 1), receptive_field(chains[b]), influence_extent(chains[b])});
  }
  return out;
}

std::vector<RfEntry> encoder_stage_fields() {
  DeclList decls;
  const ResNetEncoder enc(decls, ModelConfig::of(Variant::Backbone));
  std::vector<RfLayer> chain{enc.stem_conv.spec, enc.stem_pool};
  std::vector<RfEntry> out{{"stem", receptive_field(chain), 0}};
  for (std::size_t s = 0; s < enc.stages.size(); ++s) {
    for (const auto& block : enc.stages[s]) {
      chain.emplace_back(block.conv1.spec);
      chain.emplace_back(block.conv2.spec);
    }
    out.push_back({"stage" + std::to_string(s + 1), receptive_field(chain), 0});
  }
  return out;
}

}  // namespace cenet
