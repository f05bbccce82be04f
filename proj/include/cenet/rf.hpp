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

#include <string>
#include <vector>

#include "cenet/model.hpp"
#include "cenet/nn.hpp"

namespace cenet {

/// Measured receptive field of a geometry chain: every layer becomes a
/// one-channel all-ones convolution (pools keep their window), and the
/// extent of the input-gradient support of the centre output is returned.
std::size_t influence_extent(const std::vector<RfLayer>& chain);

struct RfEntry {
  std::string name;
  ReceptiveField analytic;
  std::size_t measured = 0;  // 0 when not measured
};

/// The four DAC branches, analytic and measured.
std::vector<RfEntry> dac_branch_fields();
/// Main-path receptive field and stride after the stem and each stage.
std::vector<RfEntry> encoder_stage_fields();

}  // namespace cenet
