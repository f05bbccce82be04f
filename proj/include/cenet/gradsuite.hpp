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
#include <string>
#include <vector>

#include "cenet/gradcheck.hpp"

namespace cenet {

struct OpGradCheck {
  std::string op;
  GradCheckReport report;
};

/// Finite-difference check of every differentiable op in double precision
/// on seeded random inputs.
std::vector<OpGradCheck> run_gradient_suite(std::uint64_t seed = 0, double tolerance = 1e-4);

}  // namespace cenet
