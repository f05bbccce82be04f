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

#include <functional>
#include <string>
#include <vector>

#include "cenet/autograd.hpp"

namespace cenet {

struct GradCheckReport {
  double max_rel_error = 0.0;
  bool pass = false;
  // Location of the worst coordinate: which input, which flat element.
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  // (input, element) pairs where either gradient was not finite.
  std::vector<std::pair<std::size_t, std::size_t>> non_finite;

  std::string describe() const;
};

using GradFunction = std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

/// Compares the tape gradient of a scalar function against central finite
/// differences, coordinate by coordinate over every input tensor.
///
/// relative error = |a - n| / max(|a|, |n|, 1e-8)
GradCheckReport grad_check(const GradFunction& fn, const std::vector<Tensor<double>>& points, double epsilon = 1e-5,
                           double tolerance = 1e-4);

}  // namespace cenet
