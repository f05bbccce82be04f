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

#include "cenet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cenet {

std::string GradCheckReport::describe() const {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << "max_rel_error=" << max_rel_error << " at input " << worst_input << "[" << worst_index
     << "] (analytic " << analytic << ", numeric " << numeric << ")";
  if (!non_finite.empty()) {
    os << "; non-finite gradient at";
    for (std::size_t i = 0; i < std::min<std::size_t>(non_finite.size(), 8); ++i) {
      os << " " << non_finite[i].first << "[" << non_finite[i].second << "]";
    }
    if (non_finite.size() > 8) os << " ...";
  }
  return os.str();
}

namespace {

double evaluate(const GradFunction& fn, const std::vector<Tensor<double>>& points) {
  Tape<double> tape;
  std::vector<Var<double>> vars;
  vars.reserve(points.size());
  for (const auto& p : points) vars.push_back(tape.constant(p));
  return fn(tape, vars).value().item();
}

}  // namespace

GradCheckReport grad_check(const GradFunction& fn, const std::vector<Tensor<double>>& points, double epsilon,
                           double tolerance) {
  std::vector<Tensor<double>> analytic;
  {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (const auto& p : points) vars.push_back(tape.leaf(p, true));
    Var<double> root = fn(tape, vars);
    tape.backward(root);
    for (const auto& v : vars) analytic.push_back(v.grad());
  }

  GradCheckReport report;
  std::vector<Tensor<double>> probe = points;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (std::size_t i = 0; i < probe[k].size(); ++i) {
      const double x0 = probe[k][i];
      probe[k][i] = x0 + epsilon;
      const double fp = evaluate(fn, probe);
      probe[k][i] = x0 - epsilon;
      const double fm = evaluate(fn, probe);
      probe[k][i] = x0;

      const double num = (fp - fm) / (2.0 * epsilon);
      const double ana = analytic[k][i];
      if (!std::isfinite(num) || !std::isfinite(ana)) {
        report.non_finite.emplace_back(k, i);
        continue;
      }
      const double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-8});
      if (rel > report.max_rel_error || (k == 0 && i == 0)) {
        report.max_rel_error = rel;
        report.worst_input = k;
        report.worst_index = i;
        report.analytic = ana;
        report.numeric = num;
      }
    }
  }
  report.pass = report.non_finite.empty() && report.max_rel_error <= tolerance;
  return report;
}

}  // namespace cenet
