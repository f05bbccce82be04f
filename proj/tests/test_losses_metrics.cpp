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


#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cenet/gradcheck.hpp"
#include "cenet/losses.hpp"
#include "cenet/metrics.hpp"
#include "cenet/model.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cenet;
using cenet::testing::Gen;

namespace {

double dice_of(const Tensor<double>& p, const Tensor<double>& g, const Tensor<double>* valid = nullptr,
               ClassWeights w = ClassWeights::uniform(1)) {
  Tape<double> t;
  return dice_loss(t.constant(p), g, valid, w).value().item();
}

double ce_of(const Tensor<double>& p, const Tensor<double>& g, const Tensor<double>* valid = nullptr) {
  Tape<double> t;
  return cross_entropy_loss(t.constant(p), g, valid).value().item();
}

/// Random probabilities: sigmoid for K == 1, normalized per pixel otherwise.
Tensor<double> random_probs(Gen& g, std::size_t n, std::size_t k, std::size_t hw) {
  Tensor<double> p({n, k, 1, hw});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t i = 0; i < hw; ++i) {
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) total += p[(b * k + c) * hw + i] = g.real_in(0.01, 1.0);
      if (k > 1)
        for (std::size_t c = 0; c < k; ++c) p[(b * k + c) * hw + i] /= total;
    }
  return p;
}

}  // namespace

TEST_CASE("dice loss closed forms") {
  Tensor<double> g({1, 1, 4, 4});
  for (std::size_t i = 0; i < 8; ++i) g[i] = 1.0;
  CHECK(dice_of(g, g) <= 1e-6);
  CHECK(dice_of(Tensor<double>({1, 1, 4, 4}, 0.5), Tensor<double>({1, 1, 4, 4}, 1.0)) == doctest::Approx(0.2).epsilon(1e-6));
  Tensor<double> p({1, 1, 4, 4});
  for (std::size_t i = 8; i < 16; ++i) p[i] = 1.0;
  const double disjoint = dice_of(p, g);
  CHECK(disjoint < 1.0);
  CHECK(disjoint > 1.0 - 1e-6);
}

TEST_CASE("dice and cross entropy match scalar loops") {
  const auto failure = testing::for_all(60, 21, [](Gen& g, std::ostream& why) {
    const std::size_t n = g.size_in(1, 3), k = g.size_in(1, 4), hw = g.size_in(4, 40);
    auto p = random_probs(g, n, k, hw);
    std::vector<LabelMap> masks;
    for (std::size_t b = 0; b < n; ++b) {
      LabelMap m = g.labels(1, hw, k == 1 ? 2 : k);
      for (auto& v : m.labels)
        if (g.coin(0.1)) v = kIgnoreLabel;
      masks.push_back(m);
    }
    auto t = encode_targets<double>(masks, k);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& v : w) total += v = g.real_in(0.1, 1.0);
    for (auto& v : w) v /= total;
    const double want_dice =
        oracle::dice_loss(p.storage(), t.onehot.storage(), t.valid.storage(), n, k, hw, w, kDiceEps);
    const double want_ce = oracle::cross_entropy(p.storage(), t.onehot.storage(), t.valid.storage(), n, k, hw);
    const double got_dice = dice_of(p, t.onehot, &t.valid, ClassWeights{w});
    const double got_ce = ce_of(p, t.onehot, &t.valid);
    why << "dice " << got_dice << " vs " << want_dice << ", ce " << got_ce << " vs " << want_ce;
    return std::abs(got_dice - want_dice) <= 1e-6 && std::abs(got_ce - want_ce) <= 1e-6;
  });
  CHECK_MESSAGE(failure.empty(), failure);
}

TEST_CASE("ignored pixels do not move the losses") {
  Gen g(3);
  auto p = random_probs(g, 1, 1, 10);
  LabelMap a = g.labels(1, 10, 2), b = a;
  a.labels[3] = kIgnoreLabel;
  b.labels[3] = kIgnoreLabel;
  auto pa = p, pb = p;
  pb[3] = 0.999;
  auto ta = encode_targets<double>(std::span<const LabelMap>(&a, 1), 1);
  CHECK(dice_of(pa, ta.onehot, &ta.valid) == dice_of(pb, ta.onehot, &ta.valid));
  CHECK(ce_of(pa, ta.onehot, &ta.valid) == ce_of(pb, ta.onehot, &ta.valid));
}

TEST_CASE("cross entropy closed forms") {
  Tensor<double> onehot({1, 3, 2, 2});
  for (std::size_t i = 0; i < 4; ++i) onehot[(i % 3) * 4 + i] = 1.0;
  CHECK(ce_of(onehot, onehot) <= 1e-6);
  Tensor<double> g2({1, 2, 2, 2});
  for (std::size_t i = 0; i < 4; ++i) g2[i] = 1.0;
  CHECK(ce_of(Tensor<double>({1, 2, 2, 2}, 0.5), g2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("dice and cross entropy pass finite differences against a constant target") {
  Gen g(4);
  LabelMap m = g.labels(3, 3, 2);
  auto t = encode_targets<double>(std::span<const LabelMap>(&m, 1), 1);
  auto dice = [&](Tape<double>&, const std::vector<Var<double>>& in) {
    return dice_loss(sigmoid(in[0]), t.onehot, &t.valid, ClassWeights::uniform(1));
  };
  auto ce = [&](Tape<double>&, const std::vector<Var<double>>& in) {
    return cross_entropy_loss(sigmoid(in[0]), t.onehot, &t.valid);
  };
  CHECK(grad_check(dice, {g.tensor<double>({1, 1, 3, 3})}, 1e-5, 1e-4).pass);
  CHECK(grad_check(ce, {g.tensor<double>({1, 1, 3, 3})}, 1e-5, 1e-4).pass);
}

TEST_CASE("class weights must be a distribution") {
  const ClassWeights ok{{0.25, 0.75}}, over{{0.5, 0.6}}, short_list{{1.0}};
  CHECK_NOTHROW(ok.validate(2));
  CHECK_THROWS_AS(over.validate(2), ContractError);
  CHECK_THROWS_AS(short_list.validate(2), ContractError);
}

TEST_CASE("encode_targets validates labels") {
  LabelMap m(1, 2);
  m.labels = {0, 2};
  CHECK_THROWS_AS(encode_targets<double>(std::span<const LabelMap>(&m, 1), 1), DataError);
  CHECK_NOTHROW(encode_targets<double>(std::span<const LabelMap>(&m, 1), 3));
}

TEST_CASE("weight regularization") {
  ParamStore s;
  s.add("w", Tensor<float>({2}, {3.0f, 4.0f}), ParamKind::ConvWeight);
  s.add("bn.gamma", Tensor<float>({2}, 10.0f), ParamKind::BnGamma);
  s.add("b", Tensor<float>({2}, 10.0f), ParamKind::Bias);
  CHECK(weight_regularization(s, 2e-4) == doctest::Approx(2.5e-3).epsilon(1e-12));
  CHECK(weight_regularization(s, 0.0) == 0.0);

  Gen g(5);
  Tape<float> t;
  auto probs = t.constant(g.tensor<float>({1, 1, 4, 4}, 0.0, 1.0));
  auto target = Tensor<float>({1, 1, 4, 4}, 1.0f);
  auto data = dice_loss(probs, target, static_cast<const Tensor<float>*>(nullptr), ClassWeights::uniform(1));
  CHECK(total_loss(data, s, 0.0).loss.value().item() == data.value().item());
  auto tl = total_loss(data, s, 2e-4);
  CHECK(tl.reg >= 0.0);
  CHECK(tl.loss.value().item() == doctest::Approx(data.value().item() + 2.5e-3));
}

TEST_CASE("overlap error, dice, sensitivity, accuracy") {
  std::vector<std::uint8_t> a(200, 0), b(200, 0);
  CHECK(overlap_error(a, b) == 0.0);
  for (std::size_t i = 0; i < 75; ++i) a[i] = 1;
  for (std::size_t i = 25; i < 100; ++i) b[i] = 1;
  CHECK(overlap_error(a, b) == 0.5);
  CHECK(overlap_error(a, a) == 0.0);
  std::vector<std::uint8_t> c(200, 0);
  for (std::size_t i = 150; i < 160; ++i) c[i] = 1;
  CHECK(overlap_error(a, c) == 1.0);
  CHECK(dice_coefficient(a, a) == 1.0);

  auto same = sen_acc(a, a);
  CHECK(same.sensitivity == 1.0);
  CHECK(same.accuracy == 1.0);
  std::vector<std::uint8_t> zero(100, 0), half(100, 0);
  for (std::size_t i = 0; i < 50; ++i) half[i] = 1;
  auto r = sen_acc(zero, half);
  CHECK(r.sensitivity == 0.0);
  CHECK(r.accuracy == 0.5);
}

TEST_CASE("metrics equal the counting oracle on random 32x32 pairs") {
  const auto failure = testing::for_all(100, 31, [](Gen& g, std::ostream& why) {
    auto pred = g.binary_mask(1024, g.real_in(0.05, 0.95));
    auto gt = g.binary_mask(1024, g.real_in(0.05, 0.95));
    for (auto& v : gt)
      if (g.coin(0.05)) v = kIgnoreLabel;
    const auto c = oracle::count(pred, gt);
    const double e = 1.0 - double(c.tp) / double(c.tp + c.fp + c.fn);
    const double sen = double(c.tp) / double(c.tp + c.fn);
    const double acc = double(c.tp + c.tn) / double(c.tp + c.tn + c.fp + c.fn);
    const auto got = sen_acc(pred, gt);
    const auto cc = confusion(pred, gt);
    why << "E " << overlap_error(pred, gt) << " vs " << e;
    return cc.tp == c.tp && cc.fp == c.fp && cc.fn == c.fn && cc.tn == c.tn && overlap_error(pred, gt) == e &&
           got.sensitivity == sen && got.accuracy == acc;
  });
  CHECK_MESSAGE(failure.empty(), failure);
}

TEST_CASE("AUC") {
  std::vector<std::uint8_t> gt{1, 1, 0, 0};
  CHECK(auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, gt) == 1.0);
  CHECK(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, gt) == 0.5);
  CHECK(auc(std::vector<double>{0.9, 0.4, 0.5, 0.1}, gt) == 0.75);
  CHECK(auc(std::vector<float>{0.9f, 0.4f, 0.5f, 0.1f}, gt) == 0.75);
  const std::vector<double> two{0.1, 0.2}, bad{NAN, 0.2};
  const std::vector<std::uint8_t> positives{1, 1}, mixed{1, 0};
  CHECK_THROWS_AS(auc(two, positives), ContractError);
  CHECK_THROWS_AS(auc(bad, mixed), NumericError);

  const auto failure = testing::for_all(40, 41, [](Gen& g, std::ostream& why) {
    const std::size_t n = g.size_in(2, 1000);
    std::vector<double> s(n);
    std::vector<std::uint8_t> lab(n);
    // Coarse scores force plenty of ties.
    for (std::size_t i = 0; i < n; ++i) s[i] = double(g.int_in(0, 20)) / 20.0, lab[i] = g.coin() ? 1 : 0;
    lab[0] = 1, lab[1] = 0;
    const double want = oracle::pairwise_auc(s, lab), got = auc(s, lab);
    why << got << " vs " << want << " (n=" << n << ")";
    return std::abs(got - want) <= 1e-9;
  });
  CHECK_MESSAGE(failure.empty(), failure);
}

TEST_CASE("layer boundaries") {
  LabelMap m(8, 5);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 5; ++c) m.at(r, c) = std::uint8_t(r < 2 ? 0 : (r < 5 ? 1 : 2));
  auto b = extract_boundaries(m, 2);
  CHECK(b.rows == std::vector<std::vector<double>>{std::vector<double>(5, 2.0), std::vector<double>(5, 5.0)});
  auto rep = boundary_mae(m, b.rows);
  CHECK(rep.mae == std::vector<double>{0.0, 0.0});

  auto shifted = b.rows;
  for (auto& v : shifted[1]) v += 2.0;
  rep = boundary_mae(m, shifted);
  CHECK(rep.mae == std::vector<double>{0.0, 2.0});

  const auto failure = testing::for_all(50, 51, [](Gen& g, std::ostream& why) {
    const std::size_t h = g.size_in(2, 20), w = g.size_in(1, 12), count = g.size_in(1, 4);
    LabelMap lm(h, w);
    for (std::size_t c = 0; c < w; ++c) {
      std::uint8_t level = 0;
      for (std::size_t r = 0; r < h; ++r) {
        if (g.coin(0.25) && level < count) ++level;
        // Occasional dips test the running max.
        lm.at(r, c) = (level > 0 && g.coin(0.1)) ? std::uint8_t(level - 1) : level;
      }
    }
    const auto got = extract_boundaries(lm, count).rows, want = oracle::column_scan(lm, count);
    why << "h=" << h << " w=" << w;
    return got == want;
  });
  CHECK_MESSAGE(failure.empty(), failure);
}

TEST_CASE("mean, sample std, and CSV formatting") {
  auto ms = mean_std(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == 2.5);
  CHECK(ms.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std(std::vector<double>{7.0}).std == 0.0);
  std::ostringstream os;
  write_metrics_csv(os, {{"img_01", "overlap_error", 0.1234567}, {"mean", "auc", 1.0}});
  CHECK(os.str() == "image_id,metric_name,value\nimg_01,overlap_error,0.123457\nmean,auc,1.000000\n");
}
