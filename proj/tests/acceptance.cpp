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


// Acceptance suite: one PASS/FAIL line per criterion, details indented
// below. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cenet/data.hpp"
#include "cenet/gradsuite.hpp"
#include "cenet/losses.hpp"
#include "cenet/metrics.hpp"
#include "cenet/rf.hpp"
#include "cenet/trainer.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cenet;
using cenet::testing::Gen;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void note(const std::string& s) { details.push_back(s); }
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const Var<double>* const kNoBias = nullptr;

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = run_gradient_suite(0, 1e-4);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  std::set<std::string> names;
  for (const auto& r : results) {
    names.insert(r.op);
    worst = std::max(worst, r.report.max_rel_error);
    if (!r.report.pass) o.require(false, r.op + ": " + r.report.describe());
  }
  o.require(std::all_of(results.begin(), results.end(), [](const OpGradCheck& r) { return r.report.pass; }),
            std::to_string(results.size()) + " ops within 1e-4, worst " + fmt("%.3g", worst));
  for (const char* needed : {"add", "mul", "relu", "sigmoid", "exp", "log", "reduce_sum", "reduce_max", "matmul",
                             "conv2d", "conv2d_dilation3", "conv2d_dilation5", "transposed_conv2d", "max_pool2d",
                             "bilinear_upsample", "batch_norm_train", "softmax_channels", "dice_loss",
                             "cross_entropy_binary", "cross_entropy_multiclass"}) {
    if (!names.count(needed)) o.require(false, std::string("missing op ") + needed);
  }
  o.require(elapsed < 120.0, fmt("runtime %.2f s (limit 120 s)", elapsed));
  return o;
}

// ---------------------------------------------------------------------------

/// Row extent of the input-gradient support of the centre output pixel
/// when only DAC branch `active` carries (positive) weights.
std::size_t dac_branch_support(std::size_t active) {
  DeclList decls;
  DacBlock dac(decls, "dac", 1);
  ParamStore store;
  Gen g(active + 1);
  for (const auto& d : decls) {
    Tensor<float> t(d.shape);
    const bool on = d.name.rfind("dac.branch" + std::to_string(active + 1) + ".", 0) == 0;
    if (on && d.kind == ParamKind::ConvWeight)
      for (auto& v : t.data()) v = float(g.real_in(0.1, 1.0));
    store.add(d.name, std::move(t), d.kind);
  }
  const std::size_t n = 41, centre = n / 2;
  Tape<float> tape;
  ForwardContext ctx(tape, store, BnMode::Eval, false);
  auto x = tape.leaf(g.tensor<float>({1, 1, n, n}, 0.5, 1.0));
  auto y = dac.forward(ctx, x);
  Tensor<float> pick({1, 1, n, n});
  pick.at(0, 0, centre, centre) = 1.0f;
  tape.backward(sum_all(mul(y, tape.constant(pick))));
  std::size_t lo = n, hi = 0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (x.grad().at(0, 0, r, c) != 0.0f) lo = std::min(lo, r), hi = std::max(hi, r);
  return hi >= lo ? hi - lo + 1 : 0;
}

Outcome receptive_fields() {
  Outcome o;
  const auto fields = dac_branch_fields();
  std::vector<std::size_t> reported;
  for (const auto& f : fields) reported.push_back(f.analytic.rf);
  o.require(reported == std::vector<std::size_t>{3, 7, 9, 19}, "rf-report branch fields 3, 7, 9, 19");

  DeclList decls;
  DacBlock dac(decls, "dac", 1);
  const auto chains = dac.branch_chains();
  for (std::size_t b = 0; b < fields.size() && b < chains.size(); ++b) {
    std::vector<std::array<std::size_t, 4>> geo;
    for (const auto& layer : chains[b]) {
      const auto& s = std::get<ConvSpec>(layer);
      geo.push_back({s.kernel[0], s.stride[0], s.padding[0], s.dilation});
    }
    const std::size_t brute = dac_branch_support(b), sets = oracle::influence_set_extent(geo);
    std::ostringstream os;
    os << fields[b].name << ": reported " << fields[b].analytic.rf << ", measured " << fields[b].measured
       << ", gradient support of the live block " << brute << ", set propagation " << sets;
    o.require(fields[b].analytic.rf == fields[b].measured && brute == fields[b].analytic.rf &&
                  sets == fields[b].analytic.rf,
              os.str());
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome dilated_conv() {
  Outcome o;
  Gen g(2024);
  std::size_t combos = 0, mismatches = 0, standard = 0, standard_bad = 0;
  std::set<std::size_t> rates;
  for (int i = 0; i < 240; ++i) {
    const std::size_t k = g.size_in(1, 3) * 2 - 1 + (g.coin(0.2) ? 1 : 0);
    const std::size_t rate = g.size_in(1, 6), stride = g.size_in(1, 3), pad = g.size_in(0, 6);
    const std::size_t span = (k - 1) * rate + 1;
    const std::size_t h = std::max<std::size_t>(1, span + g.size_in(0, 8) - std::min(span, 2 * pad));
    const std::size_t w = std::max<std::size_t>(1, span + g.size_in(0, 8) - std::min(span, 2 * pad));
    if (h + 2 * pad < span || w + 2 * pad < span) continue;
    const std::size_t n = g.size_in(1, 2), cin = g.size_in(1, 3), cout = g.size_in(1, 3);
    auto x = g.integer_tensor<double>({n, cin, h, w}, -3, 3);
    auto wt = g.integer_tensor<double>({cout, cin, k, k}, -3, 3);
    auto b = g.integer_tensor<double>({cout}, -3, 3);
    Tape<double> t;
    auto bv = t.leaf(b);
    auto y = conv2d(t.leaf(x), t.leaf(wt), &bv, conv_spec(cin, cout, k, stride, pad, rate)).value();
    ++combos;
    rates.insert(rate);
    if (!(y == oracle::dilated_correlation(x, wt, &b, stride, stride, pad, pad, rate))) ++mismatches;
    if (rate == 1 && stride == 1) {
      ++standard;
      auto plain = conv2d(t.leaf(x), t.leaf(wt), kNoBias, conv_spec(cin, cout, k, 1, pad, 1)).value();
      if (!(plain == oracle::standard_correlation(x, wt, pad))) ++standard_bad;
    }
  }
  // Dedicated rate-1 sweep against the textbook formula.
  for (int i = 0; i < 60; ++i) {
    const std::size_t k = g.size_in(1, 5), pad = g.size_in(0, 2), h = k + g.size_in(0, 6), w = k + g.size_in(0, 6);
    auto x = g.integer_tensor<double>({1, 2, h, w}, -3, 3);
    auto wt = g.integer_tensor<double>({2, 2, k, k}, -3, 3);
    Tape<double> t;
    auto plain = conv2d(t.leaf(x), t.leaf(wt), kNoBias, conv_spec(2, 2, k, 1, pad, 1)).value();
    ++standard;
    if (!(plain == oracle::standard_correlation(x, wt, pad))) ++standard_bad;
  }
  o.require(combos >= 200 && mismatches == 0,
            std::to_string(combos) + " shape/rate combinations (rates 1-6), " + std::to_string(mismatches) +
                " mismatches against the nested-loop correlation");
  o.require(standard_bad == 0, std::to_string(standard) + " rate-1 cases equal standard convolution exactly");
  return o;
}

// ---------------------------------------------------------------------------

Outcome shape_contract() {
  Outcome o;
  Gen g(77);
  std::size_t cases = 0, bad = 0;
  double worst_sum = 0.0;
  for (Variant v : {Variant::UNet, Variant::Backbone, Variant::CeNet})
    for (std::size_t k : {1, 3})
      for (std::size_t s : {64, 96, 160}) {
        Model m(ModelConfig::of(v, k, 0.25));
        auto p = m.init_params(cases);
        Tape<float> tape;
        ForwardContext ctx(tape, p, BnMode::Eval, false);
        std::vector<std::pair<std::string, Shape>> trace;
        ctx.set_trace(&trace);
        auto y = m.forward(ctx, tape.constant(g.tensor<float>({2, 3, s, s}, 0.0, 1.0))).value();
        ++cases;
        bool ok = y.shape() == Shape{2, k, s, s};
        for (float q : y.data()) ok = ok && q >= 0.0f && q <= 1.0f;
        if (k == 3 && ok)
          for (std::size_t n = 0; n < 2; ++n)
            for (std::size_t i = 0; i < s * s; ++i) {
              double sum = 0.0;
              for (std::size_t c = 0; c < 3; ++c) sum += y[(n * 3 + c) * s * s + i];
              worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
            }
        if (v == Variant::CeNet) {
          Shape before, after;
          for (const auto& [name, shape] : trace) {
            if (name == "context.dac") before = shape;
            if (name == "context.rmp") after = shape;
          }
          const bool plus4 = before.size() == 4 && after.size() == 4 && after[1] == before[1] + 4;
          if (!plus4) o.require(false, "RMP channel growth at size " + std::to_string(s));
          ok = ok && plus4;
        }
        if (!ok) {
          ++bad;
          o.require(false, std::string(variant_name(v)) + " K=" + std::to_string(k) + " size " + std::to_string(s));
        }
      }
  o.require(bad == 0, std::to_string(cases) + " variant/K/size cases give [N,K,H,W] in [0,1]");
  o.require(worst_sum <= 1e-5, fmt("K=3 per-pixel sums within %.2g of 1", worst_sum));
  o.note("RMP adds exactly 4 channels before the decoder in every CE-Net case");
  return o;
}

// ---------------------------------------------------------------------------

Outcome loss_oracles() {
  Outcome o;
  double worst_dice = 0.0, worst_ce = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    Gen g(derive_seed(99, {i}));
    const std::size_t n = g.size_in(1, 2), k = g.size_in(1, 3), h = g.size_in(2, 12), w = g.size_in(2, 12);
    const std::size_t hw = h * w;
    Tensor<double> p({n, k, h, w});
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t j = 0; j < hw; ++j) {
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) total += p[(b * k + c) * hw + j] = g.real_in(0.01, 1.0);
        if (k > 1)
          for (std::size_t c = 0; c < k; ++c) p[(b * k + c) * hw + j] /= total;
      }
    std::vector<LabelMap> masks;
    for (std::size_t b = 0; b < n; ++b) {
      auto m = g.labels(h, w, k == 1 ? 2 : k);
      for (auto& v : m.labels)
        if (g.coin(0.05)) v = kIgnoreLabel;
      masks.push_back(m);
    }
    auto t = encode_targets<double>(masks, k);
    const auto weights = ClassWeights::uniform(k);
    Tape<double> tape;
    const double dice = dice_loss(tape.constant(p), t.onehot, &t.valid, weights).value().item();
    const double ce = cross_entropy_loss(tape.constant(p), t.onehot, &t.valid).value().item();
    worst_dice = std::max(worst_dice, std::abs(dice - oracle::dice_loss(p.storage(), t.onehot.storage(),
                                                                        t.valid.storage(), n, k, hw,
                                                                        weights.weights, kDiceEps)));
    worst_ce = std::max(worst_ce, std::abs(ce - oracle::cross_entropy(p.storage(), t.onehot.storage(),
                                                                      t.valid.storage(), n, k, hw)));
  }
  o.require(worst_dice <= 1e-6, fmt("dice loss vs scalar loop over 100 cases: worst %.2g", worst_dice));
  o.require(worst_ce <= 1e-6, fmt("cross entropy vs scalar loop over 100 cases: worst %.2g", worst_ce));

  Tape<double> tape;
  const auto half = Tensor<double>({1, 1, 16, 16}, 0.5), ones = Tensor<double>({1, 1, 16, 16}, 1.0);
  const double closed = dice_loss(tape.constant(half), ones, static_cast<const Tensor<double>*>(nullptr), ClassWeights::uniform(1)).value().item();
  o.require(std::abs(closed - 0.2) <= 1e-6, fmt("dice_loss(p=0.5, g=1) = %.9f", closed));

  std::size_t metric_bad = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    Gen g(derive_seed(100, {i}));
    auto pred = g.binary_mask(1024, g.real_in(0.1, 0.9)), gt = g.binary_mask(1024, g.real_in(0.1, 0.9));
    const auto c = oracle::count(pred, gt);
    const auto sa = sen_acc(pred, gt);
    const bool ok = overlap_error(pred, gt) == 1.0 - double(c.tp) / double(c.tp + c.fp + c.fn) &&
                    sa.sensitivity == double(c.tp) / double(c.tp + c.fn) &&
                    sa.accuracy == double(c.tp + c.tn) / 1024.0;
    metric_bad += !ok;
  }
  o.require(metric_bad == 0, "E, Sen, Acc equal the confusion-count oracle exactly on 100 random 32x32 pairs");

  double worst_auc = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    Gen g(derive_seed(101, {i}));
    const std::size_t n = g.size_in(2, 1000);
    std::vector<double> s(n);
    std::vector<std::uint8_t> lab(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = g.coin() ? double(g.int_in(0, 10)) / 10.0 : g.real_in(0.0, 1.0);
      lab[j] = g.coin(0.4) ? 1 : 0;
    }
    lab[0] = 1, lab[1] = 0;
    worst_auc = std::max(worst_auc, std::abs(auc(s, lab) - oracle::pairwise_auc(s, lab)));
  }
  o.require(worst_auc <= 1e-9, fmt("AUC vs pair counting on 50 inputs of up to 1000 pixels: worst %.2g", worst_auc));
  return o;
}

// ---------------------------------------------------------------------------

Outcome training_recipe() {
  Outcome o;
  const TrainConfig defaults;
  o.require(poly_lr(0, 5000, defaults.base_lr, defaults.poly_power) == 4e-3, "poly_lr(0) == 4e-3 exactly");
  o.require(poly_lr(5000, 5000, defaults.base_lr, defaults.poly_power) == 0.0, "poly_lr(max) == 0 exactly");

  ParamStore p;
  p.add("w", Tensor<float>({1}, 0.0f), ParamKind::ConvWeight);
  auto state = OptimizerState::zeros_like(p);
  const std::map<std::string, Tensor<float>> g{{"w", Tensor<float>({1}, 1.0f)}};
  sgd_step(p, g, state, 1.0, 0.9, 0.0);
  const float first = p.at("w")[0];
  sgd_step(p, g, state, 1.0, 0.9, 0.0);
  const float second = p.at("w")[0];
  o.require(first == -1.0f && second == -2.9f,
            fmt("sgd hand iteration (mu 0.9, g 1, lr 1): %.9g then %.9g", first, second));

  Model model(ModelConfig::of(Variant::CeNet, 1, 0.25));
  const auto data = make_synthetic({8, 64, 11, false});
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_epochs = 5;  // 10 iterations
  cfg.seed = 21;
  auto a = init_train_state(model, cfg), b = init_train_state(model, cfg);
  train(model, data, cfg, a);
  train(model, data, cfg, b);
  o.require(a.iter == 10 && a.history == b.history && a.params == b.params,
            "two 10-iteration runs with one seed give bit-identical history and weights");

  const auto dir = std::filesystem::temp_directory_path() / "cenet_acceptance_resume";
  std::filesystem::remove_all(dir);
  TrainOptions opts;
  opts.checkpoint_dir = dir;
  opts.stop_after = 5;
  auto split = init_train_state(model, cfg);
  train(model, data, cfg, split, opts);
  auto resumed = load_checkpoint(dir, model);
  train(model, data, cfg, resumed);
  o.require(split.iter == 5 && resumed.history == a.history && resumed.params == a.params &&
                resumed.optimizer == a.optimizer,
            "5 iterations + checkpoint + 5 resumed iterations equal the straight 10-iteration run bit-exactly");
  return o;
}

// ---------------------------------------------------------------------------

double last_epoch_loss(const TrainState& s, std::size_t per_epoch) {
  double sum = 0.0;
  for (std::size_t i = s.history.size() - per_epoch; i < s.history.size(); ++i) sum += s.history[i].data_loss;
  return sum / double(per_epoch);
}

Outcome convergence() {
  Outcome o;
  {
    const auto t0 = std::chrono::steady_clock::now();
    Model model(ModelConfig::of(Variant::CeNet, 1, 0.25));
    const auto data = make_synthetic({8, 64, 0, false});
    TrainConfig cfg;
    cfg.base_lr = 0.03;
    cfg.batch_size = 8;
    cfg.max_epochs = 200;  // one batch per epoch: 200 iterations
    cfg.augment = false;
    auto state = init_train_state(model, cfg);
    train(model, data, cfg, state);
    const auto report = evaluate(model, state.params, data);
    const double dice = report.summary.at("soft_dice").mean, err = report.summary.at("overlap_error").mean;
    const double elapsed = seconds_since(t0);
    o.note("width-0.25 CE-Net, 8 disc images at 64x64, dice loss, 200 iterations, batch 8, base lr 0.03");
    o.require(dice >= 0.95, fmt("training-set soft Dice %.4f (need >= 0.95)", dice));
    o.require(err <= 0.05, fmt("training-set overlap error %.4f (need <= 0.05)", err));
    o.require(elapsed <= 600.0, fmt("runtime %.1f s (limit 600 s)", elapsed));
  }
  {
    const std::size_t seeds = 5;
    double cenet_sum = 0.0, backbone_sum = 0.0;
    std::ostringstream per_seed;
    for (std::size_t seed = 0; seed < seeds; ++seed) {
      const auto data = make_synthetic({16, 64, seed, true});
      TrainConfig cfg;
      cfg.base_lr = 0.03;
      cfg.batch_size = 8;
      cfg.max_epochs = 50;  // 100 iterations
      cfg.augment = false;
      cfg.seed = seed;
      double finals[2];
      int slot = 0;
      for (Variant v : {Variant::CeNet, Variant::Backbone}) {
        Model model(ModelConfig::of(v, 1, 0.25));
        auto state = init_train_state(model, cfg);
        train(model, data, cfg, state);
        finals[slot++] = last_epoch_loss(state, 2);
      }
      cenet_sum += finals[0];
      backbone_sum += finals[1];
      per_seed << " " << fmt("%.5f/%.5f", finals[0], finals[1]);
    }
    o.note("multi-scale discs (radii 2-20 px), 16 images at 64x64, 100 iterations, 5 seeds");
    o.note("per-seed final loss cenet/backbone:" + per_seed.str());
    const double c = cenet_sum / seeds, b = backbone_sum / seeds;
    o.require(c <= b, fmt("mean final loss cenet %.5f vs backbone %.5f (need cenet <= backbone)", c, b));
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome tta_contract() {
  Outcome o;
  Model model(ModelConfig::of(Variant::CeNet, 1, 0.25));
  auto params = model.init_params(8);
  Gen g(8);
  const auto x = g.tensor<float>({1, 3, 64, 64}, 0.0, 1.0);
  const auto base = tta_predict(model, params, x);
  double worst = 0.0;
  for (const auto& e : D4::all()) {
    const auto lhs = tta_predict(model, params, d4_apply(x, e)), rhs = d4_apply(base, e);
    for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, double(std::abs(lhs[i] - rhs[i])));
  }
  o.require(worst <= 1e-5, fmt("TTA(g x) vs g TTA(x) over all 8 elements: worst %.2g", worst));

  Sample s{"m", g.tensor<float>({3, 5, 5}, 0.0, 1.0), g.labels(5, 5, 2)};
  const auto eight = flip_expand_8x(s);
  std::set<std::vector<float>> orbit;
  for (const auto& e : eight) orbit.insert(e.image.storage());
  bool closed = eight.size() == 8 && orbit.size() == 8;
  for (const auto& a : D4::all()) {
    std::set<std::vector<float>> moved;
    for (const auto& e : eight) moved.insert(d4_apply(e.image, a).storage());
    closed = closed && moved == orbit;
    for (const auto& b : D4::all())
      closed = closed && d4_apply(d4_apply(s.image, b), a) == d4_apply(s.image, a * b);
    closed = closed && d4_apply(d4_apply(s.image, a), a.inverse()) == s.image;
  }
  o.require(closed, "flip_expand_8x gives 8 distinct views, closed under D4, composition and inverses exact");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient suite", gradient_suite},
      {"receptive fields of the DAC branches", receptive_fields},
      {"dilated convolution oracle", dilated_conv},
      {"architecture shape contract", shape_contract},
      {"loss and metric oracles", loss_oracles},
      {"training recipe", training_recipe},
      {"convergence and ablation direction", convergence},
      {"test-time augmentation contract", tta_contract},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    std::printf("%s  %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, seconds_since(t0));
    for (const auto& d : o.details) std::printf("        %s\n", d.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
