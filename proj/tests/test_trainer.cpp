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
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "cenet/serialize.hpp"
#include "cenet/trainer.hpp"
#include "generators.hpp"

using namespace cenet;
using cenet::testing::Gen;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  auto dir = fs::temp_directory_path() / "cenet_test_trainer" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.max_epochs = 2;
  cfg.base_lr = 0.01;
  cfg.seed = 5;
  return cfg;
}

Model small_model() { return Model(ModelConfig::of(Variant::CeNet, 1, 0.125)); }

std::vector<Sample> small_data() { return make_synthetic({4, 32, 1, false}); }

std::map<std::string, Tensor<float>> grads_of(const ParamStore& p, float value) {
  std::map<std::string, Tensor<float>> g;
  for (const auto& e : p.entries())
    if (is_trainable(e.kind)) g.emplace(e.name, Tensor<float>(e.value.shape(), value));
  return g;
}

/// Zero weights everywhere; the head's last bias sets the constant output.
ParamStore constant_params(const Model& m, float logit) {
  ParamStore p = m.init_params(0);
  for (auto& e : p.entries())
    if (is_decayed(e.kind)) e.value.fill(0.0f);
  p.at("head.conv3.bias").fill(logit);
  return p;
}

}  // namespace

TEST_CASE("poly schedule") {
  CHECK(poly_lr(0, 1000, 4e-3, 0.9) == 4e-3);
  CHECK(poly_lr(1000, 1000, 4e-3, 0.9) == 0.0);
  CHECK(poly_lr(2000, 1000, 4e-3, 0.9) == 0.0);
  CHECK(poly_lr(500, 1000, 4e-3, 0.9) == doctest::Approx(2.1435e-3).epsilon(1e-4));
  for (std::size_t i = 0; i < 100; ++i) CHECK(poly_lr(i + 1, 100, 4e-3, 0.9) < poly_lr(i, 100, 4e-3, 0.9));
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.batch_size = 8;
  CHECK(total_iterations(17, cfg) == 9);
}

TEST_CASE("sgd step rules") {
  SUBCASE("hand iteration with momentum") {
    ParamStore p;
    p.add("w", Tensor<float>({1}, 0.0f), ParamKind::ConvWeight);
    auto state = OptimizerState::zeros_like(p);
    sgd_step(p, grads_of(p, 1.0f), state, 1.0, 0.9, 0.0);
    CHECK(p.at("w")[0] == -1.0f);
    sgd_step(p, grads_of(p, 1.0f), state, 1.0, 0.9, 0.0);
    CHECK(p.at("w")[0] == -2.9f);
  }
  SUBCASE("plain descent and zero gradient") {
    ParamStore p;
    p.add("w", Tensor<float>({2}, {1.5f, -2.0f}), ParamKind::ConvWeight);
    p.add("bn.running_mean", Tensor<float>({2}, 3.0f), ParamKind::BnRunningMean);
    auto state = OptimizerState::zeros_like(p);
    CHECK(state.velocity.count("bn.running_mean") == 0);
    sgd_step(p, {{"w", Tensor<float>({2}, {0.5f, 0.25f})}}, state, 0.5, 0.0, 0.0);
    CHECK(p.at("w").storage() == std::vector<float>{1.5f - 0.25f, -2.0f - 0.125f});
    const auto before = p;
    sgd_step(p, grads_of(p, 0.0f), state, 0.5, 0.0, 0.0);
    CHECK(p == before);
  }
  SUBCASE("weight decay applies to conv weights only") {
    ParamStore p;
    p.add("w", Tensor<float>({1}, 2.0f), ParamKind::ConvWeight);
    p.add("b", Tensor<float>({1}, 2.0f), ParamKind::Bias);
    auto state = OptimizerState::zeros_like(p);
    sgd_step(p, grads_of(p, 0.0f), state, 1.0, 0.0, 0.5);
    CHECK(p.at("w")[0] == 1.0f);
    CHECK(p.at("b")[0] == 2.0f);
  }
  SUBCASE("descends a convex quadratic") {
    Gen g(1);
    ParamStore p;
    p.add("w", g.tensor<float>({16}), ParamKind::ConvWeight);
    auto state = OptimizerState::zeros_like(p);
    auto norm = [&] {
      double s = 0;
      for (float v : p.at("w").data()) s += double(v) * v;
      return s;
    };
    const double before = norm();
    std::map<std::string, Tensor<float>> grad{{"w", p.at("w")}};
    for (auto& v : grad["w"].data()) v *= 2.0f;
    sgd_step(p, grad, state, 0.1, 0.0, 0.0);
    CHECK(norm() < before);
  }
  SUBCASE("non-finite gradient names the parameter and changes nothing") {
    ParamStore p;
    p.add("good", Tensor<float>({1}, 1.0f), ParamKind::ConvWeight);
    p.add("layer.bad", Tensor<float>({1}, 1.0f), ParamKind::ConvWeight);
    auto state = OptimizerState::zeros_like(p);
    auto g = grads_of(p, 1.0f);
    g["layer.bad"][0] = NAN;
    const auto before = p;
    try {
      sgd_step(p, g, state, 0.1, 0.9, 0.0);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("layer.bad") != std::string::npos);
    }
    CHECK(p == before);
  }
}

TEST_CASE("history CSV") {
  std::ostringstream os;
  write_history_csv(os, {{0, 0.004, 0.5, 0.4}, {1, 0.002, 0.25, 0.2}});
  CHECK(os.str() == "iter,lr,loss\n0,0.004,0.5\n1,0.002,0.25\n");
}

TEST_CASE("batches pad to a common size") {
  Gen g(2);
  std::vector<Sample> s{{"a", g.tensor<float>({3, 30, 40}), LabelMap(30, 40, 1)},
                        {"b", g.tensor<float>({3, 33, 20}), LabelMap(33, 20, 0)}};
  auto b = make_batch(s);
  CHECK(b.images.shape() == Shape{2, 3, 64, 64});
  CHECK(b.masks[0].at(29, 39) == 1);
  CHECK(b.masks[0].at(30, 0) == kIgnoreLabel);
  CHECK(b.ids == std::vector<std::string>{"a", "b"});
}

TEST_CASE("training with zero learning rate leaves trainable parameters unchanged") {
  Model m = small_model();
  auto data = make_synthetic({1, 64, 1, false});
  TrainConfig cfg = small_config();
  cfg.base_lr = 0.0;
  cfg.max_epochs = 1;
  auto state = init_train_state(m, cfg);
  const auto before = state.params;
  train(m, data, cfg, state);
  CHECK(state.iter == 1);
  for (const auto& e : state.params.entries())
    if (is_trainable(e.kind)) CHECK(e.value == before.at(e.name));
}

TEST_CASE("training is deterministic and the loss falls") {
  Model m = small_model();
  auto data = small_data();
  TrainConfig cfg = small_config();
  cfg.max_epochs = 4;
  auto a = init_train_state(m, cfg), b = init_train_state(m, cfg);
  train(m, data, cfg, a);
  train(m, data, cfg, b);
  CHECK(a.history.size() == 8);
  CHECK(a.history == b.history);
  CHECK(a.params == b.params);
  CHECK(a.history.back().data_loss < a.history.front().data_loss);
  CHECK(a.history.back().lr < a.history.front().lr);
}

TEST_CASE("checkpoint resume reproduces the straight run") {
  Model m = small_model();
  auto data = make_synthetic({5, 64, 2, false});
  TrainConfig cfg = small_config();
  cfg.max_epochs = 2;  // 3 batches per epoch, last one short
  const auto dir = fresh_dir("resume");
  auto straight = init_train_state(m, cfg);
  train(m, data, cfg, straight);
  REQUIRE(straight.iter == 6);

  TrainOptions opts;
  opts.checkpoint_dir = dir;
  opts.stop_after = 4;
  opts.config_hash = "abc";
  auto split = init_train_state(m, cfg);
  train(m, data, cfg, split, opts);
  CHECK(split.iter == 4);
  auto resumed = load_checkpoint(dir, m, "abc");
  CHECK(resumed.iter == 4);
  CHECK(resumed.params == split.params);
  CHECK(resumed.optimizer == split.optimizer);
  CHECK(resumed.history == split.history);
  train(m, data, cfg, resumed);
  CHECK(resumed.history == straight.history);
  CHECK(resumed.params == straight.params);
  CHECK(resumed.optimizer == straight.optimizer);
}

TEST_CASE("checkpoint validation") {
  Model m = small_model();
  TrainConfig cfg = small_config();
  auto state = init_train_state(m, cfg);
  state.iter = 3;
  const auto dir = fresh_dir("validate");
  save_checkpoint(dir, state, cfg, "hash1");
  CHECK(load_checkpoint(dir / "checkpoint.json", m).params == state.params);
  CHECK_THROWS_AS(load_checkpoint(dir, m, "hash2"), ConfigError);

  SUBCASE("corrupted weights fail the checksum") {
    std::string bytes = read_file_bytes(dir / "checkpoint.weights");
    bytes[bytes.size() - 1] ^= 0x01;
    write_file_bytes(dir / "checkpoint.weights", bytes);
    CHECK_THROWS_AS(load_checkpoint(dir, m), IntegrityError);
  }
  SUBCASE("unknown version is refused with both versions named") {
    auto side = nlohmann::json::parse(read_file_bytes(dir / "checkpoint.json"));
    side["format_version"] = 7;
    write_file_bytes(dir / "checkpoint.json", side.dump());
    try {
      load_checkpoint(dir, m);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("7") != std::string::npos);
      CHECK(msg.find("1") != std::string::npos);
    }
  }
  SUBCASE("malformed sidecar") {
    write_file_bytes(dir / "checkpoint.json", "{not json");
    CHECK_THROWS_AS(load_checkpoint(dir, m), IntegrityError);
  }
}

TEST_CASE("TTA contract") {
  Model m = small_model();
  SUBCASE("constant model") {
    auto p = constant_params(m, 0.8f);
    Gen g(3);
    auto y = tta_predict(m, p, g.tensor<float>({1, 3, 64, 64}, 0.0, 1.0));
    const float want = 1.0f / (1.0f + std::exp(-0.8f));
    for (float v : y.data()) CHECK(std::abs(v - want) <= 1e-6f);
    auto plain = predict_image(m, p, g.tensor<float>({3, 64, 64}, 0.0, 1.0), false);
    auto tta = predict_image(m, p, g.tensor<float>({3, 64, 64}, 0.0, 1.0), true);
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(std::abs(plain[i] - tta[i]) <= 1e-5f);
  }
  SUBCASE("equivariance for a random model") {
    auto p = m.init_params(4);
    Gen g(4);
    auto x = g.tensor<float>({1, 3, 64, 64}, 0.0, 1.0);
    auto base = tta_predict(m, p, x);
    for (const auto& e : D4::all()) {
      auto lhs = tta_predict(m, p, d4_apply(x, e));
      auto rhs = d4_apply(base, e);
      double worst = 0.0;
      for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, double(std::abs(lhs[i] - rhs[i])));
      CHECK_MESSAGE(worst <= 1e-5, "element " << e.code());
    }
  }
  SUBCASE("averaging lowers variance on noise") {
    auto p = m.init_params(5);
    Gen g(5);
    auto x = g.tensor<float>({1, 3, 64, 64}, 0.0, 1.0);
    auto single = predict(m, p, x), averaged = tta_predict(m, p, x);
    auto variance = [](const Tensor<float>& t) {
      double mean = 0.0, var = 0.0;
      for (float v : t.data()) mean += v;
      mean /= double(t.size());
      for (float v : t.data()) var += (v - mean) * (v - mean);
      return var / double(t.size());
    };
    CHECK(variance(averaged) < variance(single));
  }
  SUBCASE("non-square images keep their size") {
    auto p = m.init_params(6);
    Gen g(6);
    CHECK(predict_image(m, p, g.tensor<float>({3, 40, 50}), true).shape() == Shape{1, 40, 50});
    CHECK(predict_image(m, p, g.tensor<float>({3, 40, 50}), false).shape() == Shape{1, 40, 50});
  }
}

TEST_CASE("evaluation rows") {
  Model m = small_model();
  auto data = small_data();
  SUBCASE("perfect prediction of an all-foreground set") {
    auto p = constant_params(m, 10.0f);
    std::vector<Sample> ones = data;
    for (auto& s : ones) std::fill(s.mask.labels.begin(), s.mask.labels.end(), 1);
    auto rep = evaluate(m, p, ones);
    CHECK(rep.summary.at("overlap_error").mean == 0.0);
    CHECK(rep.summary.at("sensitivity").mean == 1.0);
    CHECK(rep.summary.at("accuracy").mean == 1.0);
    CHECK_FALSE(rep.notes.empty());  // AUC is undefined on single-class images
  }
  SUBCASE("summary means agree with the per-image rows") {
    auto p = m.init_params(1);
    auto rep = evaluate(m, p, data);
    std::map<std::string, std::vector<double>> per;
    for (const auto& r : rep.rows)
      if (r.image_id != "mean" && r.image_id != "std" && r.image_id != "pooled") per[r.metric].push_back(r.value);
    CHECK(per.at("overlap_error").size() == data.size());
    for (const auto& [metric, values] : per) {
      double mean = 0.0;
      for (double v : values) mean += v;
      CHECK(rep.summary.at(metric).mean == doctest::Approx(mean / double(values.size())).epsilon(1e-12));
    }
    CHECK(rep.predictions.size() == data.size());
  }
}
