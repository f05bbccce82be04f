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


#include "cenet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cenet/serialize.hpp"

namespace cenet {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* loss_name(LossKind k) { return k == LossKind::Dice ? "dice" : "ce"; }

LossKind parse_loss(const std::string& s) {
  if (s == "dice") return LossKind::Dice;
  if (s == "ce") return LossKind::CrossEntropy;
  throw ConfigError("unknown loss '" + s + "' (expected dice or ce)");
}

void TrainConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a finite value >= 0");
  };
  nonneg(base_lr, "base_lr");
  nonneg(momentum, "momentum");
  nonneg(weight_decay, "weight_decay");
  nonneg(poly_power, "poly_power");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  const auto& a = augmentation;
  if (!(a.scale_range[0] > 0.0 && a.scale_range[0] <= a.scale_range[1])) {
    throw ConfigError("scale_range must satisfy 0 < lo <= hi");
  }
  nonneg(a.hue_jitter, "hue_jitter");
  nonneg(a.saturation_jitter, "saturation_jitter");
  nonneg(a.value_jitter, "value_jitter");
  if (!(a.shift_fraction >= 0.0 && a.shift_fraction < 1.0)) throw ConfigError("shift_fraction must lie in [0, 1)");
}

double poly_lr(std::size_t iter, std::size_t max_iter, double base_lr, double power) {
  if (max_iter == 0 || iter >= max_iter) return 0.0;
  return base_lr * std::pow(1.0 - double(iter) / double(max_iter), power);
}

std::size_t total_iterations(std::size_t samples, const TrainConfig& cfg) {
  return cfg.max_epochs * ((samples + cfg.batch_size - 1) / cfg.batch_size);
}

OptimizerState OptimizerState::zeros_like(const ParamStore& params) {
  OptimizerState s;
  for (const auto& e : params.entries()) {
    if (is_trainable(e.kind)) s.velocity.emplace(e.name, Tensor<float>(e.value.shape()));
  }
  return s;
}

void sgd_step(ParamStore& params, const std::map<std::string, Tensor<float>>& grads, OptimizerState& state,
              double lr, double momentum, double weight_decay) {
  for (const auto& [name, g] : grads) {
    for (float v : g.data()) {
      if (!std::isfinite(v)) throw NumericError("non-finite gradient in parameter '" + name + "'");
    }
  }
  const float mu = float(momentum), lambda = float(weight_decay), step = float(lr);
  for (auto& e : params.entries()) {
    if (!is_trainable(e.kind)) continue;
    auto vit = state.velocity.find(e.name);
    if (vit == state.velocity.end() || vit->second.shape() != e.value.shape()) {
      throw ContractError("optimizer state does not match parameter '" + e.name + "'");
    }
    auto git = grads.find(e.name);
    const float* g = git == grads.end() ? nullptr : git->second.raw();
    float* w = e.value.raw();
    float* v = vit->second.raw();
    const bool decay = is_decayed(e.kind);
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      float d = g ? g[i] : 0.0f;
      if (decay) d += lambda * w[i];
      v[i] = mu * v[i] + d;
      w[i] -= step * v[i];
    }
  }
}

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows) {
  os << "iter,lr,loss\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", r.iter, r.lr, r.loss);
    os << buf;
  }
}

TrainState init_train_state(const Model& model, const TrainConfig& cfg) {
  TrainState s;
  s.params = model.init_params(cfg.seed);
  s.optimizer = OptimizerState::zeros_like(s.params);
  return s;
}

Batch make_batch(std::vector<Sample> samples) {
  if (samples.empty()) throw ContractError("empty batch");
  std::size_t h = 0, w = 0;
  for (const auto& s : samples) {
    h = std::max(h, s.mask.height);
    w = std::max(w, s.mask.width);
  }
  h = round_up(h, kSpatialMultiple);
  w = round_up(w, kSpatialMultiple);
  Batch b{Tensor<float>({samples.size(), 3, h, w}), {}, {}};
  const std::size_t plane = 3 * h * w;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Sample p = pad_sample(samples[i], h, w);
    std::copy_n(p.image.raw(), plane, b.images.raw() + i * plane);
    b.masks.push_back(std::move(p.mask));
    b.ids.push_back(std::move(p.id));
  }
  return b;
}

// Substream tags.
namespace {
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
}  // namespace

Sample training_view(const Sample& s, const TrainConfig& cfg, std::size_t epoch, std::size_t index) {
  if (!cfg.augment) return pad_to_32(s);
  Rng rng(derive_seed(cfg.seed, {kAugmentStream, epoch, index}));
  const D4 g(unsigned(rng.below(D4::kOrder)));
  Sample sq = g.code() == 0 ? s : pad_to_square(s);
  if (g.code() != 0) {
    sq.image = d4_apply(sq.image, g);
    sq.mask = d4_apply(sq.mask, g);
  }
  return random_augment(sq, cfg.augmentation, rng);
}

namespace {

struct StepResult {
  double loss = 0.0;
  double data_loss = 0.0;
  std::map<std::string, Tensor<float>> grads;
};

StepResult forward_backward(const Model& model, ParamStore& params, const Batch& batch, const TrainConfig& cfg) {
  const std::size_t k = model.config().num_classes;
  const Targets<float> t = encode_targets<float>(batch.masks, k);
  Tape<float> tape;
  ForwardContext ctx(tape, params, BnMode::Train);
  Var<float> probs = model.forward(ctx, tape.constant(batch.images));
  Var<float> data = cfg.loss == LossKind::Dice
                        ? dice_loss(probs, t.onehot, &t.valid, ClassWeights::uniform(k))
                        : cross_entropy_loss(probs, t.onehot, &t.valid);
  TotalLoss total = total_loss(data, params, cfg.weight_decay);
  StepResult r;
  r.loss = total.loss.value().item();
  r.data_loss = data.value().item();
  if (!std::isfinite(r.loss)) return r;
  tape.backward(data);
  for (const auto& [name, var] : ctx.bound()) r.grads.emplace(name, var.grad());
  return r;
}

std::string diagnostics(const Batch& batch, double lr, const std::map<std::string, Tensor<float>>& grads) {
  std::ostringstream os;
  os << "batch ids:";
  for (const auto& id : batch.ids) os << ' ' << id;
  os << "; lr " << lr;
  std::vector<std::pair<double, std::string>> norms;
  for (const auto& [name, g] : grads) {
    double s = 0.0;
    for (float v : g.data()) s += double(v) * double(v);
    norms.emplace_back(std::sqrt(s), name);
  }
  std::sort(norms.begin(), norms.end(), [](const auto& a, const auto& b) {
    return !(a.first <= b.first);  // NaN first, then descending
  });
  if (!norms.empty()) {
    os << "; largest grad norms:";
    for (std::size_t i = 0; i < norms.size() && i < 5; ++i) os << ' ' << norms[i].second << '=' << norms[i].first;
  }
  return os.str();
}

}  // namespace

void train(const Model& model, const std::vector<Sample>& data, const TrainConfig& cfg, TrainState& state,
           const TrainOptions& opts) {
  cfg.validate();
  if (data.empty()) throw DataError("training set is empty");
  model.validate(state.params);
  const std::size_t n = data.size();
  const std::size_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t max_iter = total_iterations(n, cfg);
  const std::size_t stop = opts.stop_after ? std::min(opts.stop_after, max_iter) : max_iter;

  std::vector<std::size_t> order;
  std::size_t order_epoch = std::numeric_limits<std::size_t>::max();
  while (state.iter < stop) {
    const std::size_t epoch = state.iter / per_epoch, slot = state.iter % per_epoch;
    if (epoch != order_epoch) {
      Rng rng(derive_seed(cfg.seed, {kShuffleStream, epoch}));
      order = permutation(n, rng);
      order_epoch = epoch;
    }
    std::vector<Sample> views;
    for (std::size_t j = slot * cfg.batch_size; j < std::min(n, (slot + 1) * cfg.batch_size); ++j) {
      views.push_back(training_view(data[order[j]], cfg, epoch, order[j]));
    }
    const Batch batch = make_batch(std::move(views));
    const double lr = poly_lr(state.iter, max_iter, cfg.base_lr, cfg.poly_power);
    StepResult step = forward_backward(model, state.params, batch, cfg);
    if (!std::isfinite(step.loss)) {
      throw NumericError("non-finite loss at iteration " + std::to_string(state.iter) + " (" +
                         diagnostics(batch, lr, step.grads) + ")");
    }
    try {
      sgd_step(state.params, step.grads, state.optimizer, lr, cfg.momentum, cfg.weight_decay);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at iteration " + std::to_string(state.iter) + " (" +
                         diagnostics(batch, lr, step.grads) + ")");
    }
    state.history.push_back({state.iter, lr, step.loss, step.data_loss});
    ++state.iter;
    if (opts.log) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "iter %zu/%zu  lr %.6g  loss %.6f", state.iter, max_iter, lr, step.loss);
      opts.log(buf);
    }
    const bool epoch_end = state.iter % per_epoch == 0;
    if (!opts.checkpoint_dir.empty() && (epoch_end || state.iter == stop)) {
      save_checkpoint(opts.checkpoint_dir, state, cfg, opts.config_hash);
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

fs::path sidecar_path(const fs::path& p) { return fs::is_directory(p) ? p / "checkpoint.json" : p; }

}  // namespace

void save_checkpoint(const fs::path& dir, const TrainState& state, const TrainConfig& cfg,
                     const std::string& config_hash) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());
  std::vector<NamedTensor> weights, velocity;
  for (const auto& e : state.params.entries()) weights.push_back({e.name, e.value});
  for (const auto& [name, v] : state.optimizer.velocity) velocity.push_back({name, v});
  const std::string wbytes = encode_tensors(weights), vbytes = encode_tensors(velocity);
  write_file_bytes(dir / "checkpoint.weights", wbytes);
  write_file_bytes(dir / "checkpoint.optimizer", vbytes);

  json hist = json::array();
  for (const auto& h : state.history) hist.push_back({h.iter, h.lr, h.loss, h.data_loss});
  json side = {
      {"format_version", kCheckpointVersion},
      {"iter", state.iter},
      {"rng", {{"algorithm", "splitmix64"}, {"seed", cfg.seed}, {"streams", "derived from (seed, epoch, sample)"}}},
      {"config_hash", config_hash},
      {"weights", {{"file", "checkpoint.weights"}, {"fnv1a64", hex64(fnv1a64(wbytes))}}},
      {"optimizer", {{"file", "checkpoint.optimizer"}, {"fnv1a64", hex64(fnv1a64(vbytes))}}},
      {"history", hist},
  };
  write_file_bytes(dir / "checkpoint.json", side.dump(2) + "\n");
}

TrainState load_checkpoint(const fs::path& path, const Model& model, const std::string& expected_hash) {
  const fs::path side_path = sidecar_path(path);
  const fs::path dir = side_path.parent_path();
  json side;
  try {
    side = json::parse(read_file_bytes(side_path));
  } catch (const json::exception& e) {
    throw IntegrityError("checkpoint sidecar " + side_path.string() + " is not valid JSON: " + e.what());
  }
  try {
    const int version = side.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("checkpoint format version " + std::to_string(version) + " is not supported (this build reads " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    const std::string hash = side.at("config_hash").get<std::string>();
    if (!expected_hash.empty() && hash != expected_hash) {
      throw ConfigError("checkpoint was written for configuration " + hash + ", current configuration is " +
                        expected_hash);
    }
    auto load = [&](const char* key) {
      const std::string file = side.at(key).at("file").get<std::string>();
      const std::string bytes = read_file_bytes(dir / file);
      const std::string want = side.at(key).at("fnv1a64").get<std::string>();
      if (hex64(fnv1a64(bytes)) != want) throw IntegrityError("checksum mismatch for " + (dir / file).string());
      return decode_tensors(bytes);
    };
    TrainState s;
    std::vector<NamedTensor> weights = load("weights");
    for (auto& t : weights) {
      bool known = false;
      for (const auto& d : model.decls()) {
        if (d.name == t.name) {
          s.params.add(t.name, std::move(t.tensor), d.kind);
          known = true;
          break;
        }
      }
      if (!known) throw ConfigError("checkpoint has unexpected tensor '" + t.name + "'");
    }
    model.validate(s.params);
    for (auto& t : load("optimizer")) s.optimizer.velocity.emplace(t.name, std::move(t.tensor));
    const OptimizerState ref = OptimizerState::zeros_like(s.params);
    for (const auto& [name, v] : ref.velocity) {
      auto it = s.optimizer.velocity.find(name);
      if (it == s.optimizer.velocity.end() || it->second.shape() != v.shape()) {
        throw IntegrityError("optimizer state lacks or mis-shapes '" + name + "'");
      }
    }
    s.iter = side.at("iter").get<std::size_t>();
    for (const auto& h : side.at("history")) {
      s.history.push_back(
          {h.at(0).get<std::size_t>(), h.at(1).get<double>(), h.at(2).get<double>(), h.at(3).get<double>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw IntegrityError("checkpoint sidecar " + side_path.string() + " is malformed: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Inference

Tensor<float> tta_predict(const Model& model, ParamStore& params, const Tensor<float>& image) {
  if (image.rank() != 4 || image.dim(2) != image.dim(3)) {
    throw ContractError("tta_predict needs a square [N,C,S,S] input, got " + shape_str(image.shape()));
  }
  Tensor<float> acc;
  for (const D4& g : D4::all()) {
    Tensor<float> y = d4_apply(predict(model, params, d4_apply(image, g)), g.inverse());
    if (acc.empty()) acc = std::move(y);
    else acc += y;
  }
  for (auto& v : acc.data()) v /= float(D4::kOrder);
  return acc;
}

Tensor<float> predict_image(const Model& model, ParamStore& params, const Tensor<float>& image, bool tta) {
  if (image.rank() != 3) throw DimensionError("predict_image needs [C,H,W], got " + shape_str(image.shape()));
  const std::size_t h = image.dim(1), w = image.dim(2);
  std::size_t ph = round_up(h, kSpatialMultiple), pw = round_up(w, kSpatialMultiple);
  if (tta) ph = pw = std::max(ph, pw);
  Tensor<float> x({1, image.dim(0), ph, pw});
  for (std::size_t c = 0; c < image.dim(0); ++c) {
    for (std::size_t r = 0; r < h; ++r) std::copy_n(image.raw() + (c * h + r) * w, w, x.raw() + (c * ph + r) * pw);
  }
  Tensor<float> y = tta ? tta_predict(model, params, x) : predict(model, params, x);
  y = crop_tensor(y, h, w);
  return y.reshaped({y.dim(1), h, w});
}

LabelMap probs_to_labels(const Tensor<float>& probs, double threshold) {
  if (probs.rank() != 3) throw DimensionError("probs_to_labels needs [K,H,W]");
  const std::size_t k = probs.dim(0), h = probs.dim(1), w = probs.dim(2), hw = h * w;
  LabelMap m(h, w);
  for (std::size_t i = 0; i < hw; ++i) {
    if (k == 1) {
      m.labels[i] = probs[i] >= threshold ? 1 : 0;
      continue;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (probs[c * hw + i] > probs[best * hw + i]) best = c;
    }
    m.labels[i] = std::uint8_t(best);
  }
  return m;
}

EvalReport evaluate(const Model& model, ParamStore& params, const std::vector<Sample>& data,
                    const EvalOptions& opts) {
  if (data.empty()) throw DataError("evaluation set is empty");
  const std::size_t k = model.config().num_classes;
  EvalReport rep;
  std::map<std::string, std::vector<double>> per_metric;
  std::vector<std::string> order;
  auto record = [&](const std::string& id, const std::string& metric, double v) {
    rep.rows.push_back({id, metric, v});
    if (!per_metric.count(metric)) order.push_back(metric);
    per_metric[metric].push_back(v);
  };
  std::vector<float> pooled_scores;
  std::vector<std::uint8_t> pooled_gt;

  for (const Sample& s : data) {
    const Tensor<float> probs = predict_image(model, params, s.image, opts.tta);
    const std::size_t hw = s.mask.size();
    LabelMap pred = probs_to_labels(probs, opts.threshold);
    std::vector<std::uint8_t> pb(hw), gb(hw);
    std::vector<float> score(hw);
    for (std::size_t i = 0; i < hw; ++i) {
      const std::uint8_t g = s.mask.labels[i];
      gb[i] = g == kIgnoreLabel ? kIgnoreLabel : std::uint8_t(g >= 1);
      pb[i] = pred.labels[i] >= 1;
      score[i] = k == 1 ? probs[i] : 1.0f - probs[i];
    }
    record(s.id, "overlap_error", overlap_error(pb, gb));
    const SenAcc sa = sen_acc(pb, gb);
    record(s.id, "sensitivity", sa.sensitivity);
    record(s.id, "accuracy", sa.accuracy);
    try {
      record(s.id, "auc", auc(std::span<const float>(score), gb));
    } catch (const ContractError&) {
      rep.notes.push_back("auc undefined for " + s.id + " (single-class ground truth)");
    }
    {
      const Targets<float> t = encode_targets<float>(std::span<const LabelMap>(&s.mask, 1), k);
      Tape<float> tape;
      Var<float> p = tape.constant(probs.reshaped({1, k, s.mask.height, s.mask.width}));
      record(s.id, "soft_dice", 1.0 - dice_loss(p, t.onehot, &t.valid, ClassWeights::uniform(k)).value().item());
    }
    if (opts.boundaries > 0) {
      const Boundaries ref = extract_boundaries(s.mask, opts.boundaries);
      const BoundaryReport br = boundary_mae(pred, ref.rows);
      for (std::size_t b = 0; b < br.mae.size(); ++b) {
        record(s.id, "boundary" + std::to_string(b + 1) + "_mae", br.mae[b]);
        if (!br.missing[b].empty()) {
          rep.notes.push_back(s.id + ": boundary " + std::to_string(b + 1) + " missing in " +
                              std::to_string(br.missing[b].size()) + " predicted column(s), placed at the bottom");
        }
      }
    }
    pooled_scores.insert(pooled_scores.end(), score.begin(), score.end());
    pooled_gt.insert(pooled_gt.end(), gb.begin(), gb.end());
    rep.predictions.push_back(std::move(pred));
  }
  for (const auto& m : order) {
    const MeanStd ms = mean_std(per_metric[m]);
    rep.summary[m] = ms;
  }
  for (const auto& m : order) rep.rows.push_back({"mean", m, rep.summary[m].mean});
  for (const auto& m : order) rep.rows.push_back({"std", m, rep.summary[m].std});
  try {
    rep.pooled_auc = auc(std::span<const float>(pooled_scores), pooled_gt);
    rep.pooled_auc_defined = true;
    rep.rows.push_back({"pooled", "auc", rep.pooled_auc});
  } catch (const ContractError&) {
    rep.notes.push_back("pooled auc undefined (single-class ground truth over the whole set)");
  }
  return rep;
}

}  // namespace cenet
