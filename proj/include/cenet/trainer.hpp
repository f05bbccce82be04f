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
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cenet/data.hpp"
#include "cenet/losses.hpp"
#include "cenet/metrics.hpp"
#include "cenet/model.hpp"

namespace cenet {

enum class LossKind { Dice, CrossEntropy };

const char* loss_name(LossKind k);
LossKind parse_loss(const std::string& s);

struct TrainConfig {
  double base_lr = 4e-3;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 100;
  double poly_power = 0.9;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::Dice;
  /// Random D4 element, scale, colour jitter, and shift per sample.
  bool augment = true;
  AugmentConfig augmentation;

  void validate() const;
};

/// base_lr * (1 - iter / max_iter)^power; zero at and past max_iter.
double poly_lr(std::size_t iter, std::size_t max_iter, double base_lr, double power);

/// epochs * ceil(samples / batch).
std::size_t total_iterations(std::size_t samples, const TrainConfig& cfg);

/// Momentum buffers, one per trainable parameter, same names as the store.
struct OptimizerState {
  std::map<std::string, Tensor<float>> velocity;

  static OptimizerState zeros_like(const ParamStore& params);
  bool operator==(const OptimizerState&) const = default;
};

/// v <- mu v + (g + lambda w) for conv-type weights, v <- mu v + g otherwise;
/// then w <- w - lr v. Non-finite gradients raise NumericError naming the
/// parameter before anything is modified.
void sgd_step(ParamStore& params, const std::map<std::string, Tensor<float>>& grads, OptimizerState& state,
              double lr, double momentum, double weight_decay);

struct HistoryRow {
  std::size_t iter = 0;
  double lr = 0.0;
  double loss = 0.0;       // data term + weight regularizer
  double data_loss = 0.0;  // dice or cross-entropy alone
  bool operator==(const HistoryRow&) const = default;
};

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows);

/// Everything a resumed run needs. Randomness is derived from (seed, epoch,
/// sample index), so the iteration counter is the whole RNG state.
struct TrainState {
  ParamStore params;
  OptimizerState optimizer;
  std::size_t iter = 0;
  std::vector<HistoryRow> history;
};

TrainState init_train_state(const Model& model, const TrainConfig& cfg);

using LogFn = std::function<void(const std::string&)>;

struct TrainOptions {
  /// Checkpoints go here at every epoch end and at the last iteration;
  /// empty disables file output.
  std::filesystem::path checkpoint_dir;
  /// Stops after this many total iterations (0 = run the full schedule).
  std::size_t stop_after = 0;
  std::string config_hash;
  LogFn log;
};

/// One batch: images stacked to [B,3,H,W] (padded to a common /32 size) and
/// the matching masks.
struct Batch {
  Tensor<float> images;
  std::vector<LabelMap> masks;
  std::vector<std::string> ids;
};

Batch make_batch(std::vector<Sample> samples);

/// Sample `index` as seen in `epoch` (augmentation applied when enabled).
Sample training_view(const Sample& s, const TrainConfig& cfg, std::size_t epoch, std::size_t index);

/// Trains in place from state.iter to the end of the schedule.
void train(const Model& model, const std::vector<Sample>& data, const TrainConfig& cfg, TrainState& state,
           const TrainOptions& opts = {});

// ---------------------------------------------------------------------------
// Checkpoints: <dir>/checkpoint.weights (CETNSR1 parameters), <dir>/
// checkpoint.optimizer (CETNSR1 velocities), <dir>/checkpoint.json (sidecar).

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state, const TrainConfig& cfg,
                     const std::string& config_hash);
/// `path` is the sidecar or its directory. A non-empty `expected_hash` must
/// match the recorded configuration hash.
TrainState load_checkpoint(const std::filesystem::path& path, const Model& model,
                           const std::string& expected_hash = {});

// ---------------------------------------------------------------------------
// Inference and evaluation

/// Probabilities [K,H,W] for an image [3,H,W] of any size: pads to /32,
/// predicts (optionally averaging the eight D4 views), crops back.
Tensor<float> predict_image(const Model& model, ParamStore& params, const Tensor<float>& image, bool tta);

/// Averages g^-1 f(g x) over D4 for x [N,C,S,S] with S divisible by 32.
Tensor<float> tta_predict(const Model& model, ParamStore& params, const Tensor<float>& image);

/// Hard labels: argmax for K > 1, p >= threshold for K == 1.
LabelMap probs_to_labels(const Tensor<float>& probs, double threshold = 0.5);

struct EvalOptions {
  bool tta = false;
  double threshold = 0.5;
  /// > 0 also reports the mean absolute error of that many layer boundaries.
  std::size_t boundaries = 0;
};

struct EvalReport {
  std::vector<MetricRow> rows;  // per image, then mean / std / pooled rows
  std::map<std::string, MeanStd> summary;
  double pooled_auc = 0.0;
  bool pooled_auc_defined = false;
  std::vector<LabelMap> predictions;
  std::vector<std::string> notes;
};

EvalReport evaluate(const Model& model, ParamStore& params, const std::vector<Sample>& data,
                    const EvalOptions& opts = {});

}  // namespace cenet
