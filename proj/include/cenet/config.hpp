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

#include <filesystem>
#include <string>

#include "cenet/model.hpp"
#include "cenet/trainer.hpp"

namespace cenet {

/// Full run description; see README for the JSON schema.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  struct Data {
    std::filesystem::path root = "data";
    /// Evaluation set; empty means `root`.
    std::filesystem::path eval_root;
  } data;
  EvalOptions eval;
  struct Output {
    std::filesystem::path dir = "runs/default";
  } output;

  std::filesystem::path eval_dir() const { return data.eval_root.empty() ? data.root : data.eval_root; }
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the key
/// path. Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Every field written out explicitly, paths absolute.
std::string effective_config_json(const RunConfig& cfg);

/// Digest of everything that shapes a training run (model, train, and
/// augmentation settings; paths excluded).
std::string config_hash(const RunConfig& cfg);

}  // namespace cenet
