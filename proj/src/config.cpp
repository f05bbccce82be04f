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


#include "cenet/config.hpp"

#include <cstdio>
#include <set>

#include <json.hpp>

#include "cenet/serialize.hpp"

namespace cenet {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Reads keys out of one JSON object, remembering which were consumed.
class Section {
 public:
  Section(const json& root, const std::string& name) : path_(name) {
    if (!root.contains(name)) return;
    obj_ = &root.at(name);
    if (!obj_->is_object()) throw ConfigError("'" + name + "' must be an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  [[noreturn]] void type_error(const std::string& key, const char* expected) const {
    throw ConfigError("'" + path_ + "." + key + "' must be " + expected);
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) type_error(key, "a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) type_error(key, "a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }
  void get(const std::string& key, std::uint64_t& out, int) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) type_error(key, "a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) type_error(key, "true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) type_error(key, "a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, fs::path& out, const fs::path& base) {
    std::string s;
    if (!has(key)) {
      find(key);
      if (!out.empty() && out.is_relative() && !base.empty()) out = base / out;
      return;
    }
    get(key, s);
    out = s;
    if (!out.empty() && out.is_relative() && !base.empty()) out = base / out;
  }
  void get(const std::string& key, std::array<double, 2>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        type_error(key, "a [low, high] pair of numbers");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [k, _] : obj_->items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key '" + path_ + "." + k + "'");
    }
  }

 private:
  std::string path_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

json model_json(const ModelConfig& m) {
  return {{"variant", variant_name(m.variant)},      {"num_classes", m.num_classes},
          {"width_multiplier", m.width_multiplier},  {"enable_dac", m.enable_dac},
          {"enable_rmp", m.enable_rmp},              {"input_channels", m.input_channels}};
}

json train_json(const TrainConfig& t) {
  return {{"base_lr", t.base_lr},         {"momentum", t.momentum},     {"weight_decay", t.weight_decay},
          {"batch_size", t.batch_size},   {"max_epochs", t.max_epochs}, {"poly_power", t.poly_power},
          {"seed", t.seed},               {"loss", loss_name(t.loss)},  {"augment", t.augment}};
}

json augment_json(const AugmentConfig& a) {
  return {{"scale_range", {a.scale_range[0], a.scale_range[1]}},
          {"hue_jitter", a.hue_jitter},
          {"saturation_jitter", a.saturation_jitter},
          {"value_jitter", a.value_jitter},
          {"shift_fraction", a.shift_fraction}};
}

fs::path absolute_or_empty(const fs::path& p) {
  if (p.empty()) return p;
  std::error_code ec;
  fs::path a = fs::absolute(p, ec);
  return ec ? p : a.lexically_normal();
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, _] : root.items()) {
    if (k != "model" && k != "train" && k != "data" && k != "eval" && k != "output") {
      throw ConfigError("unknown top-level key '" + k + "' (expected model, train, data, eval, output)");
    }
  }
  RunConfig cfg;

  Section model(root, "model");
  std::string variant = "cenet";
  model.get("variant", variant);
  cfg.model = ModelConfig::of(parse_variant(variant));
  model.get("num_classes", cfg.model.num_classes);
  model.get("width_multiplier", cfg.model.width_multiplier);
  model.get("enable_dac", cfg.model.enable_dac);
  model.get("enable_rmp", cfg.model.enable_rmp);
  model.get("input_channels", cfg.model.input_channels);
  model.finish();
  cfg.model.validate();
  if (cfg.model.input_channels != 3) throw ConfigError("'model.input_channels' must be 3 for RGB datasets");

  Section train(root, "train");
  train.get("base_lr", cfg.train.base_lr);
  train.get("momentum", cfg.train.momentum);
  train.get("weight_decay", cfg.train.weight_decay);
  train.get("batch_size", cfg.train.batch_size);
  train.get("max_epochs", cfg.train.max_epochs);
  train.get("poly_power", cfg.train.poly_power);
  train.get("seed", cfg.train.seed, 0);
  std::string loss = loss_name(cfg.train.loss);
  train.get("loss", loss);
  cfg.train.loss = parse_loss(loss);
  train.get("augment", cfg.train.augment);
  train.finish();

  Section data(root, "data");
  data.get("root", cfg.data.root, base_dir);
  data.get("eval_root", cfg.data.eval_root, base_dir);
  auto& a = cfg.train.augmentation;
  data.get("scale_range", a.scale_range);
  data.get("hue_jitter", a.hue_jitter);
  data.get("saturation_jitter", a.saturation_jitter);
  data.get("value_jitter", a.value_jitter);
  data.get("shift_fraction", a.shift_fraction);
  data.finish();
  cfg.train.validate();

  Section eval(root, "eval");
  eval.get("threshold", cfg.eval.threshold);
  eval.get("tta", cfg.eval.tta);
  eval.get("boundaries", cfg.eval.boundaries);
  eval.finish();
  if (!(cfg.eval.threshold > 0.0 && cfg.eval.threshold < 1.0)) throw ConfigError("'eval.threshold' must lie in (0, 1)");
  if (cfg.eval.boundaries > 0 && cfg.eval.boundaries + 1 != cfg.model.num_classes) {
    throw ConfigError("'eval.boundaries' needs num_classes == boundaries + 1 (layered labels)");
  }

  Section output(root, "output");
  output.get("dir", cfg.output.dir, base_dir);
  output.finish();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file_bytes(path);
  } catch (const Error&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_run_config(text, base);
}

std::string effective_config_json(const RunConfig& cfg) {
  json data = augment_json(cfg.train.augmentation);
  data["root"] = absolute_or_empty(cfg.data.root).string();
  data["eval_root"] = absolute_or_empty(cfg.data.eval_root).string();
  json doc = {{"model", model_json(cfg.model)},
              {"train", train_json(cfg.train)},
              {"data", data},
              {"eval", {{"threshold", cfg.eval.threshold}, {"tta", cfg.eval.tta}, {"boundaries", cfg.eval.boundaries}}},
              {"output", {{"dir", absolute_or_empty(cfg.output.dir).string()}}}};
  return doc.dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  const json doc = {{"model", model_json(cfg.model)},
                    {"train", train_json(cfg.train)},
                    {"augment", augment_json(cfg.train.augmentation)}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

}  // namespace cenet
