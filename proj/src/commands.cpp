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


#include "cenet/commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cenet/config.hpp"
#include "cenet/data.hpp"
#include "cenet/gradsuite.hpp"
#include "cenet/rf.hpp"
#include "cenet/serialize.hpp"
#include "cenet/trainer.hpp"

namespace cenet {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

template <typename Fn>
void write_text(const fs::path& path, Fn&& fill) {
  std::ostringstream os;
  fill(os);
  write_file_bytes(path, os.str());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// 0/255 for binary models, raw class indices otherwise.
Raster labels_raster(const LabelMap& m, std::size_t num_classes) {
  Raster r = mask_to_raster(m);
  if (num_classes == 1) {
    for (auto& p : r.pixels) p = p ? 255 : 0;
  }
  return r;
}

bool resolve_tta(int flag, const RunConfig& cfg) { return flag < 0 ? cfg.eval.tta : flag != 0; }

fs::path default_weights(const RunConfig& cfg, const fs::path& weights) {
  return weights.empty() ? cfg.output.dir / "weights.cetnsr" : weights;
}

}  // namespace

int cmd_train(const fs::path& config, const fs::path& resume, const CommandIo& io) {
  const RunConfig cfg = load_run_config(config);
  const Model model(cfg.model);
  const std::vector<Sample> data = load_dataset(cfg.data.root, [&](const std::string& w) { io.warn("warning: " + w); });
  if (data.empty()) throw DataError("no training samples under " + cfg.data.root.string());
  for (const auto& s : data) encode_targets<float>(std::span<const LabelMap>(&s.mask, 1), cfg.model.num_classes);

  const std::string hash = config_hash(cfg);
  ensure_dir(cfg.output.dir);
  write_file_bytes(cfg.output.dir / "effective-config.json", effective_config_json(cfg));

  TrainState state = resume.empty() ? init_train_state(model, cfg.train) : load_checkpoint(resume, model, hash);
  const std::size_t max_iter = total_iterations(data.size(), cfg.train);
  if (state.iter > max_iter) {
    throw ConfigError("checkpoint is at iteration " + std::to_string(state.iter) + " but the schedule ends at " +
                      std::to_string(max_iter));
  }
  io.print("training " + std::string(variant_name(cfg.model.variant)) + " on " + std::to_string(data.size()) +
           " samples, " + std::to_string(max_iter - state.iter) + " of " + std::to_string(max_iter) +
           " iterations to run");
  TrainOptions opts;
  opts.checkpoint_dir = cfg.output.dir;
  opts.config_hash = hash;
  opts.log = [&](const std::string& line) { io.print(line); };
  train(model, data, cfg.train, state, opts);

  save_weights(state.params, cfg.output.dir / "weights.cetnsr");
  write_text(cfg.output.dir / "history.csv", [&](std::ostream& os) { write_history_csv(os, state.history); });
  if (state.history.empty()) {
    io.print("no iterations run");
  } else {
    io.print("final loss " + fmt("%.6f", state.history.back().loss) + "; outputs in " + cfg.output.dir.string());
  }
  return 0;
}

int cmd_eval(const fs::path& config, const fs::path& weights, int tta, const CommandIo& io) {
  const RunConfig cfg = load_run_config(config);
  const Model model(cfg.model);
  ParamStore params = load_weights(model, default_weights(cfg, weights));
  const std::vector<Sample> data = load_dataset(cfg.eval_dir(), [&](const std::string& w) { io.warn("warning: " + w); });
  EvalOptions opts = cfg.eval;
  opts.tta = resolve_tta(tta, cfg);
  const EvalReport rep = evaluate(model, params, data, opts);

  ensure_dir(cfg.output.dir / "predictions");
  write_text(cfg.output.dir / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, rep.rows); });
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_pnm(cfg.output.dir / "predictions" / (data[i].id + ".pgm"),
              labels_raster(rep.predictions[i], cfg.model.num_classes));
  }
  for (const auto& note : rep.notes) io.warn("note: " + note);
  io.print("evaluated " + std::to_string(data.size()) + " images" + (opts.tta ? " with 8-way TTA" : ""));
  for (const auto& [metric, ms] : rep.summary) {
    io.print("  " + metric + ": " + fmt("%.6f", ms.mean) + " +- " + fmt("%.6f", ms.std));
  }
  if (rep.pooled_auc_defined) io.print("  auc (pooled): " + fmt("%.6f", rep.pooled_auc));
  return 0;
}

int cmd_predict(const fs::path& config, const fs::path& weights, const fs::path& input, const fs::path& output,
                int tta, const CommandIo& io) {
  const RunConfig cfg = load_run_config(config);
  const Model model(cfg.model);
  ParamStore params = load_weights(model, default_weights(cfg, weights));
  std::vector<std::pair<std::string, Tensor<float>>> images;
  if (fs::is_directory(input)) {
    images = load_images(input);
  } else {
    if (!fs::exists(input)) throw DataError("input " + input.string() + " does not exist");
    images.emplace_back(input.stem().string(), raster_to_image(read_raster(input)));
  }
  if (images.empty()) throw DataError("no images found in " + input.string());
  ensure_dir(output);
  const bool use_tta = resolve_tta(tta, cfg);
  for (const auto& [id, image] : images) {
    const Tensor<float> probs = predict_image(model, params, image, use_tta);
    write_pnm(output / (id + ".pgm"), labels_raster(probs_to_labels(probs, cfg.eval.threshold), cfg.model.num_classes));
  }
  io.print("wrote " + std::to_string(images.size()) + " mask(s) to " + output.string());
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, const CommandIo& io) {
  const auto results = run_gradient_suite(seed);
  bool ok = true;
  io.print("op                          worst rel. error  status");
  for (const auto& r : results) {
    char line[128];
    std::snprintf(line, sizeof line, "%-28s %16.3e  %s", r.op.c_str(), r.report.max_rel_error,
                  r.report.pass ? "ok" : "FAIL");
    io.print(line);
    if (!r.report.pass) {
      ok = false;
      io.warn("gradient check failed for " + r.op + ": " + r.report.describe());
    }
  }
  io.print(ok ? "all " + std::to_string(results.size()) + " ops pass" : "gradient check FAILED");
  return ok ? 0 : 1;
}

int cmd_rf_report(const CommandIo& io) {
  bool ok = true;
  io.print("DAC branches (3x3 atrous convs, rates 1/3/5, closing 1x1):");
  io.print("  branch    analytic RF  measured RF");
  for (const auto& e : dac_branch_fields()) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-9s %11zu  %11zu%s", e.name.c_str(), e.analytic.rf, e.measured,
                  e.analytic.rf == e.measured ? "" : "  MISMATCH");
    io.print(line);
    ok = ok && e.analytic.rf == e.measured;
  }
  io.print("");
  io.print("Encoder main path:");
  io.print("  stage     RF     stride");
  for (const auto& e : encoder_stage_fields()) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-9s %-6zu %zu", e.name.c_str(), e.analytic.rf, e.analytic.jump);
    io.print(line);
  }
  return ok ? 0 : 1;
}

int cmd_summary(const fs::path& config, std::size_t size, const CommandIo& io) {
  const ModelConfig mc = config.empty() ? ModelConfig::of(Variant::CeNet) : load_run_config(config).model;
  const Model model(mc);
  std::istringstream text(model_summary(model, size, size));
  for (std::string line; std::getline(text, line);) io.print(line);
  return 0;
}

int cmd_make_synthetic(const fs::path& output, std::size_t count, std::size_t size, std::uint64_t seed,
                       bool multiscale, const CommandIo& io) {
  SyntheticConfig sc;
  sc.count = count;
  sc.size = size;
  sc.seed = seed;
  sc.multiscale = multiscale;
  write_dataset(output, make_synthetic(sc));
  io.print("wrote " + std::to_string(count) + " " + (multiscale ? "multi-scale" : "disc") + " samples (" +
           std::to_string(size) + "x" + std::to_string(size) + ") to " + output.string());
  return 0;
}

int cmd_crop(const fs::path& input, const fs::path& output, std::size_t size, std::size_t window,
             const CommandIo& io) {
  if (size == 0 || window == 0) throw ConfigError("crop size and window must be >= 1");
  std::size_t n = 0;
  if (fs::is_directory(input / "masks")) {
    std::vector<Sample> cropped;
    for (const auto& s : load_dataset(input, [&](const std::string& w) { io.warn("warning: " + w); })) {
      const auto [r, c] = brightest_point(s.image, window);
      cropped.push_back(crop_around(s, r, c, size));
    }
    write_dataset(output, cropped);
    n = cropped.size();
  } else {
    ensure_dir(output / "images");
    for (const auto& [id, image] : load_images(input / "images")) {
      const auto [r, c] = brightest_point(image, window);
      Sample s{id, image, LabelMap(image.dim(1), image.dim(2))};
      write_pnm(output / "images" / (id + ".ppm"), image_to_raster(crop_around(s, r, c, size).image));
      ++n;
    }
  }
  io.print("cropped " + std::to_string(n) + " image(s) to " + std::to_string(size) + "x" + std::to_string(size));
  return 0;
}

}  // namespace cenet
