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


// Command-line front end. Talks to the toolkit only through the C API.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cenet/cenet.h"

namespace {

void write_line(const char* text, void* stream) {
  std::fputs(text, static_cast<std::FILE*>(stream));
  std::fputc('\n', static_cast<std::FILE*>(stream));
}

void write_err(const char* text, void*) { write_line(text, stderr); }

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int finish(cenet_status status) {
  if (status != CENET_OK) {
    const char* msg = cenet_last_error();
    if (msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
  }
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cenet: context-encoder segmentation networks on the CPU"};
  app.set_version_flag("--version", std::string(cenet_version()));
  app.require_subcommand(1);
  cenet_io io{write_line, write_err, stdout};

  std::string config, resume, weights, input, output;
  bool tta = false, no_tta = false, multiscale = false;
  std::size_t size = 256, count = 8, window = 51;
  std::uint64_t seed = 0;

  auto* train = app.add_subcommand("train", "Train a model from a run configuration");
  train->add_option("--config,-c", config, "Run configuration JSON")->required();
  train->add_option("--resume", resume, "Checkpoint sidecar (checkpoint.json) or its directory");

  auto* eval = app.add_subcommand("eval", "Evaluate weights on the configured dataset; writes metrics.csv");
  eval->add_option("--config,-c", config, "Run configuration JSON")->required();
  eval->add_option("--weights,-w", weights, "Weights file (default <output>/weights.cetnsr)");
  eval->add_flag("--tta", tta, "Average the eight flipped/transposed predictions");
  eval->add_flag("--no-tta", no_tta, "Disable test-time augmentation even if the config enables it");

  auto* predict = app.add_subcommand("predict", "Write predicted masks for an image or a directory of images");
  predict->add_option("--config,-c", config, "Run configuration JSON")->required();
  predict->add_option("--weights,-w", weights, "Weights file (default <output>/weights.cetnsr)");
  predict->add_option("--input,-i", input, "Image file or directory")->required();
  predict->add_option("--output,-o", output, "Directory for predicted masks")->required();
  predict->add_flag("--tta", tta, "Average the eight flipped/transposed predictions");
  predict->add_flag("--no-tta", no_tta, "Disable test-time augmentation");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
  gradcheck->add_option("--seed", seed, "Seed for the random test points");

  app.add_subcommand("rf-report", "Receptive fields of the DAC branches and encoder stages");

  auto* summary = app.add_subcommand("summary", "Layer shapes and parameter counts");
  summary->add_option("--config,-c", config, "Run configuration JSON (default: CE-Net)");
  summary->add_option("--size", size, "Square input size used for the shape trace")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("make-synthetic", "Write a seeded synthetic disc dataset");
  synth->add_option("--output,-o", output, "Dataset root")->required();
  synth->add_option("--count", count, "Number of samples")->check(CLI::PositiveNumber);
  synth->add_option("--size", size, "Image side length")->check(CLI::Range(8, 4096));
  synth->add_option("--seed", seed, "Seed");
  synth->add_flag("--multiscale", multiscale, "Several discs with radii 2-20 px per image");

  auto* crop = app.add_subcommand("crop", "Crop around the brightest region of each image");
  crop->add_option("--input,-i", input, "Dataset root (images/ and optional masks/)")->required();
  crop->add_option("--output,-o", output, "Output dataset root")->required();
  crop->add_option("--size", size, "Crop side length")->check(CLI::PositiveNumber);
  crop->add_option("--window", window, "Box-filter side used to find the brightest point")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(CENET_CONFIG_ERROR);
  }

  const int tta_flag = tta ? 1 : (no_tta ? 0 : -1);
  if (tta && no_tta) {
    std::fprintf(stderr, "error: --tta and --no-tta are mutually exclusive\n");
    return CENET_CONFIG_ERROR;
  }
  if (*train) return finish(cenet_cmd_train(config.c_str(), or_null(resume), &io));
  if (*eval) return finish(cenet_cmd_eval(config.c_str(), or_null(weights), tta_flag, &io));
  if (*predict) {
    return finish(cenet_cmd_predict(config.c_str(), or_null(weights), input.c_str(), output.c_str(), tta_flag, &io));
  }
  if (*gradcheck) return finish(cenet_cmd_gradcheck(seed, &io));
  if (app.got_subcommand("rf-report")) return finish(cenet_cmd_rf_report(&io));
  if (*summary) return finish(cenet_cmd_summary(or_null(config), size, &io));
  if (*synth) return finish(cenet_cmd_make_synthetic(output.c_str(), count, size, seed, multiscale ? 1 : 0, &io));
  if (*crop) {
    if (!crop->count("--size")) size = 800;
    return finish(cenet_cmd_crop(input.c_str(), output.c_str(), size, window, &io));
  }
  return CENET_CONFIG_ERROR;
}
