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


#include "cenet/cenet.h"

#include <cstring>
#include <memory>
#include <string>

#include "cenet/commands.hpp"
#include "cenet/config.hpp"
#include "cenet/model.hpp"
#include "cenet/trainer.hpp"

struct cenet_model {
  cenet::Model model;
  cenet::ParamStore params;
};

namespace {

thread_local std::string g_last_error;

cenet::CommandIo to_io(const cenet_io* io) {
  cenet::CommandIo out;
  if (!io) return out;
  if (io->out) out.out = [fn = io->out, user = io->user](const std::string& s) { fn(s.c_str(), user); };
  if (io->err) out.err = [fn = io->err, user = io->user](const std::string& s) { fn(s.c_str(), user); };
  return out;
}

/// Runs `fn`, translating exceptions into a status and the thread's message.
template <typename Fn>
cenet_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return static_cast<cenet_status>(fn());
  } catch (const cenet::Error& e) {
    g_last_error = e.what();
    return static_cast<cenet_status>(static_cast<int>(e.kind()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CENET_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return CENET_INTERNAL_ERROR;
  }
}

std::filesystem::path opt_path(const char* p) { return p ? std::filesystem::path(p) : std::filesystem::path(); }

void require(const void* p, const char* what) {
  if (!p) throw cenet::ContractError(std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* cenet_version(void) { return "1.0.0"; }

const char* cenet_last_error(void) { return g_last_error.c_str(); }

cenet_status cenet_model_create(const char* run_config_json, cenet_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const cenet::ModelConfig mc = run_config_json ? cenet::parse_run_config(run_config_json).model
                                                  : cenet::ModelConfig::of(cenet::Variant::CeNet);
    cenet::Model model(mc);
    cenet::ParamStore params = model.init_params(0);
    *out = new cenet_model{std::move(model), std::move(params)};
    return 0;
  });
}

void cenet_model_destroy(cenet_model* model) { delete model; }

cenet_status cenet_model_init(cenet_model* model, uint64_t seed) {
  return guarded([&] {
    require(model, "model");
    model->params = model->model.init_params(seed);
    return 0;
  });
}

cenet_status cenet_model_load_weights(cenet_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    model->params = cenet::load_weights(model->model, path);
    return 0;
  });
}

cenet_status cenet_model_save_weights(const cenet_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    cenet::save_weights(model->params, path);
    return 0;
  });
}

size_t cenet_model_param_count(const cenet_model* model) { return model ? model->model.parameter_count() : 0; }

size_t cenet_model_num_classes(const cenet_model* model) { return model ? model->model.config().num_classes : 0; }

cenet_status cenet_model_summary(const cenet_model* model, size_t size, const cenet_io* io) {
  return guarded([&] {
    require(model, "model");
    const cenet::CommandIo cio = to_io(io);
    const std::string text = cenet::model_summary(model->model, size, size);
    std::size_t start = 0;
    while (start < text.size()) {
      const std::size_t end = text.find('\n', start);
      cio.print(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return 0;
  });
}

cenet_status cenet_model_predict(cenet_model* model, const float* image, size_t height, size_t width, int tta,
                                 float* probs) {
  return guarded([&] {
    require(model, "model");
    require(image, "image");
    require(probs, "probs");
    cenet::Tensor<float> x({3, height, width}, std::vector<float>(image, image + 3 * height * width));
    const cenet::Tensor<float> y = cenet::predict_image(model->model, model->params, x, tta != 0);
    std::memcpy(probs, y.raw(), y.size() * sizeof(float));
    return 0;
  });
}

cenet_status cenet_cmd_train(const char* config, const char* resume, const cenet_io* io) {
  return guarded([&] {
    require(config, "config");
    return cenet::cmd_train(config, opt_path(resume), to_io(io));
  });
}

cenet_status cenet_cmd_eval(const char* config, const char* weights, int tta, const cenet_io* io) {
  return guarded([&] {
    require(config, "config");
    return cenet::cmd_eval(config, opt_path(weights), tta, to_io(io));
  });
}

cenet_status cenet_cmd_predict(const char* config, const char* weights, const char* input, const char* output,
                               int tta, const cenet_io* io) {
  return guarded([&] {
    require(config, "config");
    require(input, "input");
    require(output, "output");
    return cenet::cmd_predict(config, opt_path(weights), input, output, tta, to_io(io));
  });
}

cenet_status cenet_cmd_gradcheck(uint64_t seed, const cenet_io* io) {
  return guarded([&] { return cenet::cmd_gradcheck(seed, to_io(io)); });
}

cenet_status cenet_cmd_rf_report(const cenet_io* io) {
  return guarded([&] { return cenet::cmd_rf_report(to_io(io)); });
}

cenet_status cenet_cmd_summary(const char* config, size_t size, const cenet_io* io) {
  return guarded([&] { return cenet::cmd_summary(opt_path(config), size, to_io(io)); });
}

cenet_status cenet_cmd_make_synthetic(const char* output, size_t count, size_t size, uint64_t seed, int multiscale,
                                      const cenet_io* io) {
  return guarded([&] {
    require(output, "output");
    return cenet::cmd_make_synthetic(output, count, size, seed, multiscale != 0, to_io(io));
  });
}

cenet_status cenet_cmd_crop(const char* input, const char* output, size_t size, size_t window, const cenet_io* io) {
  return guarded([&] {
    require(input, "input");
    require(output, "output");
    return cenet::cmd_crop(input, output, size, window, to_io(io));
  });
}

}  // extern "C"
