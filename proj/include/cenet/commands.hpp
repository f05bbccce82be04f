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
#include <string>

namespace cenet {

/// Line-oriented sinks for command output.
struct CommandIo {
  std::function<void(const std::string&)> out;
  std::function<void(const std::string&)> err;

  void print(const std::string& s) const {
    if (out) out(s);
  }
  void warn(const std::string& s) const {
    if (err) err(s);
  }
};

// Each command returns 0 on success or 1 on a failed verification; errors
// propagate as cenet::Error.

int cmd_train(const std::filesystem::path& config, const std::filesystem::path& resume, const CommandIo& io);

/// tta: -1 follows the config, 0 off, 1 on. Empty weights means
/// <output>/weights.cetnsr.
int cmd_eval(const std::filesystem::path& config, const std::filesystem::path& weights, int tta,
             const CommandIo& io);

/// `input` is an image file or a directory of images; masks go to `output`.
int cmd_predict(const std::filesystem::path& config, const std::filesystem::path& weights,
                const std::filesystem::path& input, const std::filesystem::path& output, int tta,
                const CommandIo& io);

int cmd_gradcheck(std::uint64_t seed, const CommandIo& io);
int cmd_rf_report(const CommandIo& io);
/// Empty config means the default CE-Net.
int cmd_summary(const std::filesystem::path& config, std::size_t size, const CommandIo& io);

int cmd_make_synthetic(const std::filesystem::path& output, std::size_t count, std::size_t size, std::uint64_t seed,
                       bool multiscale, const CommandIo& io);

/// Crops each image (and mask) to size x size around its brightest
/// box-filtered point.
int cmd_crop(const std::filesystem::path& input, const std::filesystem::path& output, std::size_t size,
             std::size_t window, const CommandIo& io);

}  // namespace cenet
