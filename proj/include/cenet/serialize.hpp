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
#include <string>
#include <string_view>
#include <vector>

#include "cenet/tensor.hpp"

namespace cenet {

// Tensor container layout, all integers little-endian:
//
//   "CETNSR1\n"
//   repeated until end of file:
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, rank x u32 dims
//     prod(dims) x f32
inline constexpr std::string_view kTensorMagic = "CETNSR1\n";

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;
};

std::string encode_tensors(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_tensors(std::string_view bytes);

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

/// 64-bit FNV-1a digest, used for checkpoint integrity and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace cenet
