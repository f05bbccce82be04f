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

#include "cenet/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace cenet {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw IntegrityError(std::string("truncated tensor container: expected ") + what + " at byte offset " +
                           std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw ContractError(std::string(what) + " exceeds the 32-bit container limit");
  }
  return std::uint32_t(v);
}

}  // namespace

std::string encode_tensors(const std::vector<NamedTensor>& tensors) {
  std::string out(kTensorMagic);
  for (const auto& nt : tensors) {
    put_u32(out, checked_u32(nt.name.size(), "tensor name length"));
    out += nt.name;
    const Shape& shape = nt.tensor.shape();
    put_u32(out, checked_u32(shape.size(), "tensor rank"));
    for (std::size_t d : shape) put_u32(out, checked_u32(d, "tensor dimension"));
    for (float f : nt.tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

std::vector<NamedTensor> decode_tensors(std::string_view bytes) {
  if (bytes.substr(0, kTensorMagic.size()) != kTensorMagic) {
    throw IntegrityError("missing CETNSR1 magic header");
  }
  Reader r(bytes.substr(kTensorMagic.size()));
  std::vector<NamedTensor> out;
  while (!r.done()) {
    NamedTensor nt;
    const std::uint32_t name_len = r.u32("name length");
    nt.name = std::string(r.take(name_len, "tensor name"));
    const std::uint32_t rank = r.u32("rank");
    if (rank == 0) throw IntegrityError("tensor '" + nt.name + "' has rank 0");
    Shape shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = r.u32("dimension");
      if (d == 0) throw IntegrityError("tensor '" + nt.name + "' has a zero dimension");
      count *= d;
      if (count > bytes.size()) throw IntegrityError("tensor '" + nt.name + "' larger than the file");
    }
    std::vector<float> data(count);
    for (auto& f : data) f = std::bit_cast<float>(r.u32("tensor data"));
    nt.tensor = Tensor<float>(std::move(shape), std::move(data));
    out.push_back(std::move(nt));
  }
  return out;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  write_file_bytes(path, encode_tensors(tensors));
}

std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path) {
  return decode_tensors(read_file_bytes(path));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : bytes) {
    h ^= std::uint8_t(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace cenet
