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

#include <stdexcept>
#include <string>

namespace cenet {

/// Broad failure classes. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Verification = 1,
  Config = 2,
  Data = 3,
  Numeric = 4,
  Internal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Shape disagreement between operands.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Config, "dimension error: " + what) {}
};

// Index or range outside a tensor's extent.
class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& what) : Error(ErrorKind::Config, "bounds error: " + what) {}
};

// Invalid layer geometry or model configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, "configuration error: " + what) {}
};

// Caller violated an operation precondition.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::Config, "contract error: " + what) {}
};

// Use of a variable after its tape was cleared.
class LifecycleError : public Error {
 public:
  explicit LifecycleError(const std::string& what) : Error(ErrorKind::Internal, "lifecycle error: " + what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, "numeric error: " + what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, "data error: " + what) {}
};

// Malformed, truncated, or tampered file.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what) : Error(ErrorKind::Data, "integrity error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Data, "io error: " + what) {}
};

}  // namespace cenet
