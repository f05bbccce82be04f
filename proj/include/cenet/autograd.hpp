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
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cenet/tensor.hpp"

namespace cenet {

template <typename T>
class Tape;

/// Handle to a node on a Tape. Cheap to copy; becomes invalid when the
/// owning tape is cleared or destroyed.
template <typename T>
class Var {
 public:
  Var() = default;

  const Tensor<T>& value() const;
  /// Accumulated gradient; zeros when nothing flowed into this node.
  const Tensor<T>& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

  std::size_t id() const noexcept { return id_; }
  Tape<T>* tape() const noexcept { return tape_; }
  bool valid() const noexcept;

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, std::size_t id, std::uint64_t generation) : tape_(tape), id_(id), generation_(generation) {}

  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
  std::uint64_t generation_ = 0;
};

/// What a backward rule sees. `grads[i]` is null when input i does not need
/// a gradient; otherwise rules accumulate into it with +=.
template <typename T>
struct BackwardArgs {
  const Tensor<T>& grad_out;
  const Tensor<T>& out;
  std::span<const Tensor<T>* const> inputs;
  std::span<Tensor<T>* const> grads;
};

/// Explicit per-forward-pass operation record for reverse-mode
/// differentiation. Records are appended in execution order, so node ids are
/// already a topological order of the graph.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(const BackwardArgs<T>&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> leaf(Tensor<T> value, bool requires_grad = true);
  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }

  /// Appends an operation result. The backward rule is dropped when no input
  /// requires a gradient.
  Var<T> record(std::string op, Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn backward);

  /// Reverse sweep from a single-element root. Resets previously accumulated
  /// gradients first, so repeated calls are idempotent.
  void backward(const Var<T>& root);

  /// Drops every record; all outstanding Vars become invalid at once.
  void clear();

  std::size_t size() const noexcept { return nodes_.size(); }
  std::uint64_t generation() const noexcept { return generation_; }
  const std::string& op_name(std::size_t id) const { return nodes_.at(id).op; }
  const std::vector<std::size_t>& inputs_of(std::size_t id) const { return nodes_.at(id).inputs; }

  const Tensor<T>& value_of(const Var<T>& v) const { return node(v).value; }
  const Tensor<T>& grad_of(const Var<T>& v);
  bool requires_grad_of(const Var<T>& v) const { return node(v).requires_grad; }

 private:
  struct Node {
    std::string op;
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  const Node& node(const Var<T>& v) const;
  Node& node(const Var<T>& v);

  // A deque keeps value references stable while new nodes are recorded.
  std::deque<Node> nodes_;
  std::uint64_t generation_ = 1;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  if (!tape_) throw LifecycleError("use of a null variable");
  return tape_->value_of(*this);
}

template <typename T>
const Tensor<T>& Var<T>::grad() const {
  if (!tape_) throw LifecycleError("use of a null variable");
  return tape_->grad_of(*this);
}

template <typename T>
bool Var<T>::requires_grad() const {
  if (!tape_) throw LifecycleError("use of a null variable");
  return tape_->requires_grad_of(*this);
}

template <typename T>
bool Var<T>::valid() const noexcept {
  return tape_ && tape_->generation() == generation_ && id_ < tape_->size();
}

// ---------------------------------------------------------------------------
// Differentiable primitives.

enum class ElementwiseKind { Add, Sub, Mul, Relu, Exp, Log, Sigmoid };
enum class ReduceKind { Sum, Mean, Max };

/// Lower bound applied to the input of log().
inline constexpr double kLogClamp = 1e-12;

/// Binary kinds broadcast `b` against `a`: b's shape is left-padded with 1s
/// to a's rank and every dim must equal a's or be 1. Unary kinds ignore `b`.
template <typename T>
Var<T> elementwise(ElementwiseKind kind, const Var<T>& a, const Var<T>* b = nullptr);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) { return elementwise(ElementwiseKind::Add, a, &b); }
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) { return elementwise(ElementwiseKind::Sub, a, &b); }
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) { return elementwise(ElementwiseKind::Mul, a, &b); }
template <typename T>
Var<T> relu(const Var<T>& a) { return elementwise(ElementwiseKind::Relu, a); }
template <typename T>
Var<T> exp(const Var<T>& a) { return elementwise(ElementwiseKind::Exp, a); }
template <typename T>
Var<T> log(const Var<T>& a) { return elementwise(ElementwiseKind::Log, a); }
template <typename T>
Var<T> sigmoid(const Var<T>& a) { return elementwise(ElementwiseKind::Sigmoid, a); }

/// y = alpha * a + beta
template <typename T>
Var<T> affine(const Var<T>& a, T alpha, T beta = T(0));

/// Sums a list of same-shaped variables in one record.
template <typename T>
Var<T> add_n(const std::vector<Var<T>>& terms);

/// Empty `axes` reduces over every axis. Max routes gradient to the first
/// maximal element of each reduced group.
template <typename T>
Var<T> reduce(ReduceKind kind, const Var<T>& a, const std::vector<std::size_t>& axes, bool keep_dims = false);

template <typename T>
Var<T> sum_all(const Var<T>& a) { return reduce(ReduceKind::Sum, a, {}); }

/// Flat argmax positions (into `a`) that reduce(Max, ...) would select.
template <typename T>
std::vector<std::size_t> reduce_argmax(const Tensor<T>& a, const std::vector<std::size_t>& axes);

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape);

template <typename T>
Var<T> transpose2d(const Var<T>& a);

/// Contiguous range [start, start + length) along `axis`.
template <typename T>
Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t start, std::size_t length);

/// Zero padding of the two trailing (spatial) axes.
template <typename T>
Var<T> pad_zero(const Var<T>& a, std::size_t top, std::size_t bottom, std::size_t left, std::size_t right);

/// Concatenation along axis 1 of rank-4 NCHW tensors.
template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts);

// Plain tensor helpers shared by ops and tests.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          const T* b, T beta, T* c);

}  // namespace cenet
