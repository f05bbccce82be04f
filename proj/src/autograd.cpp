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

#include "cenet/autograd.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace cenet {

// ---------------------------------------------------------------------------
// Tape

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(const Var<T>& v) const {
  if (v.tape_ != this) throw LifecycleError("variable belongs to a different tape");
  if (v.generation_ != generation_ || v.id_ >= nodes_.size()) {
    throw LifecycleError("variable refers to a cleared tape");
  }
  return nodes_[v.id_];
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(const Var<T>& v) {
  return const_cast<Node&>(static_cast<const Tape&>(*this).node(v));
}

template <typename T>
Var<T> Tape<T>::leaf(Tensor<T> value, bool requires_grad) {
  if (value.empty()) throw ContractError("leaf from an empty tensor");
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1, generation_);
}

template <typename T>
Var<T> Tape<T>::record(std::string op, Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn backward) {
  Node n;
  n.op = std::move(op);
  n.value = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const auto& in : inputs) {
    const Node& src = node(in);
    n.requires_grad = n.requires_grad || src.requires_grad;
    n.inputs.push_back(in.id_);
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1, generation_);
}

template <typename T>
const Tensor<T>& Tape<T>::grad_of(const Var<T>& v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor<T>::zeros(n.value.shape());
  return n.grad;
}

template <typename T>
void Tape<T>::backward(const Var<T>& root) {
  Node& r = node(root);
  if (r.value.size() != 1) {
    throw ContractError("backward root must be a scalar, got shape " + shape_str(r.value.shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor<T>();
  if (!r.requires_grad) return;
  r.grad = Tensor<T>::ones(r.value.shape());

  std::vector<const Tensor<T>*> in_values;
  std::vector<Tensor<T>*> in_grads;
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.backward) continue;
    in_values.clear();
    in_grads.clear();
    for (std::size_t id : n.inputs) {
      Node& src = nodes_[id];
      in_values.push_back(&src.value);
      if (src.requires_grad) {
        if (src.grad.empty()) src.grad = Tensor<T>::zeros(src.value.shape());
        in_grads.push_back(&src.grad);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    BackwardArgs<T> args{n.grad, n.value, in_values, in_grads};
    n.backward(args);
  }
}

template <typename T>
void Tape<T>::clear() {
  nodes_.clear();
  ++generation_;
}

// ---------------------------------------------------------------------------
// GEMM

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          const T* b, T beta, T* c) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using CMap = Eigen::Map<const Mat>;
  Eigen::Map<Mat> cm(c, Eigen::Index(m), Eigen::Index(n));
  if (beta == T(0)) {
    cm.setZero();
  } else if (beta != T(1)) {
    cm *= beta;
  }
  const auto M = Eigen::Index(m), N = Eigen::Index(n), K = Eigen::Index(k);
  if (!trans_a && !trans_b) {
    cm.noalias() += alpha * (CMap(a, M, K) * CMap(b, K, N));
  } else if (trans_a && !trans_b) {
    cm.noalias() += alpha * (CMap(a, K, M).transpose() * CMap(b, K, N));
  } else if (!trans_a && trans_b) {
    cm.noalias() += alpha * (CMap(a, M, K) * CMap(b, N, K).transpose());
  } else {
    cm.noalias() += alpha * (CMap(a, K, M).transpose() * CMap(b, N, K).transpose());
  }
}

// ---------------------------------------------------------------------------
// Elementwise

namespace {

const char* kind_name(ElementwiseKind k) {
  switch (k) {
    case ElementwiseKind::Add: return "add";
    case ElementwiseKind::Sub: return "sub";
    case ElementwiseKind::Mul: return "mul";
    case ElementwiseKind::Relu: return "relu";
    case ElementwiseKind::Exp: return "exp";
    case ElementwiseKind::Log: return "log";
    case ElementwiseKind::Sigmoid: return "sigmoid";
  }
  return "?";
}

bool is_binary(ElementwiseKind k) {
  return k == ElementwiseKind::Add || k == ElementwiseKind::Sub || k == ElementwiseKind::Mul;
}

// Maps each flat index of `a` to the flat index of the broadcast operand.
std::vector<std::size_t> broadcast_index(const Shape& a, const Shape& b) {
  if (b.size() > a.size()) {
    throw DimensionError("cannot broadcast " + shape_str(b) + " onto " + shape_str(a));
  }
  Shape padded(a.size() - b.size(), 1);
  padded.insert(padded.end(), b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (padded[i] != a[i] && padded[i] != 1) {
      throw DimensionError("cannot broadcast " + shape_str(b) + " onto " + shape_str(a));
    }
  }
  std::vector<std::size_t> strides(a.size(), 0);
  std::size_t s = 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    strides[i] = padded[i] == 1 ? 0 : s;
    s *= padded[i];
  }
  const std::size_t total = shape_numel(a);
  std::vector<std::size_t> map(total);
  std::vector<std::size_t> idx(a.size(), 0);
  std::size_t off = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    map[flat] = off;
    for (std::size_t d = a.size(); d-- > 0;) {
      ++idx[d];
      off += strides[d];
      if (idx[d] < a[d]) break;
      off -= strides[d] * idx[d];
      idx[d] = 0;
    }
  }
  return map;
}

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) {
    T z = std::exp(-x);
    return T(1) / (T(1) + z);
  }
  T z = std::exp(x);
  return z / (T(1) + z);
}

}  // namespace

template <typename T>
Var<T> elementwise(ElementwiseKind kind, const Var<T>& a, const Var<T>* b) {
  Tape<T>& tape = *a.tape();
  const Tensor<T>& av = a.value();
  Tensor<T> out(av.shape());
  const std::size_t n = av.size();

  if (is_binary(kind)) {
    if (!b) throw ContractError(std::string(kind_name(kind)) + " needs two operands");
    const Tensor<T>& bv = b->value();
    const bool same = bv.shape() == av.shape();
    std::vector<std::size_t> map;
    if (!same) map = broadcast_index(av.shape(), bv.shape());
    auto bi = [&](std::size_t i) { return same ? i : map[i]; };
    for (std::size_t i = 0; i < n; ++i) {
      const T x = av[i], y = bv[bi(i)];
      out[i] = kind == ElementwiseKind::Add ? x + y : kind == ElementwiseKind::Sub ? x - y : x * y;
    }
    auto fn = [kind, same, map = std::move(map)](const BackwardArgs<T>& g) {
      const Tensor<T>& gy = g.grad_out;
      const std::size_t total = gy.size();
      auto bi = [&](std::size_t i) { return same ? i : map[i]; };
      if (Tensor<T>* ga = g.grads[0]) {
        for (std::size_t i = 0; i < total; ++i) {
          (*ga)[i] += kind == ElementwiseKind::Mul ? gy[i] * (*g.inputs[1])[bi(i)] : gy[i];
        }
      }
      if (Tensor<T>* gb = g.grads[1]) {
        for (std::size_t i = 0; i < total; ++i) {
          T d = kind == ElementwiseKind::Add ? gy[i]
                : kind == ElementwiseKind::Sub ? -gy[i]
                                               : gy[i] * (*g.inputs[0])[i];
          (*gb)[bi(i)] += d;
        }
      }
    };
    return tape.record(kind_name(kind), std::move(out), {a, *b}, std::move(fn));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const T x = av[i];
    switch (kind) {
      case ElementwiseKind::Relu: out[i] = x > T(0) ? x : T(0); break;
      case ElementwiseKind::Exp: out[i] = std::exp(x); break;
      case ElementwiseKind::Log: out[i] = std::log(std::max(x, T(kLogClamp))); break;
      case ElementwiseKind::Sigmoid: out[i] = sigmoid_scalar(x); break;
      default: break;
    }
  }
  auto fn = [kind](const BackwardArgs<T>& g) {
    Tensor<T>& ga = *g.grads[0];
    const Tensor<T>& x = *g.inputs[0];
    const Tensor<T>& y = g.out;
    const Tensor<T>& gy = g.grad_out;
    for (std::size_t i = 0; i < gy.size(); ++i) {
      switch (kind) {
        case ElementwiseKind::Relu: ga[i] += x[i] > T(0) ? gy[i] : T(0); break;
        case ElementwiseKind::Exp: ga[i] += gy[i] * y[i]; break;
        // Clamped region has zero slope.
        case ElementwiseKind::Log: ga[i] += x[i] > T(kLogClamp) ? gy[i] / x[i] : T(0); break;
        case ElementwiseKind::Sigmoid: ga[i] += gy[i] * y[i] * (T(1) - y[i]); break;
        default: break;
      }
    }
  };
  return tape.record(kind_name(kind), std::move(out), {a}, std::move(fn));
}

template <typename T>
Var<T> affine(const Var<T>& a, T alpha, T beta) {
  const Tensor<T>& av = a.value();
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = alpha * av[i] + beta;
  return a.tape()->record("affine", std::move(out), {a}, [alpha](const BackwardArgs<T>& g) {
    Tensor<T>& ga = *g.grads[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += alpha * g.grad_out[i];
  });
}

template <typename T>
Var<T> add_n(const std::vector<Var<T>>& terms) {
  if (terms.empty()) throw ContractError("add_n of zero terms");
  const Shape& shape = terms[0].shape();
  Tensor<T> out(shape);
  for (const auto& t : terms) {
    if (t.shape() != shape) {
      throw DimensionError("add_n operands " + shape_str(shape) + " and " + shape_str(t.shape()));
    }
    out += t.value();
  }
  return terms[0].tape()->record("add_n", std::move(out), terms, [](const BackwardArgs<T>& g) {
    for (Tensor<T>* gi : g.grads) {
      if (gi) *gi += g.grad_out;
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions

namespace {

struct ReducePlan {
  Shape out_shape;
  std::vector<std::size_t> out_index;  // per input flat index
  std::size_t group = 1;               // elements folded into each output
};

ReducePlan plan_reduce(const Shape& in, std::vector<std::size_t> axes, bool keep_dims) {
  if (axes.empty()) {
    axes.resize(in.size());
    std::iota(axes.begin(), axes.end(), 0);
  }
  std::vector<bool> reduced(in.size(), false);
  for (std::size_t ax : axes) {
    if (ax >= in.size()) {
      throw DimensionError("axis " + std::to_string(ax) + " out of range for shape " + shape_str(in));
    }
    reduced[ax] = true;
  }
  ReducePlan plan;
  Shape kept(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    kept[i] = reduced[i] ? 1 : in[i];
    if (reduced[i]) plan.group *= in[i];
  }
  if (keep_dims) {
    plan.out_shape = kept;
  } else {
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!reduced[i]) plan.out_shape.push_back(in[i]);
    }
    if (plan.out_shape.empty()) plan.out_shape = {1};
  }
  std::vector<std::size_t> strides(in.size(), 0);
  std::size_t s = 1;
  for (std::size_t i = in.size(); i-- > 0;) {
    strides[i] = reduced[i] ? 0 : s;
    s *= kept[i];
  }
  const std::size_t total = shape_numel(in);
  plan.out_index.resize(total);
  std::vector<std::size_t> idx(in.size(), 0);
  std::size_t off = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    plan.out_index[flat] = off;
    for (std::size_t d = in.size(); d-- > 0;) {
      ++idx[d];
      off += strides[d];
      if (idx[d] < in[d]) break;
      off -= strides[d] * idx[d];
      idx[d] = 0;
    }
  }
  return plan;
}

template <typename T>
std::vector<std::size_t> argmax_with(const Tensor<T>& a, const ReducePlan& plan) {
  const std::size_t outs = shape_numel(plan.out_shape);
  std::vector<std::size_t> arg(outs, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t o = plan.out_index[i];
    if (arg[o] == std::numeric_limits<std::size_t>::max() || a[i] > a[arg[o]]) arg[o] = i;
  }
  return arg;
}

}  // namespace

template <typename T>
std::vector<std::size_t> reduce_argmax(const Tensor<T>& a, const std::vector<std::size_t>& axes) {
  if (a.empty()) throw ContractError("reduce over an empty tensor");
  return argmax_with(a, plan_reduce(a.shape(), axes, true));
}

template <typename T>
Var<T> reduce(ReduceKind kind, const Var<T>& a, const std::vector<std::size_t>& axes, bool keep_dims) {
  const Tensor<T>& av = a.value();
  if (av.empty()) throw ContractError("reduce over an empty tensor");
  ReducePlan plan = plan_reduce(av.shape(), axes, keep_dims);
  Tensor<T> out(plan.out_shape);

  if (kind == ReduceKind::Max) {
    std::vector<std::size_t> arg = argmax_with(av, plan);
    for (std::size_t o = 0; o < arg.size(); ++o) out[o] = av[arg[o]];
    return a.tape()->record("reduce_max", std::move(out), {a}, [arg = std::move(arg)](const BackwardArgs<T>& g) {
      Tensor<T>& ga = *g.grads[0];
      for (std::size_t o = 0; o < arg.size(); ++o) ga[arg[o]] += g.grad_out[o];
    });
  }

  for (std::size_t i = 0; i < av.size(); ++i) out[plan.out_index[i]] += av[i];
  const T scale = kind == ReduceKind::Mean ? T(1) / T(plan.group) : T(1);
  if (kind == ReduceKind::Mean) {
    for (auto& v : out.data()) v *= scale;
  }
  auto index = std::make_shared<std::vector<std::size_t>>(std::move(plan.out_index));
  return a.tape()->record(kind == ReduceKind::Sum ? "reduce_sum" : "reduce_mean", std::move(out), {a},
                          [index, scale](const BackwardArgs<T>& g) {
                            Tensor<T>& ga = *g.grads[0];
                            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += scale * g.grad_out[(*index)[i]];
                          });
}

// ---------------------------------------------------------------------------
// Matmul

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    throw DimensionError("matmul of " + shape_str(av.shape()) + " and " + shape_str(bv.shape()));
  }
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor<T> out({m, n});
  gemm<T>(false, false, m, n, k, T(1), av.raw(), bv.raw(), T(0), out.raw());
  return a.tape()->record("matmul", std::move(out), {a, b}, [m, k, n](const BackwardArgs<T>& g) {
    if (Tensor<T>* ga = g.grads[0]) {
      gemm<T>(false, true, m, k, n, T(1), g.grad_out.raw(), g.inputs[1]->raw(), T(1), ga->raw());
    }
    if (Tensor<T>* gb = g.grads[1]) {
      gemm<T>(true, false, k, n, m, T(1), g.inputs[0]->raw(), g.grad_out.raw(), T(1), gb->raw());
    }
  });
}

// ---------------------------------------------------------------------------
// Shape ops

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  Tensor<T> out = a.value().reshaped(std::move(shape));
  return a.tape()->record("reshape", std::move(out), {a}, [](const BackwardArgs<T>& g) {
    Tensor<T>& ga = *g.grads[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g.grad_out[i];
  });
}

template <typename T>
Var<T> transpose2d(const Var<T>& a) {
  const Tensor<T>& av = a.value();
  if (av.rank() != 2) throw DimensionError("transpose2d needs rank 2, got " + shape_str(av.shape()));
  const std::size_t r = av.dim(0), c = av.dim(1);
  Tensor<T> out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return a.tape()->record("transpose2d", std::move(out), {a}, [r, c](const BackwardArgs<T>& g) {
    Tensor<T>& ga = *g.grads[0];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g.grad_out[j * r + i];
  });
}

template <typename T>
Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t start, std::size_t length) {
  const Tensor<T>& av = a.value();
  const Shape& in = av.shape();
  if (axis >= in.size()) throw BoundsError("slice axis " + std::to_string(axis) + " for shape " + shape_str(in));
  if (length == 0 || start + length > in[axis]) {
    throw BoundsError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) + ") on axis " +
                      std::to_string(axis) + " of shape " + shape_str(in));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= in[i];
  for (std::size_t i = axis + 1; i < in.size(); ++i) inner *= in[i];
  Shape os = in;
  os[axis] = length;
  Tensor<T> out(os);
  const std::size_t extent = in[axis];
  for (std::size_t o = 0; o < outer; ++o) {
    const T* src = av.raw() + (o * extent + start) * inner;
    std::copy(src, src + length * inner, out.raw() + o * length * inner);
  }
  return a.tape()->record("slice", std::move(out), {a}, [outer, inner, extent, start, length](const BackwardArgs<T>& g) {
    Tensor<T>& ga = *g.grads[0];
    for (std::size_t o = 0; o < outer; ++o) {
      T* dst = ga.raw() + (o * extent + start) * inner;
      const T* src = g.grad_out.raw() + o * length * inner;
      for (std::size_t i = 0; i < length * inner; ++i) dst[i] += src[i];
    }
  });
}

template <typename T>
Var<T> pad_zero(const Var<T>& a, std::size_t top, std::size_t bottom, std::size_t left, std::size_t right) {
  const Tensor<T>& av = a.value();
  if (av.rank() < 2) throw DimensionError("pad_zero needs rank >= 2, got " + shape_str(av.shape()));
  Shape os = av.shape();
  const std::size_t h = os[os.size() - 2], w = os[os.size() - 1];
  const std::size_t oh = h + top + bottom, ow = w + left + right;
  os[os.size() - 2] = oh;
  os[os.size() - 1] = ow;
  const std::size_t planes = av.size() / (h * w);
  Tensor<T> out(os);
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out[(p * oh + y + top) * ow + x + left] = av[(p * h + y) * w + x];
  return a.tape()->record("pad_zero", std::move(out), {a}, [=](const BackwardArgs<T>& g) {
    Tensor<T>& ga = *g.grads[0];
    for (std::size_t p = 0; p < planes; ++p)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) ga[(p * h + y) * w + x] += g.grad_out[(p * oh + y + top) * ow + x + left];
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  const Shape& s0 = parts[0].shape();
  if (s0.size() != 4) throw DimensionError("concat_channels needs NCHW, got " + shape_str(s0));
  std::vector<std::size_t> chans;
  std::size_t total_c = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != 4 || s[0] != s0[0] || s[2] != s0[2] || s[3] != s0[3]) {
      throw DimensionError("concat_channels of " + shape_str(s0) + " and " + shape_str(s));
    }
    chans.push_back(s[1]);
    total_c += s[1];
  }
  const std::size_t n = s0[0], plane = s0[2] * s0[3];
  Tensor<T> out({n, total_c, s0[2], s0[3]});
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor<T>& pv = parts[k].value();
    for (std::size_t b = 0; b < n; ++b) {
      const T* src = pv.raw() + b * chans[k] * plane;
      std::copy(src, src + chans[k] * plane, out.raw() + (b * total_c + off) * plane);
    }
    off += chans[k];
  }
  return parts[0].tape()->record("concat_channels", std::move(out), parts,
                                 [chans, total_c, n, plane](const BackwardArgs<T>& g) {
                                   std::size_t off = 0;
                                   for (std::size_t k = 0; k < chans.size(); ++k) {
                                     if (Tensor<T>* gk = g.grads[k]) {
                                       for (std::size_t b = 0; b < n; ++b) {
                                         const T* src = g.grad_out.raw() + (b * total_c + off) * plane;
                                         T* dst = gk->raw() + b * chans[k] * plane;
                                         for (std::size_t i = 0; i < chans[k] * plane; ++i) dst[i] += src[i];
                                       }
                                     }
                                     off += chans[k];
                                   }
                                 });
}

#define CENET_INSTANTIATE(T)                                                                              \
  template class Tape<T>;                                                                                 \
  template void gemm<T>(bool, bool, std::size_t, std::size_t, std::size_t, T, const T*, const T*, T, T*); \
  template Var<T> elementwise<T>(ElementwiseKind, const Var<T>&, const Var<T>*);                          \
  template Var<T> affine<T>(const Var<T>&, T, T);                                                         \
  template Var<T> add_n<T>(const std::vector<Var<T>>&);                                                   \
  template Var<T> reduce<T>(ReduceKind, const Var<T>&, const std::vector<std::size_t>&, bool);            \
  template std::vector<std::size_t> reduce_argmax<T>(const Tensor<T>&, const std::vector<std::size_t>&);  \
  template Var<T> matmul<T>(const Var<T>&, const Var<T>&);                                                \
  template Var<T> reshape<T>(const Var<T>&, Shape);                                                       \
  template Var<T> transpose2d<T>(const Var<T>&);                                                          \
  template Var<T> slice<T>(const Var<T>&, std::size_t, std::size_t, std::size_t);                         \
  template Var<T> pad_zero<T>(const Var<T>&, std::size_t, std::size_t, std::size_t, std::size_t);         \
  template Var<T> concat_channels<T>(const std::vector<Var<T>>&);

CENET_INSTANTIATE(float)
CENET_INSTANTIATE(double)

}  // namespace cenet
