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

#include "cenet/nn.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace cenet {

namespace {

std::string pair_str(const std::array<std::size_t, 2>& a) {
  return std::to_string(a[0]) + "x" + std::to_string(a[1]);
}

}  // namespace

std::size_t ConvSpec::output_extent(std::size_t in, std::size_t axis) const {
  const long long span = (long long)dilation * ((long long)kernel[axis] - 1) + 1;
  const long long num = (long long)in + 2 * (long long)padding[axis] - span;
  if (stride[axis] == 0 || dilation == 0 || kernel[axis] == 0 || num < 0) {
    throw ConfigError("convolution " + str() + " yields output size < 1 for input extent " + std::to_string(in));
  }
  return std::size_t(num / (long long)stride[axis]) + 1;
}

std::string ConvSpec::str() const {
  std::ostringstream os;
  os << "conv(" << in_channels << "->" << out_channels << ", k=" << pair_str(kernel) << ", s=" << pair_str(stride)
     << ", p=" << pair_str(padding) << ", r=" << dilation << ")";
  return os.str();
}

ConvSpec conv_spec(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
                   std::size_t padding, std::size_t dilation) {
  return ConvSpec{in_channels, out_channels, {kernel, kernel}, {stride, stride}, {padding, padding}, dilation};
}

std::size_t TransposedConvSpec::output_extent(std::size_t in, std::size_t axis) const {
  const long long v = ((long long)in - 1) * (long long)stride[axis] - 2 * (long long)padding[axis] +
                      (long long)kernel[axis] + (long long)output_padding[axis];
  if (stride[axis] == 0 || kernel[axis] == 0 || output_padding[axis] >= stride[axis] || v < 1) {
    throw ConfigError("transposed convolution " + str() + " has invalid geometry for input extent " +
                      std::to_string(in));
  }
  return std::size_t(v);
}

std::string TransposedConvSpec::str() const {
  std::ostringstream os;
  os << "tconv(" << in_channels << "->" << out_channels << ", k=" << pair_str(kernel) << ", s=" << pair_str(stride)
     << ", p=" << pair_str(padding) << ", op=" << pair_str(output_padding) << ")";
  return os.str();
}

TransposedConvSpec transposed_conv_spec(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                                        std::size_t stride, std::size_t padding, std::size_t output_padding) {
  return TransposedConvSpec{in_channels,        out_channels,       {kernel, kernel},
                            {stride, stride},   {padding, padding}, {output_padding, output_padding}};
}

std::size_t PoolSpec::output_extent(std::size_t in, std::size_t axis) const {
  if (kernel[axis] == 0 || stride[axis] == 0 || padding[axis] >= kernel[axis] ||
      kernel[axis] > in + 2 * padding[axis]) {
    throw ConfigError("max pool " + str() + " does not fit input extent " + std::to_string(in));
  }
  return (in + 2 * padding[axis] - kernel[axis]) / stride[axis] + 1;
}

std::string PoolSpec::str() const {
  return "maxpool(k=" + pair_str(kernel) + ", s=" + pair_str(stride) + ", p=" + pair_str(padding) + ")";
}

PoolSpec pool_spec(std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (stride == 0) stride = kernel;
  return PoolSpec{{kernel, kernel}, {stride, stride}, {padding, padding}};
}

// ---------------------------------------------------------------------------
// Patch unfolding. Columns are laid out [C*kh*kw, N*Ho*Wo] with column index
// n*Ho*Wo + oy*Wo + ox so a whole batch lowers to one GEMM.

namespace {

struct Geometry {
  std::size_t n, c, h, w;  // image side
  std::size_t kh, kw, sh, sw, ph, pw, dil;
  std::size_t oh, ow;  // column grid side
};

template <typename T>
void im2col(const T* x, const Geometry& g, T* cols) {
  const std::size_t plane = g.oh * g.ow, ncols = g.n * plane;
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        T* row = cols + ((c * g.kh + i) * g.kw + j) * ncols;
        for (std::size_t b = 0; b < g.n; ++b) {
          const T* img = x + (b * g.c + c) * g.h * g.w;
          T* dst = row + b * plane;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const long long iy = (long long)(oy * g.sh + i * g.dil) - (long long)g.ph;
            T* d = dst + oy * g.ow;
            if (iy < 0 || iy >= (long long)g.h) {
              std::fill(d, d + g.ow, T(0));
              continue;
            }
            const T* src = img + std::size_t(iy) * g.w;
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const long long ix = (long long)(ox * g.sw + j * g.dil) - (long long)g.pw;
              d[ox] = (ix < 0 || ix >= (long long)g.w) ? T(0) : src[ix];
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into the image.
template <typename T>
void col2im(const T* cols, const Geometry& g, T* x) {
  const std::size_t plane = g.oh * g.ow, ncols = g.n * plane;
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const T* row = cols + ((c * g.kh + i) * g.kw + j) * ncols;
        for (std::size_t b = 0; b < g.n; ++b) {
          T* img = x + (b * g.c + c) * g.h * g.w;
          const T* src = row + b * plane;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const long long iy = (long long)(oy * g.sh + i * g.dil) - (long long)g.ph;
            if (iy < 0 || iy >= (long long)g.h) continue;
            T* dst = img + std::size_t(iy) * g.w;
            const T* s = src + oy * g.ow;
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const long long ix = (long long)(ox * g.sw + j * g.dil) - (long long)g.pw;
              if (ix >= 0 && ix < (long long)g.w) dst[ix] += s[ox];
            }
          }
        }
      }
    }
  }
}

// [N,C,P] <-> [C, N*P]
template <typename T>
void to_channel_major(const T* x, std::size_t n, std::size_t c, std::size_t p, T* out) {
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) std::copy(x + (b * c + ch) * p, x + (b * c + ch + 1) * p, out + ch * n * p + b * p);
}

template <typename T>
void from_channel_major(const T* m, std::size_t n, std::size_t c, std::size_t p, T* out) {
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) std::copy(m + ch * n * p + b * p, m + ch * n * p + (b + 1) * p, out + (b * c + ch) * p);
}

void check_rank4(const Shape& s, const char* what) {
  if (s.size() != 4) throw DimensionError(std::string(what) + " expects NCHW input, got " + shape_str(s));
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>* b, const ConvSpec& spec) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  check_rank4(xs, "conv2d");
  if (xs[1] != spec.in_channels) {
    throw DimensionError("conv2d input " + shape_str(xs) + " does not match " + spec.str());
  }
  const Shape want_w{spec.out_channels, spec.in_channels, spec.kernel[0], spec.kernel[1]};
  if (ws != want_w) throw DimensionError("conv2d weight " + shape_str(ws) + ", expected " + shape_str(want_w));
  if (b && b->shape() != Shape{spec.out_channels}) {
    throw DimensionError("conv2d bias " + shape_str(b->shape()) + ", expected [" + std::to_string(spec.out_channels) + "]");
  }
  const Geometry g{xs[0], xs[1], xs[2], xs[3], spec.kernel[0], spec.kernel[1], spec.stride[0], spec.stride[1],
                   spec.padding[0], spec.padding[1], spec.dilation, spec.output_extent(xs[2], 0),
                   spec.output_extent(xs[3], 1)};
  const std::size_t cout = spec.out_channels, ckk = g.c * g.kh * g.kw, plane = g.oh * g.ow, ncols = g.n * plane;

  std::vector<T> cols(ckk * ncols);
  im2col(x.value().raw(), g, cols.data());
  std::vector<T> ym(cout * ncols);
  gemm<T>(false, false, cout, ncols, ckk, T(1), w.value().raw(), cols.data(), T(0), ym.data());
  if (b) {
    const Tensor<T>& bv = b->value();
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t i = 0; i < ncols; ++i) ym[o * ncols + i] += bv[o];
  }
  Tensor<T> out({g.n, cout, g.oh, g.ow});
  from_channel_major(ym.data(), g.n, cout, plane, out.raw());

  std::vector<Var<T>> inputs{x, w};
  if (b) inputs.push_back(*b);
  auto fn = [g, cout, ckk, plane, ncols](const BackwardArgs<T>& a) {
    std::vector<T> dy(cout * ncols);
    to_channel_major(a.grad_out.raw(), g.n, cout, plane, dy.data());
    if (a.grads.size() > 2 && a.grads[2]) {
      Tensor<T>& gb = *a.grads[2];
      for (std::size_t o = 0; o < cout; ++o) {
        T s = 0;
        for (std::size_t i = 0; i < ncols; ++i) s += dy[o * ncols + i];
        gb[o] += s;
      }
    }
    if (a.grads[1]) {
      std::vector<T> cols(ckk * ncols);
      im2col(a.inputs[0]->raw(), g, cols.data());
      gemm<T>(false, true, cout, ckk, ncols, T(1), dy.data(), cols.data(), T(1), a.grads[1]->raw());
    }
    if (a.grads[0]) {
      std::vector<T> dcols(ckk * ncols);
      gemm<T>(true, false, ckk, ncols, cout, T(1), a.inputs[1]->raw(), dy.data(), T(0), dcols.data());
      col2im(dcols.data(), g, a.grads[0]->raw());
    }
  };
  return x.tape()->record("conv2d", std::move(out), inputs, std::move(fn));
}

template <typename T>
Var<T> transposed_conv2d(const Var<T>& x, const Var<T>& w, const Var<T>* b, const TransposedConvSpec& spec) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  check_rank4(xs, "transposed_conv2d");
  if (xs[1] != spec.in_channels) {
    throw DimensionError("transposed_conv2d input " + shape_str(xs) + " does not match " + spec.str());
  }
  const Shape want_w{spec.in_channels, spec.out_channels, spec.kernel[0], spec.kernel[1]};
  if (ws != want_w) {
    throw DimensionError("transposed_conv2d weight " + shape_str(ws) + ", expected " + shape_str(want_w));
  }
  if (b && b->shape() != Shape{spec.out_channels}) {
    throw DimensionError("transposed_conv2d bias " + shape_str(b->shape()));
  }
  const std::size_t oh = spec.output_extent(xs[2], 0), ow = spec.output_extent(xs[3], 1);
  // The adjoint convolution maps the [Cout, oh, ow] output back onto the
  // [Cin, H, W] input grid.
  const Geometry g{xs[0], spec.out_channels, oh, ow, spec.kernel[0], spec.kernel[1], spec.stride[0],
                   spec.stride[1], spec.padding[0], spec.padding[1], 1, xs[2], xs[3]};
  const std::size_t cin = spec.in_channels, ckk = g.c * g.kh * g.kw, plane = g.oh * g.ow, ncols = g.n * plane;

  std::vector<T> xm(cin * ncols);
  to_channel_major(x.value().raw(), g.n, cin, plane, xm.data());
  std::vector<T> cols(ckk * ncols);
  gemm<T>(true, false, ckk, ncols, cin, T(1), w.value().raw(), xm.data(), T(0), cols.data());
  Tensor<T> out({g.n, g.c, oh, ow});
  col2im(cols.data(), g, out.raw());
  if (b) {
    const Tensor<T>& bv = b->value();
    for (std::size_t n = 0; n < g.n; ++n)
      for (std::size_t o = 0; o < g.c; ++o) {
        T* p = out.raw() + (n * g.c + o) * oh * ow;
        for (std::size_t i = 0; i < oh * ow; ++i) p[i] += bv[o];
      }
  }

  std::vector<Var<T>> inputs{x, w};
  if (b) inputs.push_back(*b);
  auto fn = [g, cin, ckk, plane, ncols](const BackwardArgs<T>& a) {
    const Tensor<T>& gy = a.grad_out;
    if (a.grads.size() > 2 && a.grads[2]) {
      Tensor<T>& gb = *a.grads[2];
      const std::size_t op = g.h * g.w;
      for (std::size_t n = 0; n < g.n; ++n)
        for (std::size_t o = 0; o < g.c; ++o) {
          T s = 0;
          const T* p = gy.raw() + (n * g.c + o) * op;
          for (std::size_t i = 0; i < op; ++i) s += p[i];
          gb[o] += s;
        }
    }
    std::vector<T> dcols(ckk * ncols);
    im2col(gy.raw(), g, dcols.data());
    if (a.grads[1]) {
      std::vector<T> xm(cin * ncols);
      to_channel_major(a.inputs[0]->raw(), g.n, cin, plane, xm.data());
      gemm<T>(false, true, cin, ckk, ncols, T(1), xm.data(), dcols.data(), T(1), a.grads[1]->raw());
    }
    if (a.grads[0]) {
      std::vector<T> dxm(cin * ncols);
      gemm<T>(false, false, cin, ncols, ckk, T(1), a.inputs[1]->raw(), dcols.data(), T(0), dxm.data());
      std::vector<T> dx(cin * ncols);
      from_channel_major(dxm.data(), g.n, cin, plane, dx.data());
      Tensor<T>& gx = *a.grads[0];
      for (std::size_t i = 0; i < dx.size(); ++i) gx[i] += dx[i];
    }
  };
  return x.tape()->record("transposed_conv2d", std::move(out), inputs, std::move(fn));
}

template <typename T>
Var<T> max_pool2d(const Var<T>& x, const PoolSpec& spec) {
  const Shape& xs = x.shape();
  check_rank4(xs, "max_pool2d");
  const std::size_t n = xs[0], c = xs[1], h = xs[2], w = xs[3];
  const std::size_t oh = spec.output_extent(h, 0), ow = spec.output_extent(w, 1);
  const Tensor<T>& xv = x.value();
  Tensor<T> out({n, c, oh, ow});
  auto arg = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t p = 0; p < n * c; ++p) {
    const T* img = xv.raw() + p * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const long long y0 = (long long)(oy * spec.stride[0]) - (long long)spec.padding[0];
        const long long x0 = (long long)(ox * spec.stride[1]) - (long long)spec.padding[1];
        std::size_t best = std::numeric_limits<std::size_t>::max();
        T best_v = T(0);
        for (std::size_t u = 0; u < spec.kernel[0]; ++u) {
          const long long iy = y0 + (long long)u;
          if (iy < 0 || iy >= (long long)h) continue;
          for (std::size_t v = 0; v < spec.kernel[1]; ++v) {
            const long long ix = x0 + (long long)v;
            if (ix < 0 || ix >= (long long)w) continue;
            const std::size_t idx = std::size_t(iy) * w + std::size_t(ix);
            if (best == std::numeric_limits<std::size_t>::max() || img[idx] > best_v) {
              best = idx;
              best_v = img[idx];
            }
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        out[o] = best_v;
        (*arg)[o] = p * h * w + best;
      }
    }
  }
  return x.tape()->record("max_pool2d", std::move(out), {x}, [arg](const BackwardArgs<T>& a) {
    Tensor<T>& gx = *a.grads[0];
    for (std::size_t o = 0; o < arg->size(); ++o) gx[(*arg)[o]] += a.grad_out[o];
  });
}

// ---------------------------------------------------------------------------
// Bilinear resize

namespace {

struct Taps {
  std::vector<std::size_t> lo, hi;
  std::vector<double> frac;
};

Taps make_taps(std::size_t in, std::size_t out) {
  Taps t;
  t.lo.resize(out);
  t.hi.resize(out);
  t.frac.resize(out);
  const double scale = double(in) / double(out);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (double(i) + 0.5) * scale - 0.5;
    if (src < 0) src = 0;
    std::size_t lo = std::min<std::size_t>(std::size_t(std::floor(src)), in - 1);
    t.lo[i] = lo;
    t.hi[i] = std::min(lo + 1, in - 1);
    t.frac[i] = src - double(lo);
  }
  return t;
}

template <typename T>
void resize_planes(const T* x, std::size_t planes, std::size_t h, std::size_t w, std::size_t oh, std::size_t ow,
                   const Taps& ty, const Taps& tx, T* out) {
  for (std::size_t p = 0; p < planes; ++p) {
    const T* img = x + p * h * w;
    T* dst = out + p * oh * ow;
    for (std::size_t i = 0; i < oh; ++i) {
      const T fy = T(ty.frac[i]);
      const T* r0 = img + ty.lo[i] * w;
      const T* r1 = img + ty.hi[i] * w;
      for (std::size_t j = 0; j < ow; ++j) {
        const T fx = T(tx.frac[j]);
        const T top = r0[tx.lo[j]] * (T(1) - fx) + r0[tx.hi[j]] * fx;
        const T bot = r1[tx.lo[j]] * (T(1) - fx) + r1[tx.hi[j]] * fx;
        dst[i * ow + j] = top * (T(1) - fy) + bot * fy;
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, std::size_t out_h, std::size_t out_w) {
  if (x.rank() < 2) throw DimensionError("resize needs rank >= 2, got " + shape_str(x.shape()));
  if (out_h == 0 || out_w == 0) throw ContractError("resize target must be at least 1x1");
  Shape os = x.shape();
  const std::size_t h = os[os.size() - 2], w = os[os.size() - 1];
  os[os.size() - 2] = out_h;
  os[os.size() - 1] = out_w;
  Tensor<T> out(os);
  resize_planes(x.raw(), x.size() / (h * w), h, w, out_h, out_w, make_taps(h, out_h), make_taps(w, out_w),
                out.raw());
  return out;
}

template <typename T>
Var<T> bilinear_upsample(const Var<T>& x, std::size_t out_h, std::size_t out_w) {
  const Shape& xs = x.shape();
  check_rank4(xs, "bilinear_upsample");
  Tensor<T> out = resize_bilinear(x.value(), out_h, out_w);
  const std::size_t h = xs[2], w = xs[3], planes = xs[0] * xs[1];
  auto ty = std::make_shared<Taps>(make_taps(h, out_h));
  auto tx = std::make_shared<Taps>(make_taps(w, out_w));
  return x.tape()->record("bilinear_upsample", std::move(out), {x},
                          [=](const BackwardArgs<T>& a) {
                            Tensor<T>& gx = *a.grads[0];
                            for (std::size_t p = 0; p < planes; ++p) {
                              T* g = gx.raw() + p * h * w;
                              const T* gy = a.grad_out.raw() + p * out_h * out_w;
                              for (std::size_t i = 0; i < out_h; ++i) {
                                const T fy = T(ty->frac[i]);
                                T* r0 = g + ty->lo[i] * w;
                                T* r1 = g + ty->hi[i] * w;
                                for (std::size_t j = 0; j < out_w; ++j) {
                                  const T fx = T(tx->frac[j]);
                                  const T d = gy[i * out_w + j];
                                  r0[tx->lo[j]] += d * (T(1) - fy) * (T(1) - fx);
                                  r0[tx->hi[j]] += d * (T(1) - fy) * fx;
                                  r1[tx->lo[j]] += d * fy * (T(1) - fx);
                                  r1[tx->hi[j]] += d * fy * fx;
                                }
                              }
                            }
                          });
}

// ---------------------------------------------------------------------------
// Batch norm

template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                    Tensor<T>& running_var, BnMode mode, double momentum, double eps) {
  const Shape& xs = x.shape();
  check_rank4(xs, "batch_norm2d");
  const std::size_t n = xs[0], c = xs[1], plane = xs[2] * xs[3], m = n * plane;
  const Shape cs{c};
  if (gamma.shape() != cs || beta.shape() != cs || running_mean.shape() != cs || running_var.shape() != cs) {
    throw DimensionError("batch_norm2d parameters must be [" + std::to_string(c) + "] for input " + shape_str(xs));
  }
  if (mode == BnMode::Train && m < 2) {
    throw ContractError("batch_norm2d in train mode needs N*H*W >= 2, got input " + shape_str(xs));
  }
  const Tensor<T>& xv = x.value();
  const Tensor<T>& gv = gamma.value();
  const Tensor<T>& bv = beta.value();

  auto mean = std::make_shared<std::vector<T>>(c);
  auto invstd = std::make_shared<std::vector<T>>(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    if (mode == BnMode::Train) {
      double s = 0, ss = 0;
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xv.raw() + (b * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) s += double(p[i]);
      }
      const double mu = s / double(m);
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xv.raw() + (b * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = double(p[i]) - mu;
          ss += d * d;
        }
      }
      const double var = ss / double(m);
      (*mean)[ch] = T(mu);
      (*invstd)[ch] = T(1.0 / std::sqrt(var + eps));
      running_mean[ch] = T((1.0 - momentum) * double(running_mean[ch]) + momentum * mu);
      running_var[ch] = T((1.0 - momentum) * double(running_var[ch]) + momentum * (ss / double(m - 1)));
    } else {
      (*mean)[ch] = running_mean[ch];
      (*invstd)[ch] = T(1.0 / std::sqrt(double(running_var[ch]) + eps));
    }
  }

  Tensor<T> out(xs);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* p = xv.raw() + (b * c + ch) * plane;
      T* q = out.raw() + (b * c + ch) * plane;
      const T mu = (*mean)[ch], is = (*invstd)[ch], gm = gv[ch], bt = bv[ch];
      for (std::size_t i = 0; i < plane; ++i) q[i] = gm * ((p[i] - mu) * is) + bt;
    }

  const bool train = mode == BnMode::Train;
  auto fn = [=](const BackwardArgs<T>& a) {
    const Tensor<T>& gy = a.grad_out;
    const Tensor<T>& xin = *a.inputs[0];
    const Tensor<T>& gam = *a.inputs[1];
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T mu = (*mean)[ch], is = (*invstd)[ch];
      double sum_dy = 0, sum_dy_xhat = 0;
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xin.raw() + (b * c + ch) * plane;
        const T* d = gy.raw() + (b * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          sum_dy += double(d[i]);
          sum_dy_xhat += double(d[i]) * double((p[i] - mu) * is);
        }
      }
      if (a.grads[1]) (*a.grads[1])[ch] += T(sum_dy_xhat);
      if (a.grads[2]) (*a.grads[2])[ch] += T(sum_dy);
      if (!a.grads[0]) continue;
      Tensor<T>& gx = *a.grads[0];
      const T gm = gam[ch];
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xin.raw() + (b * c + ch) * plane;
        const T* d = gy.raw() + (b * c + ch) * plane;
        T* q = gx.raw() + (b * c + ch) * plane;
        if (train) {
          const T mdy = T(sum_dy / double(m)), mdx = T(sum_dy_xhat / double(m));
          for (std::size_t i = 0; i < plane; ++i) {
            const T xhat = (p[i] - mu) * is;
            q[i] += gm * is * (d[i] - mdy - xhat * mdx);
          }
        } else {
          for (std::size_t i = 0; i < plane; ++i) q[i] += gm * is * d[i];
        }
      }
    }
  };
  return x.tape()->record("batch_norm2d", std::move(out), {x, gamma, beta}, std::move(fn));
}

// ---------------------------------------------------------------------------
// Softmax

template <typename T>
Var<T> softmax_channels(const Var<T>& x) {
  const Shape& xs = x.shape();
  check_rank4(xs, "softmax_channels");
  const std::size_t n = xs[0], k = xs[1], plane = xs[2] * xs[3];
  if (k < 2) throw ContractError("softmax_channels needs K >= 2, got " + shape_str(xs));
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xs);
  for (std::size_t b = 0; b < n; ++b) {
    const T* xb = xv.raw() + b * k * plane;
    T* yb = out.raw() + b * k * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      T mx = xb[i];
      for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, xb[c * plane + i]);
      T s = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const T e = std::exp(xb[c * plane + i] - mx);
        yb[c * plane + i] = e;
        s += e;
      }
      for (std::size_t c = 0; c < k; ++c) yb[c * plane + i] /= s;
    }
  }
  return x.tape()->record("softmax_channels", std::move(out), {x}, [n, k, plane](const BackwardArgs<T>& a) {
    Tensor<T>& gx = *a.grads[0];
    for (std::size_t b = 0; b < n; ++b) {
      const T* y = a.out.raw() + b * k * plane;
      const T* d = a.grad_out.raw() + b * k * plane;
      T* g = gx.raw() + b * k * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        T dot = 0;
        for (std::size_t c = 0; c < k; ++c) dot += d[c * plane + i] * y[c * plane + i];
        for (std::size_t c = 0; c < k; ++c) g[c * plane + i] += y[c * plane + i] * (d[c * plane + i] - dot);
      }
    }
  });
}

// ---------------------------------------------------------------------------

ReceptiveField receptive_field(const std::vector<RfLayer>& chain) {
  if (chain.empty()) throw ContractError("receptive_field of an empty chain");
  ReceptiveField rf;
  for (const auto& layer : chain) {
    std::size_t k = 1, s = 1, r = 1;
    if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      k = c->kernel[0];
      s = c->stride[0];
      r = c->dilation;
    } else {
      const auto& p = std::get<PoolSpec>(layer);
      k = p.kernel[0];
      s = p.stride[0];
    }
    rf.rf += (k - 1) * r * rf.jump;
    rf.jump *= s;
  }
  return rf;
}

#define CENET_INSTANTIATE(T)                                                                                 \
  template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>*, const ConvSpec&);                   \
  template Var<T> transposed_conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>*, const TransposedConvSpec&); \
  template Var<T> max_pool2d<T>(const Var<T>&, const PoolSpec&);                                             \
  template Var<T> bilinear_upsample<T>(const Var<T>&, std::size_t, std::size_t);                             \
  template Var<T> batch_norm2d<T>(const Var<T>&, const Var<T>&, const Var<T>&, Tensor<T>&, Tensor<T>&, BnMode, \
                                  double, double);                                                           \
  template Var<T> softmax_channels<T>(const Var<T>&);                                                        \
  template Tensor<T> resize_bilinear<T>(const Tensor<T>&, std::size_t, std::size_t);

CENET_INSTANTIATE(float)
CENET_INSTANTIATE(double)

}  // namespace cenet
