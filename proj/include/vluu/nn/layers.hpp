/* Copyright 2026 The VLUU Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "vluu/rng.hpp"
#include "vluu/tensor.hpp"

namespace vluu::nn {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 2D convolution with square kernel. Weights are a row-major
/// (out_c, in_c*k*k) matrix so forward is a single GEMM over the im2col
/// buffer; 1x1 stride-1 convolutions skip the buffer and multiply the
/// input planes directly.
template <typename T>
struct Conv2d {
  int in_c = 0, out_c = 0, ksize = 3, stride = 1, pad = 1;
  Tensor<T> w;  // (out_c, in_c*k*k, 1)
  Tensor<T> b;  // (out_c, 1, 1)

  static Conv2d make(int in_c, int out_c, int ksize, int stride, int pad) {
    Conv2d conv;
    conv.in_c = in_c;
    conv.out_c = out_c;
    conv.ksize = ksize;
    conv.stride = stride;
    conv.pad = pad;
    conv.w = Tensor<T>(out_c, in_c * ksize * ksize, 1);
    conv.b = Tensor<T>(out_c, 1, 1);
    return conv;
  }

  int fan_in() const { return in_c * ksize * ksize; }
  int out_h(int h) const { return (h + 2 * pad - ksize) / stride + 1; }
  int out_w(int w_) const { return (w_ + 2 * pad - ksize) / stride + 1; }
  bool is_pointwise() const { return ksize == 1 && stride == 1 && pad == 0; }
};

template <typename T>
void im2col(const Conv2d<T>& conv, const Tensor<T>& in, Tensor<T>& col) {
  const int k = conv.ksize, s = conv.stride, p = conv.pad;
  const int oh = conv.out_h(in.h), ow = conv.out_w(in.w);
  const int kk = conv.in_c * k * k;
  const int n = oh * ow;
  if (col.c != kk || col.h != n || col.w != 1) col = Tensor<T>(kk, n, 1);
  T* dst = col.data();
  for (int ic = 0; ic < conv.in_c; ++ic) {
    const T* src = in.plane(ic);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx, dst += n) {
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * s + ky - p;
          T* row = dst + oy * ow;
          if (iy < 0 || iy >= in.h) {
            std::fill(row, row + ow, T(0));
            continue;
          }
          const T* srow = src + iy * in.w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * s + kx - p;
            row[ox] = (ix >= 0 && ix < in.w) ? srow[ix] : T(0);
          }
        }
      }
    }
  }
}

/// Scatter-add transpose of im2col; `din` must be pre-sized and zeroed.
template <typename T>
void col2im_add(const Conv2d<T>& conv, const Tensor<T>& dcol, Tensor<T>& din) {
  const int k = conv.ksize, s = conv.stride, p = conv.pad;
  const int oh = conv.out_h(din.h), ow = conv.out_w(din.w);
  const int n = oh * ow;
  const T* src = dcol.data();
  for (int ic = 0; ic < conv.in_c; ++ic) {
    T* dst = din.plane(ic);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx, src += n) {
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * s + ky - p;
          if (iy < 0 || iy >= din.h) continue;
          const T* srow = src + oy * ow;
          T* drow = dst + iy * din.w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * s + kx - p;
            if (ix >= 0 && ix < din.w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

/// out = conv(in); `col` keeps the unfolded input for the backward pass.
template <typename T>
void conv_forward(const Conv2d<T>& conv, const Tensor<T>& in, Tensor<T>& col,
                  Tensor<T>& out) {
  require(in.c == conv.in_c, "conv_forward: channel mismatch");
  const int oh = conv.out_h(in.h), ow = conv.out_w(in.w);
  const int n = oh * ow;
  const int kk = conv.in_c * conv.ksize * conv.ksize;
  if (out.c != conv.out_c || out.h != oh || out.w != ow) {
    out = Tensor<T>(conv.out_c, oh, ow);
  }
  Eigen::Map<const RowMat<T>> wm(conv.w.data(), conv.out_c, kk);
  Eigen::Map<RowMat<T>> om(out.data(), conv.out_c, n);
  if (conv.is_pointwise()) {
    Eigen::Map<const RowMat<T>> cm(in.data(), kk, n);
    om.noalias() = wm * cm;
  } else {
    im2col(conv, in, col);
    Eigen::Map<const RowMat<T>> cm(col.data(), kk, n);
    om.noalias() = wm * cm;
  }
  for (int oc = 0; oc < conv.out_c; ++oc) {
    om.row(oc).array() += conv.b.v[oc];
  }
}

/// Accumulates dW/dB into `grads`; writes input gradient into `din` (zeroed
/// here) unless it is null. `in`/`col` must come from the matching forward.
template <typename T>
void conv_backward(const Conv2d<T>& conv, const Tensor<T>& in,
                   const Tensor<T>& col, const Tensor<T>& dout,
                   Conv2d<T>& grads, Tensor<T>* din, Tensor<T>& dcol_scratch) {
  const int oh = dout.h, ow = dout.w;
  const int n = oh * ow;
  const int kk = conv.in_c * conv.ksize * conv.ksize;
  Eigen::Map<const RowMat<T>> dom(dout.data(), conv.out_c, n);
  Eigen::Map<RowMat<T>> dwm(grads.w.data(), conv.out_c, kk);
  const T* colptr = conv.is_pointwise() ? in.data() : col.data();
  Eigen::Map<const RowMat<T>> cm(colptr, kk, n);
  dwm.noalias() += dom * cm.transpose();
  for (int oc = 0; oc < conv.out_c; ++oc) {
    grads.b.v[oc] += dom.row(oc).sum();
  }
  if (!din) return;
  if (!din->same_shape(in)) *din = Tensor<T>(in.c, in.h, in.w);
  Eigen::Map<const RowMat<T>> wm(conv.w.data(), conv.out_c, kk);
  if (conv.is_pointwise()) {
    Eigen::Map<RowMat<T>> dim(din->data(), kk, n);
    dim.noalias() = wm.transpose() * dom;
  } else {
    if (dcol_scratch.c != kk || dcol_scratch.h != n) {
      dcol_scratch = Tensor<T>(kk, n, 1);
    }
    Eigen::Map<RowMat<T>> dcm(dcol_scratch.data(), kk, n);
    dcm.noalias() = wm.transpose() * dom;
    din->fill(T(0));
    col2im_add(conv, dcol_scratch, *din);
  }
}

template <typename T>
void relu_inplace(Tensor<T>& t) {
  for (T& x : t.v) x = x > T(0) ? x : T(0);
}

/// d *= 1[activation > 0]; `act` is the post-ReLU tensor.
template <typename T>
void relu_backward_inplace(const Tensor<T>& act, Tensor<T>& d) {
  for (std::size_t i = 0; i < d.v.size(); ++i) {
    if (!(act.v[i] > T(0))) d.v[i] = T(0);
  }
}

/// 2x2 max pooling, stride 2. `argmax` records the flat in-plane index of
/// the winner (first on ties, fixed scan order).
template <typename T>
void maxpool2_forward(const Tensor<T>& in, Tensor<T>& out, Tensor<int>& argmax) {
  const int oh = in.h / 2, ow = in.w / 2;
  if (out.c != in.c || out.h != oh || out.w != ow) out = Tensor<T>(in.c, oh, ow);
  if (argmax.c != in.c || argmax.h != oh || argmax.w != ow) {
    argmax = Tensor<int>(in.c, oh, ow);
  }
  for (int ch = 0; ch < in.c; ++ch) {
    const T* src = in.plane(ch);
    T* dst = out.plane(ch);
    int* idx = argmax.plane(ch);
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        int best = (2 * oy) * in.w + 2 * ox;
        T bv = src[best];
        const int cand[3] = {best + 1, best + in.w, best + in.w + 1};
        for (int c2 : cand) {
          if (src[c2] > bv) {
            bv = src[c2];
            best = c2;
          }
        }
        dst[oy * ow + ox] = bv;
        idx[oy * ow + ox] = best;
      }
    }
  }
}

template <typename T>
void maxpool2_backward(const Tensor<T>& dout, const Tensor<int>& argmax,
                       Tensor<T>& din) {
  din.fill(T(0));
  for (int ch = 0; ch < dout.c; ++ch) {
    const T* d = dout.plane(ch);
    const int* idx = argmax.plane(ch);
    T* dst = din.plane(ch);
    const int n = dout.h * dout.w;
    for (int i = 0; i < n; ++i) dst[idx[i]] += d[i];
  }
}

template <typename T>
void upsample2_forward(const Tensor<T>& in, Tensor<T>& out) {
  const int oh = in.h * 2, ow = in.w * 2;
  if (out.c != in.c || out.h != oh || out.w != ow) out = Tensor<T>(in.c, oh, ow);
  for (int ch = 0; ch < in.c; ++ch) {
    const T* src = in.plane(ch);
    T* dst = out.plane(ch);
    for (int y = 0; y < oh; ++y) {
      const T* srow = src + (y / 2) * in.w;
      T* drow = dst + y * ow;
      for (int x = 0; x < ow; ++x) drow[x] = srow[x / 2];
    }
  }
}

template <typename T>
void upsample2_backward(const Tensor<T>& dout, Tensor<T>& din) {
  const int ih = dout.h / 2, iw = dout.w / 2;
  if (din.c != dout.c || din.h != ih || din.w != iw) {
    din = Tensor<T>(dout.c, ih, iw);
  }
  for (int ch = 0; ch < dout.c; ++ch) {
    const T* d = dout.plane(ch);
    T* dst = din.plane(ch);
    for (int y = 0; y < ih; ++y) {
      for (int x = 0; x < iw; ++x) {
        const T* r0 = d + (2 * y) * dout.w + 2 * x;
        const T* r1 = r0 + dout.w;
        dst[y * iw + x] = r0[0] + r0[1] + r1[0] + r1[1];
      }
    }
  }
}

/// y = W x + b over flattened vectors.
template <typename T>
void dense_forward(const Tensor<T>& w, const Tensor<T>& b, const Tensor<T>& x,
                   Tensor<T>& y) {
  const int out_n = w.c, in_n = w.h;
  require(static_cast<int>(x.size()) == in_n, "dense_forward: size mismatch");
  if (static_cast<int>(y.size()) != out_n) y = Tensor<T>(out_n, 1, 1);
  Eigen::Map<const RowMat<T>> wm(w.data(), out_n, in_n);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> xv(x.data(), in_n);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> yv(y.data(), out_n);
  yv.noalias() = wm * xv;
  for (int i = 0; i < out_n; ++i) y.v[i] += b.v[i];
}

template <typename T>
void dense_backward(const Tensor<T>& w, const Tensor<T>& x, const Tensor<T>& dy,
                    Tensor<T>& dw, Tensor<T>& db, Tensor<T>* dx) {
  const int out_n = w.c, in_n = w.h;
  for (int o = 0; o < out_n; ++o) {
    const T g = dy.v[o];
    db.v[o] += g;
    T* dwrow = dw.data() + static_cast<std::size_t>(o) * in_n;
    const T* xp = x.data();
    for (int i = 0; i < in_n; ++i) dwrow[i] += g * xp[i];
  }
  if (!dx) return;
  if (static_cast<int>(dx->size()) != in_n) *dx = Tensor<T>(in_n, 1, 1);
  for (int i = 0; i < in_n; ++i) {
    T acc = T(0);
    for (int o = 0; o < out_n; ++o) {
      acc += w.data()[static_cast<std::size_t>(o) * in_n + i] * dy.v[o];
    }
    dx->v[i] = acc;
  }
}

/// Mean over each channel plane.
template <typename T>
void global_avg_pool_forward(const Tensor<T>& in, Tensor<T>& out) {
  if (static_cast<int>(out.size()) != in.c) out = Tensor<T>(in.c, 1, 1);
  const int n = in.h * in.w;
  for (int ch = 0; ch < in.c; ++ch) {
    const T* p = in.plane(ch);
    T acc = T(0);
    for (int i = 0; i < n; ++i) acc += p[i];
    out.v[ch] = acc / static_cast<T>(n);
  }
}

template <typename T>
void global_avg_pool_backward(const Tensor<T>& dout, int h, int w,
                              Tensor<T>& din) {
  if (din.c != dout.c || din.h != h || din.w != w) {
    din = Tensor<T>(dout.c, h, w);
  }
  const int n = h * w;
  for (int ch = 0; ch < dout.c; ++ch) {
    const T g = dout.v[ch] / static_cast<T>(n);
    T* p = din.plane(ch);
    for (int i = 0; i < n; ++i) p[i] = g;
  }
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

/// Per-pixel softmax across channels (max-shifted for stability).
template <typename T>
void softmax_channels(const Tensor<T>& logits, Tensor<T>& probs) {
  if (!probs.same_shape(logits)) probs = Tensor<T>(logits.c, logits.h, logits.w);
  const int n = logits.h * logits.w;
  const int nc = logits.c;
  for (int i = 0; i < n; ++i) {
    T mx = logits.v[i];
    for (int ch = 1; ch < nc; ++ch) {
      mx = std::max(mx, logits.v[static_cast<std::size_t>(ch) * n + i]);
    }
    T sum = T(0);
    for (int ch = 0; ch < nc; ++ch) {
      const T e = std::exp(logits.v[static_cast<std::size_t>(ch) * n + i] - mx);
      probs.v[static_cast<std::size_t>(ch) * n + i] = e;
      sum += e;
    }
    for (int ch = 0; ch < nc; ++ch) {
      probs.v[static_cast<std::size_t>(ch) * n + i] /= sum;
    }
  }
}

template <typename T>
void softmax_channels_backward(const Tensor<T>& probs, const Tensor<T>& dprobs,
                               Tensor<T>& dlogits) {
  if (!dlogits.same_shape(probs)) {
    dlogits = Tensor<T>(probs.c, probs.h, probs.w);
  }
  const int n = probs.h * probs.w;
  const int nc = probs.c;
  for (int i = 0; i < n; ++i) {
    T dot = T(0);
    for (int ch = 0; ch < nc; ++ch) {
      const std::size_t at = static_cast<std::size_t>(ch) * n + i;
      dot += dprobs.v[at] * probs.v[at];
    }
    for (int ch = 0; ch < nc; ++ch) {
      const std::size_t at = static_cast<std::size_t>(ch) * n + i;
      dlogits.v[at] = probs.v[at] * (dprobs.v[at] - dot);
    }
  }
}

/// Fan-in uniform init: weights in (-sqrt(6/fan_in), sqrt(6/fan_in)).
template <typename T>
void init_fan_in_uniform(Tensor<T>& w, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (T& x : w.v) x = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace vluu::nn
