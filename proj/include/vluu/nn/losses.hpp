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

#include <cmath>

#include "vluu/tensor.hpp"

namespace vluu::nn {

/// Clamp added inside every log so saturated probabilities stay finite.
inline constexpr double kLogEps = 1e-8;

/// Soft-target cross entropy, averaged over pixels:
///   -(1/(H*W)) sum_p sum_c target * log(pred + eps)
template <typename T>
double soft_cross_entropy(const Tensor<T>& pred, const Tensor<T>& target) {
  require(pred.same_shape(target), "soft_cross_entropy: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    acc += static_cast<double>(target.v[i]) *
           std::log(static_cast<double>(pred.v[i]) + kLogEps);
  }
  return -acc / (static_cast<double>(pred.h) * pred.w);
}

/// Gradient of soft_cross_entropy with respect to the predicted
/// probabilities, accumulated with weight `scale` (use 1/batch for means).
template <typename T>
void soft_cross_entropy_backward(const Tensor<T>& pred, const Tensor<T>& target,
                                 T scale, Tensor<T>& dpred) {
  if (!dpred.same_shape(pred)) dpred = Tensor<T>(pred.c, pred.h, pred.w);
  const T npix = static_cast<T>(pred.h) * static_cast<T>(pred.w);
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    dpred.v[i] = -scale * target.v[i] /
                 ((pred.v[i] + static_cast<T>(kLogEps)) * npix);
  }
}

/// Scalar binary cross entropy; score is clamped into (eps, 1-eps).
inline double binary_cross_entropy(double score, int label) {
  const double s = std::min(std::max(score, kLogEps), 1.0 - kLogEps);
  return -(label * std::log(s) + (1 - label) * std::log(1.0 - s));
}

/// d/d(score) of binary_cross_entropy (zero in the clamped region).
inline double binary_cross_entropy_backward(double score, int label) {
  if (score <= kLogEps || score >= 1.0 - kLogEps) return 0.0;
  return -(label / score) + (1 - label) / (1.0 - score);
}

/// Pixel-averaged bernoulli cross entropy of a single probability map
/// against a binary mask; used by the per-class decoder heads.
template <typename T, typename M>
double pixel_bce(const Tensor<T>& prob, const Tensor<M>& mask) {
  require(prob.h == mask.h && prob.w == mask.w && prob.c == 1,
          "pixel_bce: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < prob.v.size(); ++i) {
    const double p = static_cast<double>(prob.v[i]);
    const double m = static_cast<double>(mask.v[i]);
    acc += m * std::log(p + kLogEps) + (1.0 - m) * std::log(1.0 - p + kLogEps);
  }
  return -acc / static_cast<double>(prob.v.size());
}

template <typename T, typename M>
void pixel_bce_backward(const Tensor<T>& prob, const Tensor<M>& mask, T scale,
                        Tensor<T>& dprob) {
  if (!dprob.same_shape(prob)) dprob = Tensor<T>(prob.c, prob.h, prob.w);
  const T n = static_cast<T>(prob.v.size());
  const T eps = static_cast<T>(kLogEps);
  for (std::size_t i = 0; i < prob.v.size(); ++i) {
    const T p = prob.v[i];
    const T m = static_cast<T>(mask.v[i]);
    dprob.v[i] = scale * (-m / (p + eps) + (T(1) - m) / (T(1) - p + eps)) / n;
  }
}

/// Cross entropy restricted to the annotated class: the softmax is taken
/// over channels {0, k} only, so logits of every other channel receive an
/// exactly-zero gradient. Returns the loss and writes dL/dlogits.
template <typename T, typename M>
double restricted_pair_cross_entropy(const Tensor<T>& logits,
                                     const Tensor<M>& mask, int k, T scale,
                                     Tensor<T>& dlogits) {
  require(k >= 1 && k < logits.c, "restricted_pair_cross_entropy: bad class");
  require(logits.h == mask.h && logits.w == mask.w,
          "restricted_pair_cross_entropy: shape mismatch");
  if (!dlogits.same_shape(logits)) {
    dlogits = Tensor<T>(logits.c, logits.h, logits.w);
  }
  dlogits.fill(T(0));
  const int n = logits.h * logits.w;
  const T eps = static_cast<T>(kLogEps);
  const T npix = static_cast<T>(n);
  double acc = 0.0;
  const T* z0 = logits.plane(0);
  const T* zk = logits.plane(k);
  T* d0 = dlogits.plane(0);
  T* dk = dlogits.plane(k);
  for (int i = 0; i < n; ++i) {
    const T mx = std::max(z0[i], zk[i]);
    const T e0 = std::exp(z0[i] - mx);
    const T ek = std::exp(zk[i] - mx);
    const T sum = e0 + ek;
    const T p0 = e0 / sum;
    const T pk = ek / sum;
    const T t = static_cast<T>(mask.v[i]);
    acc += static_cast<double>((T(1) - t) * std::log(p0 + eps) +
                               t * std::log(pk + eps));
    const T g0 = -(T(1) - t) / ((p0 + eps) * npix);
    const T gk = -t / ((pk + eps) * npix);
    const T dot = g0 * p0 + gk * pk;
    d0[i] = scale * p0 * (g0 - dot);
    dk[i] = scale * pk * (gk - dot);
  }
  return -acc / static_cast<double>(n);
}

}  // namespace vluu::nn
