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

#include <cstdint>
#include <vector>

#include "vluu/nn/layers.hpp"

namespace vluu::nn {

/// Shape contract for the mask critic. It scores a (K+1)-channel
/// probability map with a single value in (0, 1).
struct DiscConfig {
  int in_channels = 4;  // K + 1
  int height = 64;
  int width = 64;

  void validate() const {
    require(in_channels >= 2, "DiscConfig: need at least two channels");
    require(height % 4 == 0 && width % 4 == 0,
            "DiscConfig: height and width must be multiples of 4");
  }

  bool operator==(const DiscConfig&) const = default;
};

/// conv3x3(16) stride 2 relu -> conv3x3(32) stride 2 relu -> global average
/// pool -> dense(1) -> sigmoid.
template <typename T>
struct DiscNet {
  DiscConfig cfg;
  Conv2d<T> conv1, conv2;
  Tensor<T> fc_w;  // (1, 32)
  Tensor<T> fc_b;  // (1)

  static DiscNet make(const DiscConfig& cfg) {
    cfg.validate();
    DiscNet net;
    net.cfg = cfg;
    net.conv1 = Conv2d<T>::make(cfg.in_channels, 16, 3, 2, 1);
    net.conv2 = Conv2d<T>::make(16, 32, 3, 2, 1);
    net.fc_w = Tensor<T>(1, 32, 1);
    net.fc_b = Tensor<T>(1, 1, 1);
    return net;
  }

  void init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xd15c));
    init_fan_in_uniform(conv1.w, conv1.fan_in(), rng);
    conv1.b.fill(T(0));
    init_fan_in_uniform(conv2.w, conv2.fan_in(), rng);
    conv2.b.fill(T(0));
    init_fan_in_uniform(fc_w, 32, rng);
    fc_b.fill(T(0));
  }

  void zero() {
    conv1.w.fill(T(0));
    conv1.b.fill(T(0));
    conv2.w.fill(T(0));
    conv2.b.fill(T(0));
    fc_w.fill(T(0));
    fc_b.fill(T(0));
  }

  std::vector<Tensor<T>*> param_tensors() {
    return {&conv1.w, &conv1.b, &conv2.w, &conv2.b, &fc_w, &fc_b};
  }
  std::vector<const Tensor<T>*> param_tensors() const {
    return {&conv1.w, &conv1.b, &conv2.w, &conv2.b, &fc_w, &fc_b};
  }
};

template <typename T>
struct DiscCache {
  Tensor<T> input;
  Tensor<T> col1, col2;
  Tensor<T> r1, r2, pooled, z;
  T score = T(0);
  // backward scratch
  Tensor<T> dz, dpooled, d_r2, d_r1, dcol;
  bool forward_done = false;
};

template <typename T>
T disc_forward(const DiscNet<T>& net, const Tensor<T>& mask,
               DiscCache<T>& cache) {
  require(mask.c == net.cfg.in_channels && mask.h == net.cfg.height &&
              mask.w == net.cfg.width,
          "disc_forward: input shape does not match the configuration");
  cache.input = mask;
  conv_forward(net.conv1, cache.input, cache.col1, cache.r1);
  relu_inplace(cache.r1);
  conv_forward(net.conv2, cache.r1, cache.col2, cache.r2);
  relu_inplace(cache.r2);
  global_avg_pool_forward(cache.r2, cache.pooled);
  dense_forward(net.fc_w, net.fc_b, cache.pooled, cache.z);
  cache.score = sigmoid(cache.z.v[0]);
  cache.forward_done = true;
  return cache.score;
}

/// Backward from d(loss)/d(score); accumulates into `grads` and, when
/// `dinput` is non-null, writes the gradient on the scored mask (used when
/// the critic signal is pushed back into the segmentation network).
template <typename T>
void disc_backward(const DiscNet<T>& net, T dscore, DiscCache<T>& cache,
                   DiscNet<T>& grads, Tensor<T>* dinput) {
  require(cache.forward_done, "disc_backward: no recorded forward pass");
  const T s = cache.score;
  if (static_cast<int>(cache.dz.size()) != 1) cache.dz = Tensor<T>(1, 1, 1);
  cache.dz.v[0] = dscore * s * (T(1) - s);
  dense_backward(net.fc_w, cache.pooled, cache.dz, grads.fc_w, grads.fc_b,
                 &cache.dpooled);
  global_avg_pool_backward(cache.dpooled, cache.r2.h, cache.r2.w, cache.d_r2);
  relu_backward_inplace(cache.r2, cache.d_r2);
  conv_backward(net.conv2, cache.r1, cache.col2, cache.d_r2, grads.conv2,
                &cache.d_r1, cache.dcol);
  relu_backward_inplace(cache.r1, cache.d_r1);
  conv_backward(net.conv1, cache.input, cache.col1, cache.d_r1, grads.conv1,
                dinput, cache.dcol);
}

}  // namespace vluu::nn
