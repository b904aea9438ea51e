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

#include <array>
#include <cstdint>
#include <vector>

#include "vluu/nn/layers.hpp"

namespace vluu::nn {

/// Shape contract for the segmentation network. The input stacks the K
/// per-class source images channel-wise; the output is one probability map
/// per class plus background.
struct SegNetConfig {
  int num_classes = 3;     // K
  int image_channels = 1;  // C per stacked image
  int height = 64;
  int width = 64;

  int in_channels() const { return num_classes * image_channels; }
  int out_channels() const { return num_classes + 1; }

  void validate() const {
    require(num_classes >= 1, "SegNetConfig: need at least one class");
    require(image_channels >= 1, "SegNetConfig: need at least one channel");
    require(height > 0 && width > 0, "SegNetConfig: empty image");
    require(height % 4 == 0 && width % 4 == 0,
            "SegNetConfig: height and width must be multiples of 4");
  }

  bool operator==(const SegNetConfig&) const = default;
};

/// Encoder-decoder with two 2x max-pool stages mirrored by two nearest
/// upsample stages:
///   conv3x3(16) relu -> pool -> conv3x3(32) relu -> pool -> conv3x3(64)
///   relu -> up -> conv3x3(32) relu -> up -> conv3x3(16) relu ->
///   conv1x1(K+1) -> channel softmax
template <typename T>
struct SegNet {
  SegNetConfig cfg;
  std::array<Conv2d<T>, 6> conv;

  static SegNet make(const SegNetConfig& cfg) {
    cfg.validate();
    SegNet net;
    net.cfg = cfg;
    net.conv[0] = Conv2d<T>::make(cfg.in_channels(), 16, 3, 1, 1);
    net.conv[1] = Conv2d<T>::make(16, 32, 3, 1, 1);
    net.conv[2] = Conv2d<T>::make(32, 64, 3, 1, 1);
    net.conv[3] = Conv2d<T>::make(64, 32, 3, 1, 1);
    net.conv[4] = Conv2d<T>::make(32, 16, 3, 1, 1);
    net.conv[5] = Conv2d<T>::make(16, cfg.out_channels(), 1, 1, 0);
    return net;
  }

  /// Weights fan-in uniform, biases zero; fully determined by the seed.
  void init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x5e67));
    for (auto& layer : conv) {
      init_fan_in_uniform(layer.w, layer.fan_in(), rng);
      layer.b.fill(T(0));
    }
  }

  void zero() {
    for (auto& layer : conv) {
      layer.w.fill(T(0));
      layer.b.fill(T(0));
    }
  }

  /// Parameter tensors in checkpoint/update order.
  std::vector<Tensor<T>*> param_tensors() {
    std::vector<Tensor<T>*> out;
    for (auto& layer : conv) {
      out.push_back(&layer.w);
      out.push_back(&layer.b);
    }
    return out;
  }
  std::vector<const Tensor<T>*> param_tensors() const {
    std::vector<const Tensor<T>*> out;
    for (const auto& layer : conv) {
      out.push_back(&layer.w);
      out.push_back(&layer.b);
    }
    return out;
  }
};

/// Forward activations plus im2col buffers, reused across steps.
template <typename T>
struct SegNetCache {
  Tensor<T> input;
  std::array<Tensor<T>, 6> col;
  Tensor<T> r1, p1, r2, p2, r3, u1, r4, u2, r5, logits, probs;
  Tensor<int> idx1, idx2;
  // backward scratch
  Tensor<T> dlogits, d_r5, d_u2, d_r4, d_u1, d_r3, d_p2, d_r2, d_p1, d_r1;
  Tensor<T> dcol;
  bool forward_done = false;
};

/// Runs the network and returns per-pixel class probabilities (channels sum
/// to one at every pixel).
template <typename T>
const Tensor<T>& segnet_forward(const SegNet<T>& net, const Tensor<T>& input,
                                SegNetCache<T>& cache) {
  require(input.c == net.cfg.in_channels() && input.h == net.cfg.height &&
              input.w == net.cfg.width,
          "segnet_forward: input shape does not match the configuration");
  cache.input = input;
  conv_forward(net.conv[0], cache.input, cache.col[0], cache.r1);
  relu_inplace(cache.r1);
  maxpool2_forward(cache.r1, cache.p1, cache.idx1);
  conv_forward(net.conv[1], cache.p1, cache.col[1], cache.r2);
  relu_inplace(cache.r2);
  maxpool2_forward(cache.r2, cache.p2, cache.idx2);
  conv_forward(net.conv[2], cache.p2, cache.col[2], cache.r3);
  relu_inplace(cache.r3);
  upsample2_forward(cache.r3, cache.u1);
  conv_forward(net.conv[3], cache.u1, cache.col[3], cache.r4);
  relu_inplace(cache.r4);
  upsample2_forward(cache.r4, cache.u2);
  conv_forward(net.conv[4], cache.u2, cache.col[4], cache.r5);
  relu_inplace(cache.r5);
  conv_forward(net.conv[5], cache.r5, cache.col[5], cache.logits);
  softmax_channels(cache.logits, cache.probs);
  cache.forward_done = true;
  return cache.probs;
}

/// Backward from a gradient on the output probabilities; accumulates
/// parameter gradients into `grads` (a zeroed SegNet of the same shape).
template <typename T>
void segnet_backward(const SegNet<T>& net, const Tensor<T>& dprobs,
                     SegNetCache<T>& cache, SegNet<T>& grads) {
  require(cache.forward_done, "segnet_backward: no recorded forward pass");
  softmax_channels_backward(cache.probs, dprobs, cache.dlogits);
  segnet_backward_from_logits(net, cache.dlogits, cache, grads);
}

/// Backward entry point for losses defined directly on the logits.
template <typename T>
void segnet_backward_from_logits(const SegNet<T>& net, const Tensor<T>& dlogits,
                                 SegNetCache<T>& cache, SegNet<T>& grads) {
  require(cache.forward_done, "segnet_backward: no recorded forward pass");
  conv_backward(net.conv[5], cache.r5, cache.col[5], dlogits, grads.conv[5],
                &cache.d_r5, cache.dcol);
  relu_backward_inplace(cache.r5, cache.d_r5);
  conv_backward(net.conv[4], cache.u2, cache.col[4], cache.d_r5, grads.conv[4],
                &cache.d_u2, cache.dcol);
  upsample2_backward(cache.d_u2, cache.d_r4);
  relu_backward_inplace(cache.r4, cache.d_r4);
  conv_backward(net.conv[3], cache.u1, cache.col[3], cache.d_r4, grads.conv[3],
                &cache.d_u1, cache.dcol);
  upsample2_backward(cache.d_u1, cache.d_r3);
  relu_backward_inplace(cache.r3, cache.d_r3);
  conv_backward(net.conv[2], cache.p2, cache.col[2], cache.d_r3, grads.conv[2],
                &cache.d_p2, cache.dcol);
  if (!cache.d_r2.same_shape(cache.r2)) {
    cache.d_r2 = Tensor<T>(cache.r2.c, cache.r2.h, cache.r2.w);
  }
  maxpool2_backward(cache.d_p2, cache.idx2, cache.d_r2);
  relu_backward_inplace(cache.r2, cache.d_r2);
  conv_backward(net.conv[1], cache.p1, cache.col[1], cache.d_r2, grads.conv[1],
                &cache.d_p1, cache.dcol);
  if (!cache.d_r1.same_shape(cache.r1)) {
    cache.d_r1 = Tensor<T>(cache.r1.c, cache.r1.h, cache.r1.w);
  }
  maxpool2_backward(cache.d_p1, cache.idx1, cache.d_r1);
  relu_backward_inplace(cache.r1, cache.d_r1);
  // input gradient is never consumed, so conv1 only accumulates dW/dB
  conv_backward(net.conv[0], cache.input, cache.col[0], cache.d_r1,
                grads.conv[0], static_cast<Tensor<T>*>(nullptr), cache.dcol);
}

}  // namespace vluu::nn
