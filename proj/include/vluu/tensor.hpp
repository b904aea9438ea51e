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
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vluu {

/// Dense row-major rank-3 tensor, laid out channel plane by channel plane.
/// A flat vector of length n uses shape (n, 1, 1).
template <typename T>
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<T> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_) {}

  static Tensor zeros(int c_, int h_, int w_) { return Tensor(c_, h_, w_); }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const {
    return c == o.c && h == o.h && w == o.w;
  }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  T& at(int ch, int y, int x) {
    return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }
  const T& at(int ch, int y, int x) const {
    return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }

  T* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * h * w; }
  const T* plane(int ch) const {
    return v.data() + static_cast<std::size_t>(ch) * h * w;
  }

  void fill(T value) { std::fill(v.begin(), v.end(), value); }

  bool all_finite() const {
    for (const T& x : v) {
      if (!std::isfinite(static_cast<double>(x))) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(c, h, w);
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.v[i] = static_cast<U>(v[i]);
    }
    return out;
  }
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace vluu
