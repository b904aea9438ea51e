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
#include <cstdint>
#include <random>

namespace vluu {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive the seed for stream `tag` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix_seed(master ^ mix_seed(tag));
}

/// Deterministic random stream. The engine sequence is pinned by the C++
/// standard and all distributions are implemented explicitly, so a seed
/// reproduces the same draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  /// Uniform on the open interval (0, 1).
  double u01() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(u01() * n); }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    for (;;) {
      const double a = 2.0 * u01() - 1.0;
      const double b = 2.0 * u01() - 1.0;
      const double s = a * a + b * b;
      if (s >= 1.0 || s == 0.0) continue;
      return a * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Gamma(alpha, 1) via Marsaglia-Tsang squeeze, with the alpha < 1 boost
  /// G(a) = G(a+1) * U^(1/a).
  double gamma(double alpha) {
    if (alpha < 1.0) {
      const double u = u01();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, vcube;
      do {
        x = normal();
        vcube = 1.0 + c * x;
      } while (vcube <= 0.0);
      vcube = vcube * vcube * vcube;
      const double u = u01();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * vcube;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - vcube + std::log(vcube))) {
        return d * vcube;
      }
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace vluu
