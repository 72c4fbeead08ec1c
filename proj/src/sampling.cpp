/*
Copyright 2026 The SHAMaNS Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <cmath>
#include <random>

#include "shamans/stable.hpp"

namespace shamans {
namespace {

// Positive stable variable with Laplace transform E exp(-u W) = exp(-u^a),
// 0 < a < 1 (Chambers-Mallows-Stuck, totally skewed case).
double PositiveStable(double a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, kPi);
  std::exponential_distribution<double> exponential(1.0);
  double u;
  do {
    u = uniform(rng);
  } while (u <= 0.0);
  const double e = exponential(rng);
  return std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
         std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
}

}  // namespace

std::vector<Complex> SampleSas(AlphaParam alpha, double scale, Index count,
                               std::uint64_t seed) {
  Require(scale >= 0.0 && std::isfinite(scale), ErrorKind::kParameter,
          "scale must be finite and nonnegative");
  Require(count >= 0, ErrorKind::kParameter, "count must be nonnegative");
  std::vector<Complex> out(static_cast<std::size_t>(count), Complex(0.0, 0.0));
  if (scale == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double a = alpha.value();
  // Per-component Gaussian variance giving E exp(i Re(conj(t) x)) =
  // exp(-(v |t|^2 / 2)^(a/2)) = exp(-scale |t|^a).
  const double sd = std::sqrt(2.0 * std::pow(scale, 2.0 / a));
  for (auto& x : out) {
    const double w = alpha.is_gaussian() ? 1.0 : PositiveStable(a / 2.0, rng);
    const double g = std::sqrt(w) * sd;
    const double re = normal(rng);
    const double im = normal(rng);
    x = Complex(g * re, g * im);
  }
  return out;
}

}  // namespace shamans
