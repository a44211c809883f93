// Copyright 2026 The CES Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ces/stats.hpp"

#include <cmath>
#include <numbers>

#include "ces/error.hpp"

namespace ces::stats {

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double NormalPdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double KolmogorovSurvival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) {
    // The alternating series converges slowly here; use the dual form
    // P(K <= x) = sqrt(2 pi)/x sum exp(-(2j-1)^2 pi^2 / (8 x^2)).
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double odd = 2.0 * j - 1.0;
      cdf += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return 1.0 - cdf;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  const double p = 2.0 * sum;
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

double NormalRangeCdf(double q, int k) {
  if (k < 2) throw PreconditionError("range needs at least 2 groups");
  if (q <= 0.0) return 0.0;
  // k * integral phi(z) [Phi(z + q) - Phi(z)]^(k-1) dz by composite Simpson.
  constexpr double lo = -9.0;
  constexpr double hi = 9.0;
  constexpr int n = 4000;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double inner = NormalCdf(z + q) - NormalCdf(z);
    acc += w * NormalPdf(z) * std::pow(inner, k - 1);
  }
  return std::fmin(1.0, k * acc * h / 3.0);
}

double NormalRangeQuantile(double alpha, int k) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw PreconditionError("alpha must lie in (0, 1)");
  }
  const double target = 1.0 - alpha;
  double lo = 0.0, hi = 20.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (NormalRangeCdf(mid, k) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ces::stats
