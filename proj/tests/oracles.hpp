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

#pragma once

// Brute-force reference implementations used to cross-check the library.
// They favour obviousness over speed and share no code with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// -sum p log p, accumulated in long double in index order.
inline double Entropy(const std::vector<double>& p) {
  long double h = 0.0L;
  for (double x : p) {
    if (x > 0.0) h -= static_cast<long double>(x) * std::log(static_cast<long double>(x));
  }
  return static_cast<double>(h);
}

// Fraction of values <= z, by counting.
inline double Ecdf(const std::vector<double>& values, double z) {
  std::int64_t c = 0;
  for (double v : values) c += v <= z ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(values.size());
}

// Fraction of values < z.
inline double EcdfLeft(const std::vector<double>& values, double z) {
  std::int64_t c = 0;
  for (double v : values) c += v < z ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(values.size());
}

// Pairwise-count AUROC.
inline double Auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Two-sample KS distance by evaluating both ECDFs at every sample point and
// at a dense grid of midpoints between them.
inline double KsGrid(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  std::vector<double> probe = pts;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    for (int k = 1; k < 4; ++k) probe.push_back(pts[i] + (pts[i + 1] - pts[i]) * k / 4.0);
  }
  probe.push_back(pts.front() - 1.0);
  probe.push_back(pts.back() + 1.0);
  double d = 0.0;
  for (double z : probe) d = std::max(d, std::abs(Ecdf(a, z) - Ecdf(b, z)));
  return d;
}

// Quantile by linear interpolation at (n - 1) p, on a copy.
inline double Quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace oracle
