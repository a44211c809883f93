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

#include "ces/reference_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ces/error.hpp"

namespace ces {

const char* ModeName(CalibrationMode mode) {
  return mode == CalibrationMode::kSupervised ? "supervised" : "unsupervised";
}

CalibrationMode ParseMode(const std::string& text) {
  if (text == "supervised") return CalibrationMode::kSupervised;
  if (text == "unsupervised") return CalibrationMode::kUnsupervised;
  throw UsageError("unknown calibration mode '" + text + "'");
}

ReferenceCdf::ReferenceCdf(std::vector<double> samples,
                           std::vector<std::int64_t> lengths,
                           std::int64_t sequence_count, CalibrationMode mode,
                           VocabInfo vocab)
    : samples_(std::move(samples)),
      lengths_(std::move(lengths)),
      sequence_count_(sequence_count),
      mode_(mode),
      vocab_(vocab) {
  if (samples_.empty()) {
    throw PreconditionError("empty calibration pool");
  }
  for (double s : samples_) {
    if (!std::isfinite(s)) throw ValidationError("non-finite sample");
  }
  std::sort(samples_.begin(), samples_.end());
  if (!lengths_.empty()) {
    if (static_cast<std::int64_t>(lengths_.size()) != sequence_count_) {
      throw ValidationError("sequence count does not match lengths");
    }
    const auto total =
        std::accumulate(lengths_.begin(), lengths_.end(), std::int64_t{0});
    if (total != pooled_count()) {
      throw ValidationError("sequence lengths do not sum to pooled count");
    }
    if (std::any_of(lengths_.begin(), lengths_.end(),
                    [](std::int64_t m) { return m < 1; })) {
      throw ValidationError("sequence length must be positive");
    }
  }
  if (sequence_count_ < 1) {
    throw ValidationError("sequence count must be positive");
  }
}

ReferenceCdf ReferenceCdf::FromSamples(std::vector<double> samples,
                                       VocabInfo vocab, CalibrationMode mode) {
  const auto n = static_cast<std::int64_t>(samples.size());
  return ReferenceCdf(std::move(samples), std::vector<std::int64_t>(n, 1), n,
                      mode, vocab);
}

double ReferenceCdf::Evaluate(double z) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), z);
  return static_cast<double>(it - samples_.begin()) /
         static_cast<double>(samples_.size());
}

double ReferenceCdf::EvaluateLeft(double z) const {
  const auto it = std::lower_bound(samples_.begin(), samples_.end(), z);
  return static_cast<double>(it - samples_.begin()) /
         static_cast<double>(samples_.size());
}

double ReferenceCdf::Quantile(double p) const {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return samples_.back();
  // Smallest j (1-based) with j / N >= p.
  const double n = static_cast<double>(samples_.size());
  auto j = static_cast<std::size_t>(std::ceil(p * n));
  // Guard against p * n landing a rounding step above an integer.
  while (j > 1 && static_cast<double>(j - 1) / n >= p) --j;
  j = std::clamp<std::size_t>(j, 1, samples_.size());
  return samples_[j - 1];
}

double KsDistanceSorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("empty sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  // Both ECDFs are constant between consecutive merged points, so checking
  // the right-continuous value at every jump suffices.
  while (i < a.size() || j < b.size()) {
    double z;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      z = a[i];
    } else {
      z = b[j];
    }
    while (i < a.size() && a[i] <= z) ++i;
    while (j < b.size() && b[j] <= z) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
  }
  return sup;
}

}  // namespace ces
