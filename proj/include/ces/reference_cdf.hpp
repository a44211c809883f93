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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ces/vocab.hpp"

namespace ces {

enum class CalibrationMode { kSupervised, kUnsupervised };

const char* ModeName(CalibrationMode mode);
CalibrationMode ParseMode(const std::string& text);

/// Pooled empirical CDF of calibration token entropies.
///
/// Immutable once built; safe to share across scoring threads.
class ReferenceCdf {
 public:
  static constexpr int kFormatVersion = 1;

  /// `samples` need not be sorted. `lengths` holds the per-sequence token
  /// counts of the pooled sequences and may be empty when unknown, in
  /// which case `sequence_count` gives L.
  ReferenceCdf(std::vector<double> samples, std::vector<std::int64_t> lengths,
               std::int64_t sequence_count, CalibrationMode mode,
               VocabInfo vocab);

  /// Plain ECDF of a sample treated as one pooled sequence per value.
  static ReferenceCdf FromSamples(std::vector<double> samples,
                                  VocabInfo vocab,
                                  CalibrationMode mode =
                                      CalibrationMode::kUnsupervised);

  /// (1/N) #{samples <= z}.
  double Evaluate(double z) const;
  /// (1/N) #{samples < z}, the left limit at z.
  double EvaluateLeft(double z) const;
  /// inf{x : F(x) >= p}; -inf for p <= 0.
  double Quantile(double p) const;

  std::span<const double> samples() const { return samples_; }
  std::span<const std::int64_t> lengths() const { return lengths_; }
  std::int64_t pooled_count() const {
    return static_cast<std::int64_t>(samples_.size());
  }
  std::int64_t sequence_count() const { return sequence_count_; }
  CalibrationMode mode() const { return mode_; }
  const VocabInfo& vocab() const { return vocab_; }
  int format_version() const { return kFormatVersion; }

  bool operator==(const ReferenceCdf&) const = default;

 private:
  std::vector<double> samples_;
  std::vector<std::int64_t> lengths_;
  std::int64_t sequence_count_ = 0;
  CalibrationMode mode_ = CalibrationMode::kUnsupervised;
  VocabInfo vocab_;
};

/// sup_z |F_a(z) - F_b(z)| between the ECDFs of two ascending samples,
/// evaluated exactly over the union of their jump points.
double KsDistanceSorted(std::span<const double> a, std::span<const double> b);

}  // namespace ces
