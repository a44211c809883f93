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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ces/record_store.hpp"
#include "ces/reference_cdf.hpp"

namespace ces {

struct CalibrationParams {
  double epsilon = 0.05;  // KS radius
  double delta = 0.05;    // failure probability
  CalibrationMode mode = CalibrationMode::kSupervised;
  std::optional<double> gamma;  // assumed contamination fraction

  void Validate() const;
};

/// Pools token entropies into the reference ECDF. Supervised mode keeps only
/// label-0 records and refuses unlabeled input; unsupervised pools everything.
ReferenceCdf Calibrate(std::span<const GenerationRecord> records,
                       const CalibrationParams& params, const VocabInfo& vocab);

/// Same pooling over bare entropy sequences with optional labels
/// (labels may be empty in unsupervised mode).
ReferenceCdf CalibrateSequences(std::span<const std::vector<double>> sequences,
                                std::span<const int> labels,
                                CalibrationMode mode, const VocabInfo& vocab);

struct DkwBound {
  /// 2 exp(-2 L eps^2).
  double worst_case = 1.0;
  /// 2 prod_i exp(-2 m_i eps^2): the bound conditional on the observed
  /// lengths m_1..m_L.
  std::optional<double> conditional;
  /// 2 (mean_i exp(-2 m_i eps^2))^L: plug-in estimate of the
  /// length-averaged bound.
  std::optional<double> length_averaged;
};

/// Tail bound on P(sup |F_hat - F| >= eps) for an ECDF pooled from L
/// sequences. Bounds are capped at 1.
DkwBound DkwTailBound(std::int64_t sequences, double epsilon,
                      std::span<const std::int64_t> lengths = {});

/// ceil(log(2/delta) / (2 eps^2)) sequences suffice for the worst-case bound.
std::int64_t RequiredSamples(double epsilon, double delta);

/// KS radius eps + gamma around F0 for a gamma-contaminated pool.
double ContaminationBudget(double epsilon, double gamma);

/// Smallest eps with 2 exp(-2 n eps^2) <= delta.
double DkwRadius(std::int64_t n, double delta);

/// Exact sup_z |F_hat(z) - F(z)| for a continuous reference CDF F, checking
/// each jump of the ECDF from both sides.
double SupDeviation(const ReferenceCdf& ecdf,
                    const std::function<double(double)>& cdf);

}  // namespace ces
