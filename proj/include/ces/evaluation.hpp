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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ces {

/// Mann-Whitney AUROC: P(random positive outscores random negative), ties
/// counted 1/2. Labels are 0/1 and both classes must be present.
double Auroc(std::span<const double> scores, std::span<const int> labels);

struct BootstrapResult {
  double point = 0.0;  // AUROC on the full sample
  double lo = 0.0;     // 2.5th percentile
  double hi = 0.0;     // 97.5th percentile
  double std = 0.0;
  /// Resamples discarded because they held one class only.
  std::int64_t redraws = 0;
};

/// Percentile bootstrap of the AUROC. Iteration i draws from substream i of
/// `seed`, so the result is the same for any worker count.
BootstrapResult BootstrapAuroc(std::span<const double> scores,
                               std::span<const int> labels, int iterations,
                               std::uint64_t seed, int workers = 1);

struct KsResult {
  double statistic = 0.0;  // D
  /// Asymptotic p-value; absent when either sample has fewer than 2 points.
  std::optional<double> p_value;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
};

/// Two-sample KS test with the exact D and the asymptotic Kolmogorov
/// p-value at effective size n1 n2 / (n1 + n2) (Stephens' small-sample
/// adjustment applied to the argument).
KsResult KsTwoSample(std::span<const double> a, std::span<const double> b);

/// Permutation p-value for D, for small samples.
double KsPermutationPValue(std::span<const double> a,
                           std::span<const double> b, int permutations,
                           std::uint64_t seed);

struct ShapeTestResult {
  KsResult ks;
  std::int64_t excluded_a = 0;  // sequences shorter than 2
  std::int64_t excluded_b = 0;
};

/// Subtracts each sequence's own mean, pools per class, and runs the
/// two-sample KS test on the centred pools.
ShapeTestResult MeanCentredShapeTest(
    std::span<const std::vector<double>> seqs_a,
    std::span<const std::vector<double>> seqs_b);

/// (mean_b - mean_a) / pooled sd with (n-1)-weighted variances.
double CohensD(std::span<const double> a, std::span<const double> b);

struct DiagnosticsReport {
  double rho1 = 0.0;         // raw lag-1 autocorrelation
  double neff_ratio = 1.0;   // (1 - r) / (1 + r) with r capped
  bool white_noise = true;   // |rho1| <= 1.96 / sqrt(m)
};

inline constexpr double kRhoCap = 0.999;

DiagnosticsReport AutocorrDiagnostics(std::span<const double> seq,
                                      double rho_cap = kRhoCap);

/// Effective-sample-size ratio for a given lag-1 autocorrelation.
double NeffRatio(double rho1, double rho_cap = kRhoCap);

struct LengthBin {
  std::int64_t lo = 1;  // inclusive
  std::int64_t hi = 1;  // inclusive
};

struct BinAuroc {
  LengthBin bin;
  std::int64_t n = 0;
  std::int64_t positives = 0;
  std::optional<double> auroc;  // undefined when a class is missing
};

/// Parses "1-5,6-15,16-" (open upper end allowed on the last bin).
std::vector<LengthBin> ParseLengthBins(const std::string& text);

std::vector<BinAuroc> StratifiedAuroc(std::span<const double> scores,
                                      std::span<const int> labels,
                                      std::span<const std::int64_t> lengths,
                                      std::span<const LengthBin> bins);

struct RankAnalysis {
  std::vector<double> avg_ranks;  // 1 = best (highest value)
  double chi2_f = 0.0;
  double chi2_p = 1.0;
  double iman_davenport_f = 0.0;
  double iman_davenport_p = 1.0;
  double q_alpha = 0.0;
  double critical_difference = 0.0;
};

/// Friedman test with Iman-Davenport correction and the Nemenyi critical
/// difference over an experiments x methods matrix (row-major, higher is
/// better).
RankAnalysis FriedmanNemenyi(const std::vector<std::vector<double>>& matrix,
                             double alpha = 0.05);

/// Nemenyi CD = q_alpha sqrt(k (k + 1) / (6 N)), q_alpha being the normal
/// range quantile divided by sqrt(2).
double NemenyiCriticalDifference(int methods, int experiments, double alpha);

}  // namespace ces
