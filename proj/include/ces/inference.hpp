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

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

namespace ces {

/// Threshold c for the test "reject H0 iff CES > c", optionally derived from
/// the tunable pair (mu, zeta) as c = sqrt(F0(mu) F0(zeta)).
struct TestParams {
  std::optional<double> mu;
  std::optional<double> zeta;
  double alpha = 0.05;
  double threshold = 0.5;
  // Empirical operating point when the threshold was fitted on data.
  std::optional<double> tpr;
  std::optional<double> fpr;

  static TestParams FromTunables(double mu, double zeta,
                                 const std::function<double(double)>& f0_cdf,
                                 double alpha = 0.05);
};

/// Population facts about the faithful (0) and hallucinated (1) entropy
/// distributions: means, right endpoints, and the entropy range log d.
struct DistributionSummary {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double zeta0 = 0.0;
  double zeta1 = 0.0;
  double log_d = 1.0;
};

/// 1 (hallucination, reject H0) iff score > threshold.
int Decide(double score, double threshold);

/// exp(-2 m (mu - mu0)^2 / (log d)^2). Needs mu > mu0 and zeta > zeta0.
double FprBound(const TestParams& params, const DistributionSummary& dist,
                std::int64_t m);

struct TprBoundResult {
  /// 1 - F1(zeta)^m - exp(-2 m (mu1 - mu)^2 / (log d)^2), clamped to [0,1].
  double basic = 0.0;
  /// 1 - min{exp(-2 m (F0^-1(c) - mu1)^2 / (log d)^2), 1 - basic}, present
  /// when c = sqrt(F0(mu) F0(zeta)) > F0(mu1).
  std::optional<double> tighter;

  double best() const { return tighter ? std::max(basic, *tighter) : basic; }
};

/// Lower bound on P_{F1}(CES >= c). Needs mu < mu1, zeta < zeta1 and
/// F1(zeta) in [0, 1).
double TprBound(const TestParams& params, const DistributionSummary& dist,
                std::int64_t m, double f1_at_zeta);

/// As TprBound, adding the tighter form. `f0_quantile` must be the
/// generalized inverse inf{x : F0(x) >= p}.
TprBoundResult TprBounds(const TestParams& params,
                         const DistributionSummary& dist, std::int64_t m,
                         double f1_at_zeta,
                         const std::function<double(double)>& f0_cdf,
                         const std::function<double(double)>& f0_quantile);

enum class ThresholdPolicy { kMaxTprAtFpr, kYouden };

/// Picks a threshold from the empirical ROC of (scores, labels).
///
/// Candidates are the midpoints between adjacent distinct scores, plus the
/// largest score (reject nothing) and the value just below the smallest
/// (reject everything). Ties in the objective go to the larger threshold.
TestParams SelectThreshold(std::span<const double> scores,
                           std::span<const int> labels, ThresholdPolicy policy,
                           double alpha = 0.05);

/// Worst-case |CES_hat - CES*| when sup |F0_hat - F0| <= eps: sqrt(2 eps),
/// or min(sqrt(2 eps), 2 eps / eta) when both CDF values are >= eta.
double CesPerturbationBound(double epsilon, std::optional<double> eta = {});

}  // namespace ces
