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

#include "ces/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ces/error.hpp"

namespace ces {

TestParams TestParams::FromTunables(double mu, double zeta,
                                    const std::function<double(double)>& f0_cdf,
                                    double alpha) {
  TestParams p;
  p.mu = mu;
  p.zeta = zeta;
  p.alpha = alpha;
  p.threshold = std::sqrt(f0_cdf(mu) * f0_cdf(zeta));
  return p;
}

int Decide(double score, double threshold) { return score > threshold ? 1 : 0; }

namespace {

double HoeffdingTail(std::int64_t m, double gap, double log_d) {
  return std::exp(-2.0 * static_cast<double>(m) * gap * gap / (log_d * log_d));
}

void CheckCommon(const TestParams& params, const DistributionSummary& dist,
                 std::int64_t m) {
  if (!params.mu || !params.zeta) {
    throw PreconditionError("bound needs the tunable parameters mu and zeta");
  }
  if (!(dist.log_d > 0.0)) throw PreconditionError("log d must be positive");
  if (m < 0) throw PreconditionError("length must be nonnegative");
}

}  // namespace

double FprBound(const TestParams& params, const DistributionSummary& dist,
                std::int64_t m) {
  CheckCommon(params, dist, m);
  if (!(*params.mu > dist.mu0)) {
    throw PreconditionError("FPR bound needs mu > mu0");
  }
  if (!(*params.zeta > dist.zeta0)) {
    throw PreconditionError("FPR bound needs zeta > zeta0");
  }
  return HoeffdingTail(m, *params.mu - dist.mu0, dist.log_d);
}

double TprBound(const TestParams& params, const DistributionSummary& dist,
                std::int64_t m, double f1_at_zeta) {
  CheckCommon(params, dist, m);
  if (!(*params.mu < dist.mu1)) {
    throw PreconditionError("TPR bound needs mu < mu1");
  }
  if (!(*params.zeta < dist.zeta1)) {
    throw PreconditionError("TPR bound needs zeta < zeta1");
  }
  if (!(f1_at_zeta >= 0.0 && f1_at_zeta < 1.0)) {
    throw PreconditionError("F1(zeta) must lie in [0, 1)");
  }
  const double miss = std::pow(f1_at_zeta, static_cast<double>(m)) +
                      HoeffdingTail(m, dist.mu1 - *params.mu, dist.log_d);
  return std::clamp(1.0 - miss, 0.0, 1.0);
}

TprBoundResult TprBounds(const TestParams& params,
                         const DistributionSummary& dist, std::int64_t m,
                         double f1_at_zeta,
                         const std::function<double(double)>& f0_cdf,
                         const std::function<double(double)>& f0_quantile) {
  TprBoundResult out;
  out.basic = TprBound(params, dist, m, f1_at_zeta);
  const double c = std::sqrt(f0_cdf(*params.mu) * f0_cdf(*params.zeta));
  if (c > f0_cdf(dist.mu1)) {
    const double gap = f0_quantile(c) - dist.mu1;
    const double miss_basic =
        std::pow(f1_at_zeta, static_cast<double>(m)) +
        HoeffdingTail(m, dist.mu1 - *params.mu, dist.log_d);
    const double miss =
        std::min(HoeffdingTail(m, gap, dist.log_d), miss_basic);
    out.tighter = std::clamp(1.0 - miss, 0.0, 1.0);
  }
  return out;
}

TestParams SelectThreshold(std::span<const double> scores,
                           std::span<const int> labels, ThresholdPolicy policy,
                           double alpha) {
  if (scores.size() != labels.size()) {
    throw PreconditionError("scores and labels differ in length");
  }
  if (policy == ThresholdPolicy::kMaxTprAtFpr &&
      !(alpha >= 0.0 && alpha <= 1.0)) {
    throw PreconditionError("alpha must lie in [0, 1]");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0, neg = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw PreconditionError("labels must be 0 or 1");
    (l == 1 ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) {
    throw PreconditionError("threshold selection needs both classes");
  }

  // Walk thresholds from high to low; after consuming every score above a
  // candidate the running counts are exactly the rejections at it.
  TestParams best;
  best.alpha = alpha;
  double best_value = -std::numeric_limits<double>::infinity();
  double tp = 0, fp = 0;
  auto consider = [&](double threshold) {
    const double tpr = tp / pos;
    const double fpr = fp / neg;
    double value;
    if (policy == ThresholdPolicy::kYouden) {
      value = tpr - fpr;
    } else {
      if (fpr > alpha) return;
      value = tpr;
    }
    if (value > best_value) {
      best_value = value;
      best.threshold = threshold;
      best.tpr = tpr;
      best.fpr = fpr;
    }
  };
  consider(scores[order.front()]);
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    double next;
    if (i < order.size()) {
      const double lower = scores[order[i]];
      next = lower + 0.5 * (s - lower);
      // Adjacent doubles have no midpoint; the lower score still separates.
      if (!(next < s)) next = lower;
    } else {
      next = std::nextafter(s, -std::numeric_limits<double>::infinity());
    }
    consider(next);
  }
  return best;
}

double CesPerturbationBound(double epsilon, std::optional<double> eta) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  const double general = std::sqrt(2.0 * epsilon);
  if (!eta) return general;
  if (!(*eta > 0.0)) throw PreconditionError("eta must be positive");
  if (epsilon > *eta) throw PreconditionError("refined bound needs eps <= eta");
  return std::min(general, 2.0 * epsilon / *eta);
}

}  // namespace ces
