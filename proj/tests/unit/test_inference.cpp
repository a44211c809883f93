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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ces/error.hpp"
#include "ces/inference.hpp"

using namespace ces;

namespace {

TestParams Tunables(double mu, double zeta) {
  TestParams p;
  p.mu = mu;
  p.zeta = zeta;
  return p;
}

DistributionSummary Dist() {
  DistributionSummary d;
  d.mu0 = 0.3;
  d.mu1 = 0.7;
  d.zeta0 = 0.6;
  d.zeta1 = 1.0;
  d.log_d = 1.0;
  return d;
}

// Rejection rates by direct counting.
std::pair<double, double> Rates(const std::vector<double>& s, const std::vector<int>& y,
                                double c) {
  double tp = 0, fp = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int d = Decide(s[i], c);
    if (y[i] == 1) {
      pos += 1;
      tp += d;
    } else {
      neg += 1;
      fp += d;
    }
  }
  return {tp / pos, fp / neg};
}

}  // namespace

TEST_CASE("decision is strict") {
  CHECK(Decide(0.6, 0.5) == 1);
  CHECK(Decide(0.5, 0.5) == 0);
  CHECK(Decide(0.4, 0.5) == 0);
}

TEST_CASE("thresholds from tunables") {
  const auto p = TestParams::FromTunables(
      0.5, 0.8, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(p.threshold == doctest::Approx(std::sqrt(0.4)));
}

TEST_CASE("fpr bound") {
  auto d = Dist();
  d.mu0 = 0.0;
  CHECK(FprBound(Tunables(0.5, 0.9), d, 10) == doctest::Approx(std::exp(-5.0)));
  CHECK(FprBound(Tunables(0.5, 0.9), d, 10) == doctest::Approx(0.006738).epsilon(1e-4));
  CHECK(FprBound(Tunables(0.5, 0.9), d, 0) == 1.0);
  d.log_d = 2.0;
  CHECK(FprBound(Tunables(0.5, 0.9), d, 10) == doctest::Approx(std::exp(-1.25)));
  d.log_d = 1.0;
  CHECK_THROWS_AS(FprBound(Tunables(0.0, 0.9), d, 10), Error);
  CHECK_THROWS_AS(FprBound(Tunables(0.5, 0.5), d, 10), Error);
  CHECK_THROWS_AS(FprBound(TestParams{}, d, 10), Error);
  // Decreasing in m.
  double prev = 1.0;
  for (int m = 1; m < 200; m += 7) {
    const double b = FprBound(Tunables(0.5, 0.9), d, m);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("tpr bound") {
  auto d = Dist();
  d.mu1 = 1.0;
  d.zeta1 = 2.0;
  // 1 - 0^10 - exp(-2 * 10 * 0.25).
  CHECK(TprBound(Tunables(0.5, 1.5), d, 10, 0.0) == doctest::Approx(0.993262).epsilon(1e-6));
  d.log_d = 10.0;
  CHECK(TprBound(Tunables(0.5, 1.5), d, 1000, 0.9) == doctest::Approx(0.993262).epsilon(1e-6));
  d.log_d = 1.0;
  CHECK(TprBound(Tunables(0.5, 1.5), d, 10, 0.5) ==
        doctest::Approx(1.0 - std::pow(0.5, 10) - std::exp(-5.0)));
  CHECK(TprBound(Tunables(0.5, 1.5), d, 0, 0.5) == 0.0);
  CHECK_THROWS_AS(TprBound(Tunables(0.5, 2.0), d, 10, 0.5), Error);
  CHECK_THROWS_AS(TprBound(Tunables(1.0, 1.5), d, 10, 0.5), Error);
  CHECK_THROWS_AS(TprBound(Tunables(0.5, 1.5), d, 10, 1.0), Error);
}

TEST_CASE("tighter tpr form uses the reference quantile gap") {
  // F0 uniform on [0, 1]; c = sqrt(0.5 * 1) > F0(mu1) = 0.6.
  DistributionSummary d;
  d.mu0 = 0.2;
  d.mu1 = 0.6;
  d.zeta0 = 0.9;
  d.zeta1 = 2.0;
  d.log_d = 2.0;
  auto f0 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  auto q0 = [](double p) { return std::clamp(p, 0.0, 1.0); };
  const auto r = TprBounds(Tunables(0.5, 1.0), d, 100, 0.6, f0, q0);
  REQUIRE(r.tighter);
  const double gap = std::sqrt(0.5) - 0.6;
  const double gap_tail = std::exp(-2.0 * 100 * gap * gap / 4.0);
  const double basic_miss = std::pow(0.6, 100) + std::exp(-2.0 * 100 * 0.01 / 4.0);
  CHECK(r.basic == doctest::Approx(1.0 - basic_miss));
  CHECK(*r.tighter == doctest::Approx(1.0 - std::min(gap_tail, basic_miss)));
  CHECK(r.best() >= r.basic);
  // c below F0(mu1): no tighter form.
  const auto low = TprBounds(Tunables(0.2, 0.3), d, 100, 0.6, f0, q0);
  CHECK_FALSE(low.tighter);
  CHECK(low.best() == low.basic);
}

TEST_CASE("threshold selection on small examples") {
  const std::vector<double> s = {0.9, 0.8, 0.1};
  const std::vector<int> y = {1, 1, 0};
  const auto p = SelectThreshold(s, y, ThresholdPolicy::kMaxTprAtFpr, 0.0);
  CHECK(p.threshold == doctest::Approx(0.45));
  CHECK(*p.tpr == 1.0);
  CHECK(*p.fpr == 0.0);
  const auto j = SelectThreshold(s, y, ThresholdPolicy::kYouden);
  CHECK(*j.tpr - *j.fpr == 1.0);
  CHECK(j.threshold == doctest::Approx(0.45));
  CHECK_THROWS_AS(SelectThreshold(s, std::vector<int>{1, 1, 1},
                                  ThresholdPolicy::kYouden),
                  Error);
  CHECK_THROWS_AS(SelectThreshold(s, std::vector<int>{1, 0},
                                  ThresholdPolicy::kYouden),
                  Error);
}

TEST_CASE("ties in the objective go to the larger threshold") {
  // Every cut has J = 0 when scores do not separate.
  const std::vector<double> s = {0.5, 0.5, 0.2, 0.2};
  const std::vector<int> y = {1, 0, 1, 0};
  const auto p = SelectThreshold(s, y, ThresholdPolicy::kYouden);
  CHECK(p.threshold == 0.5);
  CHECK(*p.tpr == 0.0);
}

TEST_CASE("selected thresholds honour the fpr budget and maximize their objective") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 10 + trial;
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> y(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      y[i] = (i % 3 == 0) ? 1 : 0;
      s[i] = std::round((z(gen) + 0.8 * y[i]) * 20.0) / 20.0;
    }
    y[0] = 1;
    y[1] = 0;
    const double alpha = 0.05 + 0.01 * (trial % 10);
    const auto p = SelectThreshold(s, y, ThresholdPolicy::kMaxTprAtFpr, alpha);
    const auto [tpr, fpr] = Rates(s, y, p.threshold);
    CHECK(fpr <= alpha);
    CHECK(tpr == *p.tpr);
    CHECK(fpr == *p.fpr);
    // No cut at any observed score does better.
    std::vector<double> cuts = s;
    cuts.push_back(*std::min_element(s.begin(), s.end()) - 1.0);
    double best_tpr = 0.0, best_j = -1.0;
    for (double c : cuts) {
      const auto [t, f] = Rates(s, y, c);
      if (f <= alpha) best_tpr = std::max(best_tpr, t);
      best_j = std::max(best_j, t - f);
    }
    CHECK(tpr == best_tpr);
    const auto j = SelectThreshold(s, y, ThresholdPolicy::kYouden);
    const auto [jt, jf] = Rates(s, y, j.threshold);
    CHECK(jt - jf == doctest::Approx(best_j));
  }
}

TEST_CASE("perturbation bound") {
  CHECK(CesPerturbationBound(0.02) == doctest::Approx(0.2));
  CHECK(CesPerturbationBound(0.02, 0.5) == doctest::Approx(0.08));
  CHECK(CesPerturbationBound(0.02, 0.02) == doctest::Approx(0.2));
  CHECK_THROWS_AS(CesPerturbationBound(0.1, 0.05), Error);
  CHECK_THROWS_AS(CesPerturbationBound(0.0), Error);
}

TEST_CASE("perturbation bound holds on a grid of cdf values") {
  // |sqrt(ab) - sqrt(a'b')| over all a, b, a', b' in [0,1] with |a-a'|, |b-b'| <= eps.
  for (double eps : {0.01, 0.05, 0.1, 0.3}) {
    const double bound = CesPerturbationBound(eps);
    const double refined = CesPerturbationBound(eps, 0.5);
    double worst = 0.0, worst_refined = 0.0;
    const int steps = 60;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        const double a = static_cast<double>(i) / steps;
        const double b = static_cast<double>(j) / steps;
        for (int sa = -1; sa <= 1; sa += 2) {
          for (int sb = -1; sb <= 1; sb += 2) {
            const double a2 = std::clamp(a + sa * eps, 0.0, 1.0);
            const double b2 = std::clamp(b + sb * eps, 0.0, 1.0);
            const double diff = std::abs(std::sqrt(a * b) - std::sqrt(a2 * b2));
            worst = std::max(worst, diff);
            if (a >= 0.5 && b >= 0.5 && a2 >= 0.5 && b2 >= 0.5) {
              worst_refined = std::max(worst_refined, diff);
            }
          }
        }
      }
    }
    CHECK(worst <= bound + 1e-12);
    CHECK(worst_refined <= refined + 1e-12);
  }
}
