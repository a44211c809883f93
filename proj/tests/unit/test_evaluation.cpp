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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ces/error.hpp"
#include "ces/evaluation.hpp"
#include "ces/stats.hpp"
#include "../oracles.hpp"

using namespace ces;

TEST_CASE("auroc on small examples") {
  CHECK(Auroc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == 1.0);
  CHECK(Auroc(std::vector<double>{0.1, 0.9}, std::vector<int>{1, 0}) == 0.0);
  CHECK(Auroc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}) == 0.5);
  // Pairs: (0.8 vs 0.3) win, (0.8 vs 0.8) tie, (0.2 vs 0.3) lose, (0.2 vs 0.8) lose.
  CHECK(Auroc(std::vector<double>{0.8, 0.2, 0.3, 0.8}, std::vector<int>{1, 1, 0, 0}) ==
        doctest::Approx(1.5 / 4.0));
  CHECK_THROWS_AS(Auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
  CHECK_THROWS_AS(Auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 2}), Error);
  CHECK_THROWS_AS(Auroc(std::vector<double>{0.1}, std::vector<int>{1, 0}), Error);
}

TEST_CASE("auroc matches the pairwise oracle with ties") {
  std::mt19937_64 gen(44);
  std::uniform_int_distribution<int> level(0, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + static_cast<std::size_t>(trial % 60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(gen() % 2);
      s[i] = level(gen) * 0.25 + 0.1 * y[i];
    }
    y[0] = 0;
    y[1] = 1;
    const double a = Auroc(s, y);
    CHECK(std::abs(a - oracle::Auroc(s, y)) <= 1e-12);
    // Invariant under a strictly increasing map; complementary under negation.
    std::vector<double> t(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = std::exp(3.0 * s[i]) - 7.0;
      neg[i] = -s[i];
    }
    CHECK(Auroc(t, y) == a);
    CHECK(Auroc(neg, y) + a == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("bootstrap is deterministic and independent of workers") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> s(300);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < s.size(); ++i) {
    y[i] = i % 4 == 0 ? 1 : 0;
    s[i] = z(gen) + 0.7 * y[i];
  }
  const auto a = BootstrapAuroc(s, y, 500, 42, 1);
  const auto b = BootstrapAuroc(s, y, 500, 42, 1);
  const auto c = BootstrapAuroc(s, y, 500, 42, 7);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.std == b.std);
  CHECK(a.lo == c.lo);
  CHECK(a.hi == c.hi);
  CHECK(a.std == c.std);
  CHECK(a.point == Auroc(s, y));
  CHECK(a.lo <= a.point);
  CHECK(a.point <= a.hi);
  CHECK(a.std > 0.0);
  const auto d = BootstrapAuroc(s, y, 500, 43, 1);
  CHECK(d.lo != a.lo);

  const auto one = BootstrapAuroc(s, y, 1, 42);
  CHECK(one.lo == one.hi);
  CHECK_THROWS_AS(BootstrapAuroc(s, y, 0, 42), Error);

  const std::vector<double> sep = {0.1, 0.2, 0.3, 0.8, 0.9, 0.95};
  const std::vector<int> sy = {0, 0, 0, 1, 1, 1};
  const auto p = BootstrapAuroc(sep, sy, 200, 1);
  CHECK(p.lo == 1.0);
  CHECK(p.hi == 1.0);
}

TEST_CASE("two-sample ks") {
  std::vector<double> a(1000), b(1000);
  for (int i = 0; i < 1000; ++i) {
    a[static_cast<std::size_t>(i)] = i / 999.0;
    b[static_cast<std::size_t>(i)] = 0.5 + i / 999.0;
  }
  const auto r = KsTwoSample(a, b);
  CHECK(r.statistic == doctest::Approx(0.5).epsilon(2e-3));
  REQUIRE(r.p_value);
  CHECK(*r.p_value < 1e-10);
  CHECK(KsTwoSample(b, a).statistic == r.statistic);
  CHECK(KsTwoSample(a, a).statistic == 0.0);
  CHECK(*KsTwoSample(a, a).p_value == doctest::Approx(1.0));
  CHECK_FALSE(KsTwoSample(std::vector<double>{1.0}, a).p_value);
  CHECK_THROWS_AS(KsTwoSample(std::vector<double>{}, a), Error);

  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> level(0, 20);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + trial % 30), w(1 + trial % 17);
    for (auto& v : x) v = level(gen) * 0.1;
    for (auto& v : w) v = level(gen) * 0.1 + 0.3;
    const double d = KsTwoSample(x, w).statistic;
    CHECK(std::abs(d - oracle::KsGrid(x, w)) <= 1e-12);
    CHECK(KsTwoSample(w, x).statistic == d);
  }
}

TEST_CASE("kolmogorov survival") {
  CHECK(stats::KolmogorovSurvival(0.0) == 1.0);
  CHECK(stats::KolmogorovSurvival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(stats::KolmogorovSurvival(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
  CHECK(stats::KolmogorovSurvival(5.0) < 1e-20);
}

TEST_CASE("permutation p-value") {
  const std::vector<double> a = {0.1, 0.2, 0.3, 0.4, 0.5};
  const std::vector<double> b = {1.1, 1.2, 1.3, 1.4, 1.5};
  const double p = KsPermutationPValue(a, b, 999, 3);
  // Only 2 of the 252 splits reach D = 1.
  CHECK(p < 0.03);
  CHECK(KsPermutationPValue(a, b, 999, 3) == p);
  CHECK(KsPermutationPValue(a, a, 99, 3) == 1.0);
}

TEST_CASE("shape test ignores location") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> base, shifted, spread;
  std::int64_t n_tokens = 0;
  for (int i = 0; i < 400; ++i) {
    std::vector<double> s(20), t(20), u(20);
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = z(gen);
      t[k] = z(gen) + 3.0 + 0.01 * i;
      u[k] = 2.0 * z(gen);
    }
    n_tokens += 20;
    base.push_back(s);
    shifted.push_back(t);
    spread.push_back(u);
  }
  base.push_back({1.0});
  const auto same = MeanCentredShapeTest(base, shifted);
  CHECK(same.excluded_a == 1);
  CHECK(same.excluded_b == 0);
  CHECK(same.ks.statistic <= 2.0 / std::sqrt(static_cast<double>(n_tokens)));
  const auto wide = MeanCentredShapeTest(base, spread);
  CHECK(wide.ks.statistic > 0.1);
  CHECK(*wide.ks.p_value < 1e-6);
  const std::vector<std::vector<double>> singles = {{1.0}, {2.0}};
  CHECK_THROWS_AS(MeanCentredShapeTest(singles, base), Error);
}

TEST_CASE("cohen's d") {
  CHECK(CohensD(std::vector<double>{0.0, 2.0}, std::vector<double>{2.0, 4.0}) ==
        doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(CohensD(std::vector<double>{1, 2, 3}, std::vector<double>{2, 3, 4}) ==
        doctest::Approx(1.0));
  CHECK(CohensD(std::vector<double>{2, 3, 4}, std::vector<double>{1, 2, 3}) ==
        doctest::Approx(-1.0));
  CHECK_THROWS_AS(CohensD(std::vector<double>{1, 1}, std::vector<double>{2, 2}), Error);
  CHECK_THROWS_AS(CohensD(std::vector<double>{1}, std::vector<double>{2, 3}), Error);
}

TEST_CASE("lag-1 autocorrelation and effective size") {
  CHECK(NeffRatio(0.061) == doctest::Approx(0.885).epsilon(1e-3));
  CHECK(NeffRatio(0.0) == 1.0);
  CHECK(NeffRatio(-1.0) == doctest::Approx(1.999 / 0.001));
  CHECK(std::isfinite(NeffRatio(1.0)));
  std::vector<double> alt(50);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : 0.0;
  const auto r = AutocorrDiagnostics(alt);
  CHECK(r.rho1 < -0.9);
  CHECK(std::isfinite(r.neff_ratio));
  CHECK_FALSE(r.white_noise);
  CHECK_THROWS_AS(AutocorrDiagnostics(std::vector<double>(10, 0.3)), Error);
  CHECK_THROWS_AS(AutocorrDiagnostics(std::vector<double>{0.1, 0.2}), Error);

  std::mt19937_64 gen(15);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> noise(4000);
  for (auto& v : noise) v = z(gen);
  const auto w = AutocorrDiagnostics(noise);
  CHECK(std::abs(w.rho1) < 0.05);
  // AR(1) with phi = 0.6.
  std::vector<double> ar(4000);
  ar[0] = z(gen);
  for (std::size_t t = 1; t < ar.size(); ++t) ar[t] = 0.6 * ar[t - 1] + z(gen);
  CHECK(AutocorrDiagnostics(ar).rho1 == doctest::Approx(0.6).epsilon(0.1));
}

TEST_CASE("length bins and stratified auroc") {
  const auto bins = ParseLengthBins("1-5,6-15,16-");
  REQUIRE(bins.size() == 3);
  CHECK(bins[1].lo == 6);
  CHECK(bins[1].hi == 15);
  CHECK(bins[2].hi == std::numeric_limits<std::int64_t>::max());
  CHECK(ParseLengthBins("3")[0].hi == 3);
  CHECK_THROWS_AS(ParseLengthBins("a-b"), Error);
  CHECK_THROWS_AS(ParseLengthBins(""), Error);

  const std::vector<double> s = {0.9, 0.1, 0.2, 0.8, 0.5, 0.6};
  const std::vector<int> y = {1, 0, 1, 0, 1, 1};
  const std::vector<std::int64_t> len = {2, 3, 10, 12, 30, 40};
  const auto r = StratifiedAuroc(s, y, len, bins);
  REQUIRE(r.size() == 3);
  CHECK(r[0].n == 2);
  CHECK(*r[0].auroc == 1.0);
  CHECK(*r[1].auroc == 0.0);
  CHECK(r[2].positives == 2);
  CHECK_FALSE(r[2].auroc);
  CHECK_THROWS_AS(StratifiedAuroc(s, y, len, ParseLengthBins("1-5,5-9,10-")), Error);
  CHECK_THROWS_AS(StratifiedAuroc(s, y, len, ParseLengthBins("1-5")), Error);
}

TEST_CASE("friedman and nemenyi") {
  const std::vector<std::vector<double>> same(10, std::vector<double>{0.7, 0.7, 0.7});
  const auto flat = FriedmanNemenyi(same);
  CHECK(flat.chi2_f == doctest::Approx(0.0));
  CHECK(flat.avg_ranks == std::vector<double>{2.0, 2.0, 2.0});

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.5, 0.7);
  std::vector<std::vector<double>> m(20);
  for (auto& row : m) row = {u(gen), 0.9 + 0.01 * u(gen), u(gen), u(gen)};
  const auto r = FriedmanNemenyi(m);
  CHECK(r.avg_ranks[1] == 1.0);
  CHECK(r.chi2_p < 1e-3);
  CHECK(r.iman_davenport_p < r.chi2_p);
  // k = 4: q = 2.569.
  CHECK(r.q_alpha == doctest::Approx(2.569).epsilon(1e-3));
  CHECK(r.critical_difference == doctest::Approx(2.569 * std::sqrt(20.0 / 120.0)).epsilon(1e-3));

  // Tabulated q for k = 17 is 3.458424619.
  CHECK(NemenyiCriticalDifference(17, 80, 0.05) ==
        doctest::Approx(3.458424619 * std::sqrt(17.0 * 18.0 / 480.0)).epsilon(1e-6));
  CHECK(NemenyiCriticalDifference(17, 79, 0.05) == doctest::Approx(2.779).epsilon(5e-4));
  CHECK(NemenyiCriticalDifference(10, 30, 0.05) ==
        doctest::Approx(3.163684 * std::sqrt(110.0 / 180.0)).epsilon(1e-6));
  CHECK(NemenyiCriticalDifference(2, 10, 0.05) ==
        doctest::Approx(1.960 * std::sqrt(6.0 / 60.0)).epsilon(1e-3));
  CHECK_THROWS_AS(FriedmanNemenyi({{1.0, 2.0}}), Error);
  CHECK_THROWS_AS(FriedmanNemenyi({{1.0, 2.0}, {1.0}}), Error);
}
