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

#include "ces/calibration.hpp"
#include "ces/error.hpp"
#include "ces/rng.hpp"
#include "ces/synthlab.hpp"

using namespace ces;
using namespace ces::synth;

namespace {

SynthConfig Small() {
  SynthConfig c;
  c.f0 = TruncatedNormal(0.35, 0.15, 0.0, 1.0);
  c.f1 = TruncatedNormal(0.55, 0.15, 0.0, 1.0);
  c.lengths = {5, 20, 80};
  c.trials_per_cell = 300;
  c.dkw_cells = {{50, 0.15}};
  c.pool_size = 4000;
  c.gammas = {0.0, 0.2};
  c.calibration_tokens = 500;
  c.test_size = 100;
  c.flip_probs = {0.0, 0.5, 1.0};
  c.repeats = 10;
  c.calibration_records = 100;
  c.subsample_sizes = {20, 80};
  return c;
}

}  // namespace

TEST_CASE("distribution cdf and quantile agree") {
  const auto tn = TruncatedNormal(0.5, 0.2, 0.0, 1.0);
  const auto be = ScaledBeta(2.0, 5.0, 0.0, 2.0);
  const auto un = Uniform(0.0, 3.0);
  for (const auto* d : {tn.get(), be.get(), un.get()}) {
    CHECK(d->Cdf(d->LeftEndpoint()) == doctest::Approx(0.0));
    CHECK(d->Cdf(d->RightEndpoint()) == doctest::Approx(1.0));
    for (double p = 0.05; p < 1.0; p += 0.05) {
      CHECK(d->Cdf(d->Quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    }
    // Sample mean against the analytic mean.
    Rng rng(7);
    double s = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) s += d->Sample(rng);
    CHECK(s / n == doctest::Approx(d->Mean()).epsilon(0.02));
  }
  CHECK(un->Mean() == 1.5);
  CHECK(be->Mean() == doctest::Approx(2.0 * 2.0 / 7.0));
  CHECK(un->Cdf(1.0) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(TruncatedNormal(0.5, 0.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(Uniform(1.0, 1.0), Error);
}

TEST_CASE("pool distribution is its own ecdf") {
  const auto pool = Pool({0.1, 0.1, 0.4, 0.9});
  CHECK(pool->Cdf(0.1) == 0.5);
  CHECK(pool->Cdf(0.09) == 0.0);
  CHECK(pool->Quantile(0.5) == 0.1);
  CHECK(pool->Quantile(0.51) == 0.4);
  CHECK(pool->Mean() == doctest::Approx(0.375));
  CHECK(pool->RightEndpoint() == 0.9);
  CHECK(pool->Atoms().size() == 4);
  const auto other = Pool({0.1, 0.4});
  CHECK(KsDistance(*pool, *other, 0.0, 1.0) == doctest::Approx(0.25));
  const auto ref = ReferenceCdf::FromSamples({0.1, 0.4}, VocabInfo::Full(2));
  CHECK(EcdfDeviation(ref, *pool) == doctest::Approx(0.25));
}

TEST_CASE("distributions from json") {
  const auto d = DistributionFromJson({{"family", "beta"}, {"a", 2.0}, {"b", 2.0}}, 2.0);
  CHECK(d->RightEndpoint() == doctest::Approx(2.0));
  CHECK(d->Mean() == doctest::Approx(1.0));
  CHECK(DistributionFromJson(d->Spec(), 2.0)->Cdf(0.7) == d->Cdf(0.7));
  CHECK_THROWS_AS(DistributionFromJson({{"family", "cauchy"}}, 1.0), Error);
  CHECK_THROWS_AS(DistributionFromJson({{"family", "truncnorm"}, {"loc", 0.5}}, 1.0),
                  Error);
  CHECK_THROWS_AS(DistributionFromJson({{"family", "pool"}, {"path", "/nonexistent"}}, 1.0),
                  Error);
}

TEST_CASE("config round-trips and rejects unknown keys") {
  const nlohmann::json j = {
      {"f0", {{"family", "uniform"}}},
      {"f1", {{"family", "truncnorm"}, {"loc", 0.7}, {"scale", 0.2}}},
      {"log_d", 1.0},
      {"trials_per_cell", 50},
      {"dkw_cells", {{{"L", 10}, {"epsilon", 0.2}}}}};
  const auto c = SynthConfig::FromJson(j);
  CHECK(c.trials_per_cell == 50);
  CHECK(c.dkw_cells[0].sequences == 10);
  const auto again = SynthConfig::FromJson(c.ToJson());
  CHECK(again.ToJson() == c.ToJson());
  auto bad = j;
  bad["trails_per_cell"] = 5;
  CHECK_THROWS_AS(SynthConfig::FromJson(bad), Error);
  bad = j;
  bad.erase("f1");
  CHECK_THROWS_AS(SynthConfig::FromJson(bad), Error);
  bad = j;
  bad["gammas"] = {0.0, 1.0};
  CHECK_THROWS_AS(SynthConfig::FromJson(bad), Error);
}

TEST_CASE("dkw cells stay under the bound") {
  auto c = Small();
  c.dkw_cells = {{50, 0.15}, {1, 0.05}};
  c.length_min = 1;
  c.length_max = 20;
  const auto rows = VerifyDkw(c);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.pass_worst_case);
    const double raw = 2.0 * std::exp(-2.0 * r.sequences * r.epsilon * r.epsilon);
    CHECK(r.worst_case_bound == doctest::Approx(std::min(1.0, raw)));
    CHECK(r.length_averaged_bound <= r.worst_case_bound);
  }
  // One sequence of 10^4 tokens.
  c.dkw_cells = {{1, 0.02}};
  c.length_min = c.length_max = 10000;
  c.trials_per_cell = 50;
  const auto big = VerifyDkw(c);
  CHECK(big[0].pass_length_averaged);
  CHECK(big[0].max_deviation < 0.05);
}

TEST_CASE("results do not depend on the worker count") {
  auto a = Small();
  auto b = Small();
  a.workers = 1;
  b.workers = 6;
  const auto da = VerifyErrorDecay(a);
  const auto db = VerifyErrorDecay(b);
  CHECK(da.threshold == db.threshold);
  REQUIRE(da.rows.size() == db.rows.size());
  for (std::size_t i = 0; i < da.rows.size(); ++i) {
    CHECK(da.rows[i].type1 == db.rows[i].type1);
    CHECK(da.rows[i].type2 == db.rows[i].type2);
  }
  CHECK(VerifyDkw(a)[0].max_deviation == VerifyDkw(b)[0].max_deviation);
  const auto ca = VerifyContamination(a);
  const auto cb = VerifyContamination(b);
  CHECK(ca.rows[1].max_ks == cb.rows[1].max_ks);
  CHECK(ca.rows[1].mean_auroc == cb.rows[1].mean_auroc);
  const auto ta = BoundTrials(a, 20, 0.5, 1);
  const auto tb = BoundTrials(b, 20, 0.5, 1);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i].ces == tb[i].ces);
  a.seed = 43;
  CHECK(VerifyErrorDecay(a).rows[0].type1 != da.rows[0].type1);
}

TEST_CASE("errors decay and bounds hold on a separated pair") {
  const auto d = VerifyErrorDecay(Small());
  REQUIRE(d.rows.size() == 3);
  CHECK(d.rows.back().type1 <= d.rows.front().type1);
  CHECK(d.rows.back().type2 <= d.rows.front().type2);
  CHECK(d.slope_type1 < 0.0);
  CHECK(d.slope_type2 < 0.0);
  CHECK(d.mu1 > d.mu0);
  CHECK_FALSE(d.bounds.empty());
  for (const auto& b : d.bounds) {
    CHECK(b.pass_fpr);
    CHECK(b.pass_tpr);
  }
}

TEST_CASE("identical classes give errors summing to one") {
  auto c = Small();
  c.f1 = c.f0;
  c.trials_per_cell = 2000;
  c.lengths = {10, 50};
  const auto d = VerifyErrorDecay(c);
  CHECK(d.bounds.empty());
  for (const auto& r : d.rows) CHECK(std::abs(r.type1 + r.type2 - 1.0) < 0.07);
}

TEST_CASE("inverted means are refused") {
  auto c = Small();
  std::swap(c.f0, c.f1);
  CHECK_THROWS_AS(VerifyErrorDecay(c), Error);
}

TEST_CASE("contamination stays within budget") {
  const auto r = VerifyContamination(Small());
  REQUIRE(r.rows.size() == 2);
  CHECK(r.ks_f0_f1 > 0.0);
  for (const auto& row : r.rows) {
    CHECK(row.pass());
    CHECK(row.budget == doctest::Approx(row.epsilon + row.gamma));
    CHECK(row.epsilon == doctest::Approx(DkwRadius(
                             static_cast<std::int64_t>(std::llround(
                                 500 * (1.0 - row.gamma))), 1e-6)));
  }
}

TEST_CASE("noisy judge survives every flip probability") {
  const auto rows = VerifyNoisyJudge(Small());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].mean_hallucinated_in_reference == 0.0);
  CHECK(rows[2].mean_hallucinated_in_reference > 0.5);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.gap));
    CHECK(r.unsupervised == rows[0].unsupervised);
  }
}

TEST_CASE("ks power grows with n and holds its level under the null") {
  auto c = Small();
  c.repeats = 200;
  c.subsample_sizes = {20, 80, 320};
  const auto p = KsPowerCurve(c);
  CHECK(p.monotone);
  CHECK(p.rows.back().rejection_rate > 0.9);
  c.f1 = c.f0;
  c.repeats = 1000;
  c.subsample_sizes = {200};
  const auto null = KsPowerCurve(c);
  CHECK(null.rows[0].rejection_rate <= 0.05 + 3 * BinomialSe(0.05, 1000));
}

TEST_CASE("fitted threshold keeps its level") {
  auto c = Small();
  c.trials_per_cell = 2000;
  const auto l = VerifyLevel(c, 10);
  CHECK(l.pass);
  CHECK(l.fpr <= c.alpha + 3 * std::sqrt(2.0) * BinomialSe(c.alpha, 2000));
}
