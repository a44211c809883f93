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
#include <limits>
#include <random>
#include <vector>

#include "ces/calibration.hpp"
#include "ces/error.hpp"
#include "../oracles.hpp"

using namespace ces;

namespace {

const VocabInfo kVocab = VocabInfo::Full(100);

GenerationRecord Rec(std::vector<double> h, std::optional<int> label) {
  GenerationRecord r;
  r.id = "r";
  r.entropies = std::move(h);
  r.label = label;
  r.vocab = kVocab;
  return r;
}

}  // namespace

TEST_CASE("supervised keeps only faithful records") {
  const std::vector<GenerationRecord> recs = {Rec({0.1, 0.3}, 0), Rec({0.9}, 1)};
  CalibrationParams p;
  const auto ref = Calibrate(recs, p, kVocab);
  CHECK(std::vector<double>(ref.samples().begin(), ref.samples().end()) ==
        std::vector<double>{0.1, 0.3});
  CHECK(ref.pooled_count() == 2);
  CHECK(ref.sequence_count() == 1);
  CHECK(ref.mode() == CalibrationMode::kSupervised);

  p.mode = CalibrationMode::kUnsupervised;
  const auto all = Calibrate(recs, p, kVocab);
  CHECK(std::vector<double>(all.samples().begin(), all.samples().end()) ==
        std::vector<double>{0.1, 0.3, 0.9});
  CHECK(all.pooled_count() == 3);
  CHECK(all.sequence_count() == 2);
}

TEST_CASE("supervised calibration failure modes") {
  CalibrationParams p;
  try {
    Calibrate(std::vector<GenerationRecord>{Rec({0.1}, 1), Rec({0.2}, 1)}, p,
              kVocab);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("empty calibration pool") != std::string::npos);
  }
  CHECK_THROWS_AS(
      Calibrate(std::vector<GenerationRecord>{Rec({0.1}, 0), Rec({0.2}, std::nullopt)},
                p, kVocab),
      Error);
  p.mode = CalibrationMode::kUnsupervised;
  CHECK_NOTHROW(Calibrate(
      std::vector<GenerationRecord>{Rec({0.1}, 0), Rec({0.2}, std::nullopt)}, p,
      kVocab));
}

TEST_CASE("ecdf evaluation at and around samples") {
  const auto ref = ReferenceCdf::FromSamples({0.1, 0.2, 0.3}, kVocab);
  CHECK(ref.Evaluate(0.2) == doctest::Approx(2.0 / 3.0));
  CHECK(ref.Evaluate(0.05) == 0.0);
  CHECK(ref.Evaluate(0.3) == 1.0);
  CHECK(ref.Evaluate(7.0) == 1.0);
  const auto ties = ReferenceCdf::FromSamples({0.1, 0.1, 0.5}, kVocab);
  CHECK(ties.Evaluate(0.1) == doctest::Approx(2.0 / 3.0));
  CHECK(ties.EvaluateLeft(0.1) == 0.0);
  CHECK(ties.Quantile(0.5) == 0.1);
  CHECK(ties.Quantile(2.0 / 3.0) == 0.1);
  CHECK(ties.Quantile(0.7) == 0.5);
  CHECK(std::isinf(ties.Quantile(0.0)));
}

TEST_CASE("pooled ecdf equals concatenate-then-count") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::uniform_int_distribution<int> len(1, 15);
  std::uniform_int_distribution<int> count(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> seqs(static_cast<std::size_t>(count(gen)));
    std::vector<int> labels;
    std::vector<double> concat;
    for (auto& s : seqs) {
      s.resize(static_cast<std::size_t>(len(gen)));
      for (auto& h : s) h = std::round(u(gen) * 8.0) / 8.0;  // force ties
      labels.push_back(static_cast<int>(gen() % 2));
      if (labels.back() == 0) concat.insert(concat.end(), s.begin(), s.end());
    }
    if (concat.empty()) {
      labels[0] = 0;
      concat = seqs[0];
    }
    const auto ref =
        CalibrateSequences(seqs, labels, CalibrationMode::kSupervised, kVocab);
    CHECK(ref.pooled_count() == static_cast<std::int64_t>(concat.size()));
    for (double z = -0.25; z <= 4.25; z += 1.0 / 64.0) {
      CHECK(ref.Evaluate(z) == oracle::Ecdf(concat, z));
    }
    // Right-continuous and nondecreasing at every sample.
    double prev = 0.0;
    std::vector<double> distinct(ref.samples().begin(), ref.samples().end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (double s : distinct) {
      const double left = std::nextafter(s, -1.0);
      CHECK(ref.Evaluate(left) <= ref.Evaluate(s));
      CHECK(ref.Evaluate(left) >= prev);
      CHECK(ref.Evaluate(s) == oracle::Ecdf(concat, s));
      prev = ref.Evaluate(s);
    }
    CHECK(ref.Evaluate(ref.samples().back()) == 1.0);
  }
}

TEST_CASE("dkw bound forms") {
  const auto b = DkwTailBound(200, 0.1);
  CHECK(b.worst_case == doctest::Approx(2.0 * std::exp(-4.0)).epsilon(1e-12));
  CHECK(b.worst_case == doctest::Approx(0.0366313).epsilon(1e-6));
  CHECK_FALSE(b.conditional);

  const std::vector<std::int64_t> ones(200, 1);
  const auto same = DkwTailBound(200, 0.1, ones);
  CHECK(*same.conditional == doctest::Approx(same.worst_case));
  CHECK(*same.length_averaged == doctest::Approx(same.worst_case));

  const std::vector<std::int64_t> lengths = {3, 7, 10};
  const auto t = DkwTailBound(3, 0.3, lengths);
  CHECK(*t.conditional == doctest::Approx(2.0 * std::exp(-2.0 * 20 * 0.09)));
  const double avg = (std::exp(-2 * 3 * 0.09) + std::exp(-2 * 7 * 0.09) +
                      std::exp(-2 * 10 * 0.09)) / 3.0;
  CHECK(*t.length_averaged == doctest::Approx(2.0 * std::pow(avg, 3)));
  CHECK(*t.conditional <= t.worst_case);

  double prev = 2.0;
  for (double eps = 0.01; eps < 5.0; eps *= 1.5) {
    const double v = DkwTailBound(10, eps).worst_case;
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(DkwTailBound(10, 100.0).worst_case < 1e-300);
  CHECK_THROWS_AS(DkwTailBound(10, 0.0), Error);
  CHECK_THROWS_AS(DkwTailBound(2, 0.1, std::vector<std::int64_t>{1}), Error);
}

TEST_CASE("sample complexity and contamination budget") {
  CHECK(RequiredSamples(0.05, 0.05) == 738);
  CHECK_THROWS_AS(RequiredSamples(0.05, 2.0), Error);
  CHECK_THROWS_AS(RequiredSamples(0.0, 0.05), Error);
  const auto a = RequiredSamples(0.1, 0.01);
  const auto b = RequiredSamples(0.05, 0.01);
  CHECK(b >= 4 * a - 4);
  CHECK(b <= 4 * a);
  CHECK(ContaminationBudget(0.05, 0.1) == doctest::Approx(0.15));
  CHECK(ContaminationBudget(0.05, 0.0) == 0.05);
  CHECK(ContaminationBudget(0.02, 0.27) == doctest::Approx(0.29));
  CHECK_THROWS_AS(ContaminationBudget(0.05, 1.0), Error);
  CHECK_THROWS_AS(ContaminationBudget(-0.05, 0.1), Error);
}

TEST_CASE("calibration params validation") {
  CalibrationParams p;
  CHECK_NOTHROW(p.Validate());
  p.delta = 1.0;
  CHECK_THROWS_AS(p.Validate(), Error);
  p.delta = 0.05;
  p.gamma = 1.0;
  CHECK_THROWS_AS(p.Validate(), Error);
}

TEST_CASE("sup deviation checks both sides of each jump") {
  const auto ref = ReferenceCdf::FromSamples({0.5}, kVocab);
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(SupDeviation(ref, uniform) == doctest::Approx(0.5));
  const auto two = ReferenceCdf::FromSamples({0.1, 0.2}, kVocab);
  // Right of 0.2 the ECDF is 1 while F = 0.2.
  CHECK(SupDeviation(two, uniform) == doctest::Approx(0.8));
  // Against a dense-grid oracle.
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + trial);
    for (auto& x : v) x = u(gen);
    const auto r = ReferenceCdf::FromSamples(v, kVocab);
    double grid = 0.0;
    for (double s : v) {
      grid = std::max(grid, std::abs(oracle::Ecdf(v, s) - s));
      grid = std::max(grid, std::abs(oracle::EcdfLeft(v, s) - s));
    }
    CHECK(SupDeviation(r, uniform) == doctest::Approx(grid).epsilon(1e-15));
  }
}
