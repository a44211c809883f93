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

#include "ces/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ces/error.hpp"

namespace ces {

void CalibrationParams::Validate() const {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw PreconditionError("delta must lie in (0, 1)");
  }
  if (gamma && !(*gamma >= 0.0 && *gamma < 1.0)) {
    throw PreconditionError("gamma must lie in [0, 1)");
  }
}

ReferenceCdf CalibrateSequences(std::span<const std::vector<double>> sequences,
                                std::span<const int> labels,
                                CalibrationMode mode, const VocabInfo& vocab) {
  const bool supervised = mode == CalibrationMode::kSupervised;
  if (supervised && labels.size() != sequences.size()) {
    throw PreconditionError("supervised calibration needs a label per record");
  }
  if (!labels.empty() && labels.size() != sequences.size()) {
    throw PreconditionError("labels and sequences differ in length");
  }
  std::vector<double> pooled;
  std::vector<std::int64_t> lengths;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (supervised && labels[i] != 0) continue;
    const auto& seq = sequences[i];
    if (seq.empty()) throw ValidationError("empty entropy sequence");
    pooled.insert(pooled.end(), seq.begin(), seq.end());
    lengths.push_back(static_cast<std::int64_t>(seq.size()));
  }
  if (lengths.empty()) throw PreconditionError("empty calibration pool");
  const auto kept = static_cast<std::int64_t>(lengths.size());
  return ReferenceCdf(std::move(pooled), std::move(lengths), kept, mode,
                      vocab);
}

ReferenceCdf Calibrate(std::span<const GenerationRecord> records,
                       const CalibrationParams& params,
                       const VocabInfo& vocab) {
  params.Validate();
  std::vector<std::vector<double>> sequences;
  std::vector<int> labels;
  sequences.reserve(records.size());
  for (const auto& r : records) {
    RequireCompatible(vocab, r.vocab);
    (void)r.sequence();
    sequences.push_back(r.entropies);
    if (params.mode == CalibrationMode::kSupervised) {
      if (!r.label) {
        throw PreconditionError("supervised calibration: record '" + r.id +
                                "' has no label");
      }
      labels.push_back(*r.label);
    }
  }
  return CalibrateSequences(sequences, labels, params.mode, vocab);
}

DkwBound DkwTailBound(std::int64_t sequences, double epsilon,
                      std::span<const std::int64_t> lengths) {
  if (sequences < 1) throw PreconditionError("L must be positive");
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  const double e2 = epsilon * epsilon;
  DkwBound out;
  out.worst_case = std::min(
      1.0, 2.0 * std::exp(-2.0 * static_cast<double>(sequences) * e2));
  if (!lengths.empty()) {
    if (static_cast<std::int64_t>(lengths.size()) != sequences) {
      throw PreconditionError("lengths must have one entry per sequence");
    }
    // Product of exponentials, accumulated in the exponent.
    double total = 0.0;
    double mean_term = 0.0;
    for (std::int64_t m : lengths) {
      if (m < 1) throw PreconditionError("sequence length must be positive");
      total += static_cast<double>(m);
      mean_term += std::exp(-2.0 * static_cast<double>(m) * e2);
    }
    mean_term /= static_cast<double>(sequences);
    out.conditional = std::min(1.0, 2.0 * std::exp(-2.0 * total * e2));
    out.length_averaged = std::min(
        1.0, 2.0 * std::pow(mean_term, static_cast<double>(sequences)));
  }
  return out;
}

std::int64_t RequiredSamples(double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw PreconditionError("delta must lie in (0, 1)");
  }
  const double n = std::log(2.0 / delta) / (2.0 * epsilon * epsilon);
  return static_cast<std::int64_t>(std::ceil(n));
}

double ContaminationBudget(double epsilon, double gamma) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw PreconditionError("gamma must lie in [0, 1)");
  }
  return epsilon + gamma;
}

double DkwRadius(std::int64_t n, double delta) {
  if (n < 1) throw PreconditionError("sample size must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw PreconditionError("delta must lie in (0, 1)");
  }
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

double SupDeviation(const ReferenceCdf& ecdf,
                    const std::function<double(double)>& cdf) {
  const auto samples = ecdf.samples();
  const double n = static_cast<double>(samples.size());
  double sup = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    const double x = samples[i];
    std::size_t j = i;
    while (j < samples.size() && samples[j] == x) ++j;
    const double f = cdf(x);
    const double below = static_cast<double>(i) / n;  // left limit
    const double at = static_cast<double>(j) / n;
    sup = std::max({sup, std::abs(at - f), std::abs(below - f)});
    i = j;
  }
  return sup;
}

}  // namespace ces
