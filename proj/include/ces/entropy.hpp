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

#include <span>
#include <vector>

#include "ces/vocab.hpp"

namespace ces {

/// Absolute tolerance on the total mass of a probability vector.
inline constexpr double kMassTolerance = 1e-6;
/// Slack allowed above log(k) / log(d) when validating entropies.
inline constexpr double kEntropyBoundTolerance = 1e-9;

/// Shannon entropy -sum p log p in nats, with 0 log 0 = 0.
///
/// Probabilities must be nonnegative. When `renormalize` is false the mass
/// must already be 1 within kMassTolerance; otherwise it is divided out
/// first (and must be positive).
double TokenEntropy(std::span<const double> probs, bool renormalize = false);

/// Entropy of one decoding step given its top-k log-probabilities.
/// kRenormalize turns the list into a proper distribution on k outcomes;
/// kRaw sums -p log p over the returned mass only.
double EntropyFromTopK(std::span<const double> logprobs, TopkPolicy policy);

/// Per-step entropies of one generation.
class EntropySequence {
 public:
  EntropySequence(std::vector<double> values, VocabInfo vocab);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const VocabInfo& vocab() const { return vocab_; }

 private:
  std::vector<double> values_;
  VocabInfo vocab_;
};

struct SummaryStats {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Quantile of an ascending sample by linear interpolation between order
/// statistics at position (n - 1) * p.
double SortedQuantile(std::span<const double> sorted, double p);

/// Summaries of a nonempty sequence. The mean is accumulated over the
/// sorted values so that the result does not depend on input order.
SummaryStats Summarize(std::span<const double> values);
inline SummaryStats Summarize(const EntropySequence& seq) {
  return Summarize(seq.values());
}

}  // namespace ces
