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

#include "ces/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ces/error.hpp"

namespace ces {

namespace {

// Accumulates -p log p over a nonnegative vector scaled by 1/total.
double ScaledEntropy(std::span<const double> probs, double total) {
  double h = 0.0;
  double first = 0.0;
  std::size_t support = 0;
  bool equal = true;
  for (double p : probs) {
    if (p <= 0.0) continue;
    if (support++ == 0) first = p;
    equal = equal && p == first;
    const double q = p / total;
    h -= q * std::log(q);
  }
  // Equal masses renormalize to the uniform law on the support.
  if (equal) return std::log(static_cast<double>(support));
  return std::max(0.0, h);
}

}  // namespace

double TokenEntropy(std::span<const double> probs, bool renormalize) {
  if (probs.empty()) {
    throw ValidationError("empty probability vector");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("negative or non-finite probability");
    }
    if (p > 1.0 + kMassTolerance) {
      throw ValidationError("probability outside [0,1]");
    }
    total += p;
  }
  if (renormalize) {
    if (total <= 0.0) throw ValidationError("zero total probability mass");
    return ScaledEntropy(probs, total);
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw ValidationError("probabilities sum to " + std::to_string(total) +
                          ", expected 1");
  }
  return ScaledEntropy(probs, 1.0);
}

double EntropyFromTopK(std::span<const double> logprobs, TopkPolicy policy) {
  if (logprobs.empty()) {
    throw ValidationError("empty top-k logprob list");
  }
  for (double lp : logprobs) {
    if (std::isnan(lp) || lp > 0.0) {
      throw ValidationError("positive or NaN logprob");
    }
  }
  if (policy == TopkPolicy::kRaw) {
    double h = 0.0;
    for (double lp : logprobs) {
      if (std::isinf(lp)) continue;
      h -= std::exp(lp) * lp;
    }
    return h;
  }
  // Shift by the largest logprob so the softmax never underflows entirely.
  const double top = *std::max_element(logprobs.begin(), logprobs.end());
  if (std::isinf(top)) {
    throw ValidationError("top-k list carries no probability mass");
  }
  std::vector<double> w(logprobs.size());
  std::transform(logprobs.begin(), logprobs.end(), w.begin(),
                 [top](double lp) { return std::exp(lp - top); });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  return ScaledEntropy(w, total);
}

EntropySequence::EntropySequence(std::vector<double> values, VocabInfo vocab)
    : values_(std::move(values)), vocab_(vocab) {
  if (values_.empty()) {
    throw ValidationError("empty entropy sequence");
  }
  const double bound = vocab_.LogBound() + kEntropyBoundTolerance;
  for (double h : values_) {
    if (std::isnan(h)) throw ValidationError("NaN entropy");
    if (h < 0.0) throw ValidationError("negative entropy");
    if (h > bound) {
      throw ValidationError("entropy " + std::to_string(h) +
                            " exceeds basis bound log(" +
                            std::to_string(vocab_.size) + ")");
    }
  }
}

double SortedQuantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw PreconditionError("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SummaryStats Summarize(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("empty sequence");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  // Rounding can push the mean a hair outside [min, max].
  s.mean = std::clamp(s.mean, sorted.front(), sorted.back());
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = SortedQuantile(sorted, 0.5);
  s.q25 = SortedQuantile(sorted, 0.25);
  s.q75 = SortedQuantile(sorted, 0.75);
  return s;
}

}  // namespace ces
