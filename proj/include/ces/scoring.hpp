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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ces/entropy.hpp"
#include "ces/record_store.hpp"
#include "ces/reference_cdf.hpp"

namespace ces {

enum class Stat { kMean, kMedian, kMax, kQ25, kQ75 };
enum class Aggregation { kGeometric, kArithmetic };

const char* StatName(Stat s);
Stat ParseStat(const std::string& text);

/// Two distinct entropy summaries pushed through the reference CDF and
/// combined. {mean, max, geometric} is CES itself.
struct ComboSpec {
  Stat first = Stat::kMean;
  Stat second = Stat::kMax;
  Aggregation aggregation = Aggregation::kGeometric;

  /// "mean,max,geometric" style, as used on the command line.
  static ComboSpec Parse(const std::string& text);
  std::string ToString() const;
  bool operator==(const ComboSpec&) const = default;
};

/// Every ordered pair of distinct statistics under both aggregations.
std::vector<ComboSpec> AllComboSpecs();

double StatValue(const SummaryStats& s, Stat stat);

/// sqrt(F(mean) * F(max)) for an arbitrary CDF F.
double CesFromCdf(double mean, double max,
                  const std::function<double(double)>& cdf);

/// Calibrated Entropy Score against the reference ECDF.
double CesScore(const EntropySequence& seq, const ReferenceCdf& ref);
double ComboScore(const EntropySequence& seq, const ReferenceCdf& ref,
                  const ComboSpec& spec);

/// Length-normalised entropy: the mean of the sequence.
double LneScore(const EntropySequence& seq);
/// exp(-(1/m) sum log p(z_t)) over the realized-token probabilities.
double PerplexityScore(std::span<const double> realized_probs);
std::int64_t LengthScore(const EntropySequence& seq);
/// One-sample KS statistic of the sequence ECDF against the reference.
/// Needs m >= 2.
double Ks1Score(const EntropySequence& seq, const ReferenceCdf& ref);

enum class MethodKind { kCes, kLne, kPerplexity, kLength, kKs1, kCombo };

struct Method {
  MethodKind kind = MethodKind::kCes;
  ComboSpec combo;  // only for kCombo

  std::string Name() const;
  bool operator==(const Method&) const = default;
};

/// Parses "ces,lne,ppl,len,ks1,combo:mean,max,geometric". A combo entry
/// takes exactly three comma-separated fields.
std::vector<Method> ParseMethods(const std::string& text);

struct ScoreReport {
  std::string record_id;
  std::optional<int> label;
  std::int64_t gen_length = 0;
  /// One entry per requested method, in request order; nullopt marks a
  /// score that cannot be computed for this record (e.g. perplexity
  /// without realized-token probabilities, KS with m < 2).
  std::vector<std::pair<std::string, std::optional<double>>> scores;
  std::optional<int> decision;

  std::optional<double> Get(const std::string& method) const;
};

ScoreReport ScoreRecord(const GenerationRecord& record,
                        const ReferenceCdf& ref,
                        std::span<const Method> methods);

/// Scores records in input order, fanning out over `workers` threads.
std::vector<ScoreReport> ScoreRecords(std::span<const GenerationRecord> records,
                                      const ReferenceCdf& ref,
                                      std::span<const Method> methods,
                                      int workers = 1);

}  // namespace ces
