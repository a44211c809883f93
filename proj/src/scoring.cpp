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

#include "ces/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ces/error.hpp"
#include "ces/parallel.hpp"

namespace ces {

const char* StatName(Stat s) {
  switch (s) {
    case Stat::kMean:
      return "mean";
    case Stat::kMedian:
      return "median";
    case Stat::kMax:
      return "max";
    case Stat::kQ25:
      return "q25";
    case Stat::kQ75:
      return "q75";
  }
  return "?";
}

Stat ParseStat(const std::string& text) {
  for (Stat s : {Stat::kMean, Stat::kMedian, Stat::kMax, Stat::kQ25,
                 Stat::kQ75}) {
    if (text == StatName(s)) return s;
  }
  throw UsageError("unknown statistic '" + text + "'");
}

ComboSpec ComboSpec::Parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 3) {
    throw UsageError("combo spec '" + text + "' must be stat,stat,aggregation");
  }
  ComboSpec spec;
  spec.first = ParseStat(parts[0]);
  spec.second = ParseStat(parts[1]);
  if (spec.first == spec.second) {
    throw UsageError("combo spec needs two distinct statistics");
  }
  if (parts[2] == "geometric") {
    spec.aggregation = Aggregation::kGeometric;
  } else if (parts[2] == "arithmetic") {
    spec.aggregation = Aggregation::kArithmetic;
  } else {
    throw UsageError("unknown aggregation '" + parts[2] + "'");
  }
  return spec;
}

std::string ComboSpec::ToString() const {
  return std::string(StatName(first)) + "," + StatName(second) + "," +
         (aggregation == Aggregation::kGeometric ? "geometric" : "arithmetic");
}

std::vector<ComboSpec> AllComboSpecs() {
  const Stat stats[] = {Stat::kMean, Stat::kMedian, Stat::kMax, Stat::kQ25,
                        Stat::kQ75};
  std::vector<ComboSpec> out;
  for (Aggregation agg : {Aggregation::kGeometric, Aggregation::kArithmetic}) {
    for (Stat a : stats) {
      for (Stat b : stats) {
        if (a != b) out.push_back({a, b, agg});
      }
    }
  }
  return out;
}

double StatValue(const SummaryStats& s, Stat stat) {
  switch (stat) {
    case Stat::kMean:
      return s.mean;
    case Stat::kMedian:
      return s.median;
    case Stat::kMax:
      return s.max;
    case Stat::kQ25:
      return s.q25;
    case Stat::kQ75:
      return s.q75;
  }
  return s.mean;
}

double CesFromCdf(double mean, double max,
                  const std::function<double(double)>& cdf) {
  return std::sqrt(cdf(mean) * cdf(max));
}

double ComboScore(const EntropySequence& seq, const ReferenceCdf& ref,
                  const ComboSpec& spec) {
  RequireCompatible(ref.vocab(), seq.vocab());
  const SummaryStats s = Summarize(seq);
  const double a = ref.Evaluate(StatValue(s, spec.first));
  const double b = ref.Evaluate(StatValue(s, spec.second));
  if (spec.aggregation == Aggregation::kGeometric) return std::sqrt(a * b);
  return 0.5 * (a + b);
}

double CesScore(const EntropySequence& seq, const ReferenceCdf& ref) {
  return ComboScore(seq, ref, ComboSpec{});
}

double LneScore(const EntropySequence& seq) { return Summarize(seq).mean; }

double PerplexityScore(std::span<const double> realized_probs) {
  if (realized_probs.empty()) {
    throw PreconditionError("perplexity needs realized-token probabilities");
  }
  double total = 0.0;
  for (double p : realized_probs) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw PreconditionError("realized-token probability is zero or invalid");
    }
    total += std::log(p);
  }
  return std::exp(-total / static_cast<double>(realized_probs.size()));
}

std::int64_t LengthScore(const EntropySequence& seq) {
  return static_cast<std::int64_t>(seq.size());
}

double Ks1Score(const EntropySequence& seq, const ReferenceCdf& ref) {
  RequireCompatible(ref.vocab(), seq.vocab());
  if (seq.size() < 2) {
    throw PreconditionError("KS score needs at least 2 tokens");
  }
  std::vector<double> sorted(seq.values().begin(), seq.values().end());
  std::sort(sorted.begin(), sorted.end());
  return KsDistanceSorted(sorted, ref.samples());
}

std::string Method::Name() const {
  switch (kind) {
    case MethodKind::kCes:
      return "ces";
    case MethodKind::kLne:
      return "lne";
    case MethodKind::kPerplexity:
      return "ppl";
    case MethodKind::kLength:
      return "len";
    case MethodKind::kKs1:
      return "ks1";
    case MethodKind::kCombo:
      return "combo:" + combo.ToString();
  }
  return "?";
}

std::vector<Method> ParseMethods(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  std::vector<Method> methods;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    Method m;
    if (p == "ces") {
      m.kind = MethodKind::kCes;
    } else if (p == "lne") {
      m.kind = MethodKind::kLne;
    } else if (p == "ppl") {
      m.kind = MethodKind::kPerplexity;
    } else if (p == "len") {
      m.kind = MethodKind::kLength;
    } else if (p == "ks1") {
      m.kind = MethodKind::kKs1;
    } else if (p.rfind("combo:", 0) == 0) {
      if (i + 2 >= parts.size()) {
        throw UsageError("combo method needs stat,stat,aggregation");
      }
      m.kind = MethodKind::kCombo;
      m.combo = ComboSpec::Parse(p.substr(6) + "," + parts[i + 1] + "," +
                                 parts[i + 2]);
      i += 2;
    } else {
      throw UsageError("unknown method '" + p + "'");
    }
    if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
      throw UsageError("method '" + m.Name() + "' listed twice");
    }
    methods.push_back(m);
  }
  if (methods.empty()) throw UsageError("no scoring methods given");
  return methods;
}

std::optional<double> ScoreReport::Get(const std::string& method) const {
  for (const auto& [name, value] : scores) {
    if (name == method) return value;
  }
  return std::nullopt;
}

ScoreReport ScoreRecord(const GenerationRecord& record,
                        const ReferenceCdf& ref,
                        std::span<const Method> methods) {
  const EntropySequence seq = record.sequence();
  RequireCompatible(ref.vocab(), seq.vocab());
  ScoreReport report;
  report.record_id = record.id;
  report.label = record.label;
  report.gen_length = LengthScore(seq);
  for (const Method& m : methods) {
    std::optional<double> value;
    switch (m.kind) {
      case MethodKind::kCes:
        value = CesScore(seq, ref);
        break;
      case MethodKind::kLne:
        value = LneScore(seq);
        break;
      case MethodKind::kPerplexity:
        if (record.realized_probs) {
          value = PerplexityScore(*record.realized_probs);
        }
        break;
      case MethodKind::kLength:
        value = static_cast<double>(LengthScore(seq));
        break;
      case MethodKind::kKs1:
        if (seq.size() >= 2) value = Ks1Score(seq, ref);
        break;
      case MethodKind::kCombo:
        value = ComboScore(seq, ref, m.combo);
        break;
    }
    report.scores.emplace_back(m.Name(), value);
  }
  return report;
}

std::vector<ScoreReport> ScoreRecords(std::span<const GenerationRecord> records,
                                      const ReferenceCdf& ref,
                                      std::span<const Method> methods,
                                      int workers) {
  std::vector<ScoreReport> out(records.size());
  ParallelFor(records.size(), workers, [&](std::size_t i) {
    try {
      out[i] = ScoreRecord(records[i], ref, methods);
    } catch (const Error& e) {
      throw Error(e.kind(), "record '" + records[i].id + "': " + e.what());
    }
  });
  return out;
}

}  // namespace ces
