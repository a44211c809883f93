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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ces/entropy.hpp"
#include "ces/reference_cdf.hpp"
#include "ces/vocab.hpp"

namespace ces {

/// One decoding step as dumped by the generator: either a token ->
/// probability map or a top-k list of token log-probabilities.
struct StepDistribution {
  std::vector<std::string> tokens;
  std::vector<double> values;
  bool logprobs = false;
};

/// One prompt/output pair with its per-token uncertainty and optional judge
/// label (1 = hallucinated, 0 = faithful).
struct GenerationRecord {
  std::string id;
  std::optional<std::string> input_text;
  std::vector<std::string> output_tokens;
  std::optional<std::vector<StepDistribution>> token_probs;
  /// Always populated after loading; derived from token_probs if absent.
  std::vector<double> entropies;
  /// Probability of each realized token, when it can be read off token_probs.
  std::optional<std::vector<double>> realized_probs;
  std::optional<int> label;
  std::string model;
  std::string dataset;
  /// Fields not part of the schema, kept verbatim.
  nlohmann::json extra = nlohmann::json::object();
  /// Basis the record was validated against.
  VocabInfo vocab;

  std::size_t length() const { return entropies.size(); }
  EntropySequence sequence() const { return EntropySequence(entropies, vocab); }
};

/// Parses and validates a single record line. `line_number` only feeds
/// error messages.
GenerationRecord ParseRecord(const std::string& line, const VocabInfo& vocab,
                             std::size_t line_number = 0);

std::vector<GenerationRecord> ReadRecords(std::istream& in,
                                          const VocabInfo& vocab);
std::vector<GenerationRecord> LoadRecords(const std::filesystem::path& path,
                                          const VocabInfo& vocab);

/// Re-serializes a record, including passthrough fields.
nlohmann::json RecordToJson(const GenerationRecord& record);

// Reference CDF persistence. The encoding is textual with shortest
// round-trip decimal doubles, so Load(Save(c)) == c bit for bit.
void WriteReference(const ReferenceCdf& cdf, std::ostream& out);
ReferenceCdf ReadReference(std::istream& in);
void SaveReference(const ReferenceCdf& cdf, const std::filesystem::path& path);
ReferenceCdf LoadReference(const std::filesystem::path& path);

/// 64-bit FNV-1a over the serialized reference, as 16 hex digits.
std::string Fingerprint(const ReferenceCdf& cdf);
/// The same hash over arbitrary bytes.
std::string FingerprintBytes(std::string_view bytes);

/// Shortest decimal text that parses back to exactly `value`.
std::string FormatDouble(double value);

}  // namespace ces
