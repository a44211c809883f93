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
#include <string>

namespace ces {

enum class EntropyBasis { kFull, kTopK };

/// How entropies are formed from a truncated top-k list.
enum class TopkPolicy { kRenormalize, kRaw };

/// Support of the entropy values: [0, log d] for full-vocabulary
/// distributions, [0, log k] for top-k lists.
struct VocabInfo {
  EntropyBasis basis = EntropyBasis::kFull;
  std::int64_t size = 0;  // d for the full basis, k for top-k
  TopkPolicy policy = TopkPolicy::kRenormalize;

  static VocabInfo Full(std::int64_t d);
  static VocabInfo TopK(std::int64_t k,
                        TopkPolicy policy = TopkPolicy::kRenormalize);

  /// Natural-log upper bound on a single token entropy.
  double LogBound() const;

  /// Parses "full:<d>" or "topk:<k>" (optionally "topk:<k>:raw").
  static VocabInfo Parse(const std::string& text);
  std::string ToString() const;

  bool operator==(const VocabInfo&) const = default;
};

void Validate(const VocabInfo& vocab);

/// Full vs top-k and matching size/policy. Mismatch throws.
void RequireCompatible(const VocabInfo& reference, const VocabInfo& input);

}  // namespace ces
