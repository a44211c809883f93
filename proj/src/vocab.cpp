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

#include "ces/vocab.hpp"

#include <charconv>
#include <cmath>

#include "ces/error.hpp"

namespace ces {

const char* ErrorKindName(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kUsage:
      return "usage";
    case ErrorKind::kValidation:
      return "validation";
    case ErrorKind::kPrecondition:
      return "precondition";
  }
  return "unknown";
}

VocabInfo VocabInfo::Full(std::int64_t d) {
  VocabInfo v{EntropyBasis::kFull, d, TopkPolicy::kRenormalize};
  Validate(v);
  return v;
}

VocabInfo VocabInfo::TopK(std::int64_t k, TopkPolicy policy) {
  VocabInfo v{EntropyBasis::kTopK, k, policy};
  Validate(v);
  return v;
}

double VocabInfo::LogBound() const {
  return std::log(static_cast<double>(size));
}

void Validate(const VocabInfo& vocab) {
  if (vocab.size < 1) {
    throw ValidationError("vocabulary size must be positive");
  }
}

namespace {

std::int64_t ParseSize(const std::string& text, std::size_t begin,
                       std::size_t end, const std::string& whole) {
  std::int64_t value = 0;
  const char* first = text.data() + begin;
  const char* last = text.data() + end;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 1) {
    throw UsageError("invalid basis '" + whole +
                     "': expected full:<d> or topk:<k>");
  }
  return value;
}

}  // namespace

VocabInfo VocabInfo::Parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw UsageError("invalid basis '" + text +
                     "': expected full:<d> or topk:<k>");
  }
  const std::string kind = text.substr(0, colon);
  if (kind == "full") {
    return Full(ParseSize(text, colon + 1, text.size(), text));
  }
  if (kind == "topk") {
    const auto second = text.find(':', colon + 1);
    if (second == std::string::npos) {
      return TopK(ParseSize(text, colon + 1, text.size(), text));
    }
    const std::string policy = text.substr(second + 1);
    TopkPolicy p;
    if (policy == "renormalize") {
      p = TopkPolicy::kRenormalize;
    } else if (policy == "raw") {
      p = TopkPolicy::kRaw;
    } else {
      throw UsageError("invalid top-k policy '" + policy + "'");
    }
    return TopK(ParseSize(text, colon + 1, second, text), p);
  }
  throw UsageError("invalid basis '" + text +
                   "': expected full:<d> or topk:<k>");
}

std::string VocabInfo::ToString() const {
  if (basis == EntropyBasis::kFull) return "full:" + std::to_string(size);
  std::string s = "topk:" + std::to_string(size);
  if (policy == TopkPolicy::kRaw) s += ":raw";
  return s;
}

void RequireCompatible(const VocabInfo& reference, const VocabInfo& input) {
  if (reference != input) {
    throw PreconditionError("basis mismatch: reference is " +
                            reference.ToString() + ", input is " +
                            input.ToString());
  }
}

}  // namespace ces
