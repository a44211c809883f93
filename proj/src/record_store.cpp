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

#include "ces/record_store.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ces/error.hpp"

namespace ces {

using nlohmann::json;

namespace {

const char* const kKnownFields[] = {"id",      "input_text", "output_tokens",
                                    "token_probs", "entropies", "label",
                                    "model",   "dataset"};

bool IsKnownField(const std::string& key) {
  for (const char* k : kKnownFields) {
    if (key == k) return true;
  }
  return false;
}

double AsNumber(const json& j, const char* what) {
  if (!j.is_number()) {
    throw ValidationError(std::string(what) + " must be a number");
  }
  return j.get<double>();
}

StepDistribution ParseStep(const json& j) {
  StepDistribution step;
  if (j.is_object()) {
    for (const auto& [token, value] : j.items()) {
      const double p = AsNumber(value, "probability");
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("probability outside [0,1]");
      }
      step.tokens.push_back(token);
      step.values.push_back(p);
    }
  } else if (j.is_array()) {
    step.logprobs = true;
    for (const auto& entry : j) {
      std::string token;
      double lp = 0.0;
      if (entry.is_object()) {
        if (!entry.contains("logprob")) {
          throw ValidationError("top-k entry without logprob");
        }
        token = entry.value("token", std::string());
        lp = AsNumber(entry.at("logprob"), "logprob");
      } else if (entry.is_array() && entry.size() == 2 &&
                 entry[0].is_string()) {
        token = entry[0].get<std::string>();
        lp = AsNumber(entry[1], "logprob");
      } else {
        throw ValidationError(
            "top-k entry must be {token, logprob} or [token, logprob]");
      }
      if (std::isnan(lp) || lp > 0.0) {
        throw ValidationError("logprob must be <= 0");
      }
      step.tokens.push_back(std::move(token));
      step.values.push_back(lp);
    }
  } else {
    throw ValidationError("token_probs step must be an object or array");
  }
  if (step.values.empty()) {
    throw ValidationError("empty token_probs step");
  }
  return step;
}

double StepEntropy(const StepDistribution& step, const VocabInfo& vocab) {
  if (vocab.basis == EntropyBasis::kTopK) {
    if (static_cast<std::int64_t>(step.values.size()) > vocab.size) {
      throw ValidationError("step lists " +
                            std::to_string(step.values.size()) +
                            " tokens, more than k=" +
                            std::to_string(vocab.size));
    }
    if (step.logprobs) return EntropyFromTopK(step.values, vocab.policy);
    if (vocab.policy == TopkPolicy::kRenormalize) {
      return TokenEntropy(step.values, /*renormalize=*/true);
    }
    double h = 0.0;
    for (double p : step.values) {
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  }
  if (!step.logprobs) return TokenEntropy(step.values);
  std::vector<double> probs(step.values.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = std::exp(step.values[i]);
  }
  return TokenEntropy(probs);
}

std::optional<double> RealizedProb(const StepDistribution& step,
                                   const std::string& token) {
  for (std::size_t i = 0; i < step.tokens.size(); ++i) {
    if (step.tokens[i] == token) {
      return step.logprobs ? std::exp(step.values[i]) : step.values[i];
    }
  }
  return std::nullopt;
}

GenerationRecord ParseRecordJson(const json& j, const VocabInfo& vocab) {
  if (!j.is_object()) throw ValidationError("record must be a JSON object");
  GenerationRecord r;
  r.vocab = vocab;

  if (!j.contains("id")) throw ValidationError("missing id");
  const json& id = j.at("id");
  if (id.is_string()) {
    r.id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    r.id = id.dump();
  } else {
    throw ValidationError("id must be a string");
  }

  if (j.contains("input_text") && !j.at("input_text").is_null()) {
    if (!j.at("input_text").is_string()) {
      throw ValidationError("input_text must be a string");
    }
    r.input_text = j.at("input_text").get<std::string>();
  }
  if (j.contains("output_tokens") && !j.at("output_tokens").is_null()) {
    const json& toks = j.at("output_tokens");
    if (!toks.is_array()) throw ValidationError("output_tokens must be a list");
    for (const auto& t : toks) {
      if (!t.is_string()) throw ValidationError("output token must be a string");
      r.output_tokens.push_back(t.get<std::string>());
    }
  }
  auto optional_string = [&j](const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::string();
    if (!j.at(key).is_string()) {
      throw ValidationError(std::string(key) + " must be a string");
    }
    return j.at(key).get<std::string>();
  };
  r.model = optional_string("model");
  r.dataset = optional_string("dataset");
  if (j.contains("label") && !j.at("label").is_null()) {
    const json& lab = j.at("label");
    int v = -1;
    if (lab.is_boolean()) {
      v = lab.get<bool>() ? 1 : 0;
    } else if (lab.is_number_integer()) {
      v = lab.get<int>();
    } else if (lab.is_number_float() &&
               (lab.get<double>() == 0.0 || lab.get<double>() == 1.0)) {
      v = static_cast<int>(lab.get<double>());
    }
    if (v != 0 && v != 1) throw ValidationError("label must be 0 or 1");
    r.label = v;
  }

  std::optional<std::vector<double>> given;
  if (j.contains("entropies") && !j.at("entropies").is_null()) {
    const json& e = j.at("entropies");
    if (!e.is_array()) throw ValidationError("entropies must be a list");
    std::vector<double> values;
    for (const auto& v : e) values.push_back(AsNumber(v, "entropy"));
    given = std::move(values);
  }
  if (j.contains("token_probs") && !j.at("token_probs").is_null()) {
    const json& tp = j.at("token_probs");
    if (!tp.is_array()) throw ValidationError("token_probs must be a list");
    std::vector<StepDistribution> steps;
    steps.reserve(tp.size());
    for (const auto& s : tp) steps.push_back(ParseStep(s));
    r.token_probs = std::move(steps);
  }

  if (!r.token_probs && !given) {
    throw ValidationError("record needs token_probs or entropies");
  }
  if (r.token_probs) {
    const auto& steps = *r.token_probs;
    if (!r.output_tokens.empty() && r.output_tokens.size() != steps.size()) {
      throw ValidationError("length mismatch between output_tokens (" +
                            std::to_string(r.output_tokens.size()) +
                            ") and token_probs (" +
                            std::to_string(steps.size()) + ")");
    }
    std::vector<double> computed;
    computed.reserve(steps.size());
    for (const auto& s : steps) computed.push_back(StepEntropy(s, vocab));
    if (given) {
      if (given->size() != computed.size()) {
        throw ValidationError("length mismatch between entropies and "
                              "token_probs");
      }
      for (std::size_t t = 0; t < computed.size(); ++t) {
        if (std::abs((*given)[t] - computed[t]) > 1e-9) {
          throw ValidationError("entropy at step " + std::to_string(t) +
                                " disagrees with token_probs");
        }
      }
      r.entropies = std::move(*given);
    } else {
      r.entropies = std::move(computed);
    }
    if (!r.output_tokens.empty()) {
      std::vector<double> realized;
      realized.reserve(steps.size());
      bool complete = true;
      for (std::size_t t = 0; t < steps.size() && complete; ++t) {
        auto p = RealizedProb(steps[t], r.output_tokens[t]);
        if (p) {
          realized.push_back(*p);
        } else {
          complete = false;
        }
      }
      if (complete) r.realized_probs = std::move(realized);
    }
  } else {
    if (!r.output_tokens.empty() && r.output_tokens.size() != given->size()) {
      throw ValidationError("length mismatch between output_tokens and "
                            "entropies");
    }
    r.entropies = std::move(*given);
  }
  // Domain checks (nonnegative, within basis bound, m >= 1).
  (void)r.sequence();

  for (const auto& [key, value] : j.items()) {
    if (!IsKnownField(key)) r.extra[key] = value;
  }
  return r;
}

bool IsBlank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

GenerationRecord ParseRecord(const std::string& line, const VocabInfo& vocab,
                             std::size_t line_number) {
  const std::string where =
      line_number > 0 ? "line " + std::to_string(line_number) + ": " : "";
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(where + "malformed JSON: " + e.what());
  }
  try {
    return ParseRecordJson(j, vocab);
  } catch (const Error& e) {
    throw Error(e.kind(), where + e.what());
  } catch (const json::exception& e) {
    throw ValidationError(where + e.what());
  }
}

std::vector<GenerationRecord> ReadRecords(std::istream& in,
                                          const VocabInfo& vocab) {
  std::vector<GenerationRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (IsBlank(line)) continue;
    records.push_back(ParseRecord(line, vocab, line_number));
  }
  return records;
}

std::vector<GenerationRecord> LoadRecords(const std::filesystem::path& path,
                                          const VocabInfo& vocab) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open record file " + path.string());
  return ReadRecords(in, vocab);
}

json RecordToJson(const GenerationRecord& r) {
  json j = r.extra;
  j["id"] = r.id;
  if (r.input_text) j["input_text"] = *r.input_text;
  j["output_tokens"] = r.output_tokens;
  if (r.token_probs) {
    json steps = json::array();
    for (const auto& s : *r.token_probs) {
      if (s.logprobs) {
        json list = json::array();
        for (std::size_t i = 0; i < s.values.size(); ++i) {
          list.push_back({{"token", s.tokens[i]}, {"logprob", s.values[i]}});
        }
        steps.push_back(std::move(list));
      } else {
        json map = json::object();
        for (std::size_t i = 0; i < s.values.size(); ++i) {
          map[s.tokens[i]] = s.values[i];
        }
        steps.push_back(std::move(map));
      }
    }
    j["token_probs"] = std::move(steps);
  }
  j["entropies"] = r.entropies;
  if (r.label) j["label"] = *r.label;
  j["model"] = r.model;
  j["dataset"] = r.dataset;
  return j;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw ValidationError("cannot format double");
  return std::string(buf, ptr);
}

namespace {

constexpr const char* kMagic = "CESREF";

double ParseDouble(const std::string& token) {
  double v = 0.0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ValidationError("malformed number '" + token + "' in reference");
  }
  return v;
}

std::int64_t ParseInt(const std::string& token) {
  std::int64_t v = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ValidationError("malformed integer '" + token + "' in reference");
  }
  return v;
}

std::string Expect(std::istream& in, const char* key) {
  std::string k, v;
  if (!(in >> k) || k != key || !(in >> v)) {
    throw ValidationError(std::string("reference: expected '") + key + "'");
  }
  return v;
}

}  // namespace

void WriteReference(const ReferenceCdf& cdf, std::ostream& out) {
  const VocabInfo& v = cdf.vocab();
  out << kMagic << ' ' << cdf.format_version() << '\n';
  out << "mode " << ModeName(cdf.mode()) << '\n';
  out << "basis " << (v.basis == EntropyBasis::kFull ? "full" : "topk") << '\n';
  out << "size " << v.size << '\n';
  out << "policy "
      << (v.policy == TopkPolicy::kRenormalize ? "renormalize" : "raw") << '\n';
  out << "L " << cdf.sequence_count() << '\n';
  out << "N " << cdf.pooled_count() << '\n';
  out << "lengths " << cdf.lengths().size() << '\n';
  for (std::int64_t m : cdf.lengths()) out << m << '\n';
  out << "samples\n";
  for (double s : cdf.samples()) out << FormatDouble(s) << '\n';
}

ReferenceCdf ReadReference(std::istream& in) {
  std::string magic;
  if (!(in >> magic) || magic != kMagic) {
    throw ValidationError("not a reference file (bad magic)");
  }
  std::string version_text;
  if (!(in >> version_text)) throw ValidationError("reference: missing version");
  const auto version = ParseInt(version_text);
  if (version != ReferenceCdf::kFormatVersion) {
    throw ValidationError("unsupported reference format version " +
                          version_text);
  }
  const CalibrationMode mode = [&] {
    const std::string m = Expect(in, "mode");
    if (m == "supervised") return CalibrationMode::kSupervised;
    if (m == "unsupervised") return CalibrationMode::kUnsupervised;
    throw ValidationError("reference: unknown mode '" + m + "'");
  }();
  VocabInfo vocab;
  const std::string basis = Expect(in, "basis");
  if (basis == "full") {
    vocab.basis = EntropyBasis::kFull;
  } else if (basis == "topk") {
    vocab.basis = EntropyBasis::kTopK;
  } else {
    throw ValidationError("reference: unknown basis '" + basis + "'");
  }
  vocab.size = ParseInt(Expect(in, "size"));
  const std::string policy = Expect(in, "policy");
  if (policy == "renormalize") {
    vocab.policy = TopkPolicy::kRenormalize;
  } else if (policy == "raw") {
    vocab.policy = TopkPolicy::kRaw;
  } else {
    throw ValidationError("reference: unknown policy '" + policy + "'");
  }
  Validate(vocab);
  const auto seq_count = ParseInt(Expect(in, "L"));
  const auto n = ParseInt(Expect(in, "N"));
  const auto n_lengths = ParseInt(Expect(in, "lengths"));
  if (n < 1 || seq_count < 1 || n_lengths < 0) {
    throw ValidationError("reference: counts must be positive");
  }
  std::vector<std::int64_t> lengths;
  lengths.reserve(static_cast<std::size_t>(n_lengths));
  std::string tok;
  for (std::int64_t i = 0; i < n_lengths; ++i) {
    if (!(in >> tok)) throw ValidationError("reference: truncated lengths");
    lengths.push_back(ParseInt(tok));
  }
  if (!(in >> tok) || tok != "samples") {
    throw ValidationError("reference: expected 'samples'");
  }
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    if (!(in >> tok)) throw ValidationError("reference: truncated samples");
    const double s = ParseDouble(tok);
    if (!samples.empty() && s < samples.back()) {
      throw ValidationError("reference: unsorted samples at index " +
                            std::to_string(i));
    }
    samples.push_back(s);
  }
  if (in >> tok) throw ValidationError("reference: trailing data");
  return ReferenceCdf(std::move(samples), std::move(lengths), seq_count, mode,
                      vocab);
}

void SaveReference(const ReferenceCdf& cdf,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write reference file " + path.string());
  WriteReference(cdf, out);
  if (!out) throw UsageError("failed writing " + path.string());
}

ReferenceCdf LoadReference(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open reference file " + path.string());
  return ReadReference(in);
}

std::string Fingerprint(const ReferenceCdf& cdf) {
  std::ostringstream os;
  WriteReference(cdf, os);
  return FingerprintBytes(os.str());
}

std::string FingerprintBytes(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ces
