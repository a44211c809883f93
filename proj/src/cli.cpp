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

#include "ces/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ces/calibration.hpp"
#include "ces/error.hpp"
#include "ces/evaluation.hpp"
#include "ces/inference.hpp"
#include "ces/parallel.hpp"
#include "ces/record_store.hpp"
#include "ces/rng.hpp"
#include "ces/scoring.hpp"
#include "ces/synthlab.hpp"

namespace ces::cli {

using nlohmann::json;

namespace {

constexpr int kOutputFormat = 1;
constexpr const char* kDefaultBins = "1-5,6-15,16-";

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << content;
  if (!out) throw UsageError("failed writing " + path);
}

json Header(const std::string& command, json config) {
  return {{"ces_header",
           {{"format", kOutputFormat},
            {"command", command},
            {"config", std::move(config)}}}};
}

json Nullable(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// ---------------------------------------------------------- score files

struct ScoreRow {
  std::string id;
  std::optional<int> label;
  std::int64_t length = 0;
  std::map<std::string, std::optional<double>> scores;
};

struct ScoreFile {
  json header;
  std::vector<std::string> methods;
  std::vector<ScoreRow> rows;
  std::string fingerprint;
};

ScoreFile ReadScores(const std::string& path) {
  const std::string text = ReadFile(path);
  ScoreFile sf;
  sf.fingerprint = FingerprintBytes(text);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + " line " + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw ValidationError(where + "malformed JSON");
    }
    if (sf.header.is_null()) {
      if (!j.contains("ces_header") ||
          j["ces_header"].value("command", "") != "score") {
        throw ValidationError(where + "not a score file");
      }
      sf.header = j["ces_header"];
      for (const auto& m : sf.header.at("config").at("methods")) {
        sf.methods.push_back(m.get<std::string>());
      }
      continue;
    }
    try {
      ScoreRow row;
      row.id = j.at("record_id").get<std::string>();
      if (!j.at("label").is_null()) row.label = j.at("label").get<int>();
      row.length = j.at("gen_length").get<std::int64_t>();
      for (const auto& m : sf.methods) {
        const auto& v = j.at(m);
        row.scores[m] =
            v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      }
      sf.rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  if (sf.header.is_null()) throw ValidationError(path + ": empty score file");
  return sf;
}

struct Labelled {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::int64_t> lengths;
  std::int64_t skipped = 0;
};

Labelled Collect(const ScoreFile& sf, const std::string& method) {
  if (std::find(sf.methods.begin(), sf.methods.end(), method) ==
      sf.methods.end()) {
    throw UsageError("method '" + method + "' not in score file");
  }
  Labelled out;
  for (const auto& r : sf.rows) {
    const auto& s = r.scores.at(method);
    if (!s || !r.label) {
      ++out.skipped;
      continue;
    }
    out.scores.push_back(*s);
    out.labels.push_back(*r.label);
    out.lengths.push_back(r.length);
  }
  const auto pos = std::count(out.labels.begin(), out.labels.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(out.labels.size())) {
    throw PreconditionError("single-class labels for method '" + method + "'");
  }
  return out;
}

// ------------------------------------------------------------ commands

struct Globals {
  std::uint64_t seed = 42;
  bool seed_given = false;
  std::optional<int> parallel;

  int Workers() const { return parallel ? *parallel : DefaultParallelism(); }
};

struct CalibrateOpts {
  std::string input, mode = "supervised", basis, out;
  double epsilon = 0.05, delta = 0.05;
  std::optional<double> gamma;
};

void RunCalibrate(const CalibrateOpts& o, std::ostream& out) {
  const auto vocab = VocabInfo::Parse(o.basis);
  CalibrationParams params;
  params.epsilon = o.epsilon;
  params.delta = o.delta;
  params.mode = ParseMode(o.mode);
  params.gamma = o.gamma;
  params.Validate();
  const std::string text = ReadFile(o.input);
  std::istringstream in(text);
  const auto records = ReadRecords(in, vocab);
  const auto ref = Calibrate(records, params, vocab);
  SaveReference(ref, o.out);

  const auto dkw = DkwTailBound(ref.sequence_count(), o.epsilon, ref.lengths());
  json config = {{"records_fingerprint", FingerprintBytes(text)},
                 {"mode", ModeName(params.mode)},
                 {"basis", vocab.ToString()},
                 {"epsilon", o.epsilon},
                 {"delta", o.delta}};
  if (o.gamma) config["gamma"] = *o.gamma;
  json report = Header("calibrate", config);
  const auto required = RequiredSamples(o.epsilon, o.delta);
  report["reference"] = {{"fingerprint", Fingerprint(ref)},
                         {"N", ref.pooled_count()},
                         {"L", ref.sequence_count()},
                         {"mode", ModeName(ref.mode())},
                         {"basis", ref.vocab().ToString()}};
  report["dkw"] = {{"worst_case", dkw.worst_case},
                   {"conditional", Nullable(dkw.conditional)},
                   {"length_averaged", Nullable(dkw.length_averaged)},
                   {"radius", DkwRadius(ref.sequence_count(), o.delta)}};
  report["required_samples"] = required;
  report["sufficient"] = ref.sequence_count() >= required;
  if (o.gamma) {
    report["contamination_budget"] = ContaminationBudget(o.epsilon, *o.gamma);
  }
  out << report.dump() << '\n';
}

struct ScoreOpts {
  std::string ref, input, methods = "ces", out, threshold;
  std::optional<std::string> basis;
};

void RunScore(const ScoreOpts& o, const Globals& g, std::ostream& out) {
  const auto ref = LoadReference(o.ref);
  const auto vocab = o.basis ? VocabInfo::Parse(*o.basis) : ref.vocab();
  RequireCompatible(ref.vocab(), vocab);
  const auto methods = ParseMethods(o.methods);
  std::vector<std::string> names;
  for (const auto& m : methods) names.push_back(m.Name());

  std::optional<std::pair<std::string, double>> rule;
  if (!o.threshold.empty()) {
    json t;
    try {
      t = json::parse(ReadFile(o.threshold));
      rule.emplace(t.at("method").get<std::string>(),
                   t.at("threshold").get<double>());
    } catch (const json::exception&) {
      throw ValidationError(o.threshold + ": not a threshold file");
    }
    if (std::find(names.begin(), names.end(), rule->first) == names.end()) {
      throw PreconditionError("threshold method '" + rule->first +
                              "' is not among the scored methods");
    }
  }

  const std::string text = ReadFile(o.input);
  std::istringstream in(text);
  const auto records = ReadRecords(in, vocab);
  auto reports = ScoreRecords(records, ref, methods, g.Workers());

  json config = {{"ref_fingerprint", Fingerprint(ref)},
                 {"records_fingerprint", FingerprintBytes(text)},
                 {"basis", vocab.ToString()},
                 {"methods", names}};
  if (rule) {
    config["threshold"] = {{"method", rule->first}, {"value", rule->second}};
  }
  std::ostringstream os;
  os << Header("score", config).dump() << '\n';
  for (auto& r : reports) {
    json row = {{"record_id", r.record_id},
                {"label", r.label ? json(*r.label) : json(nullptr)},
                {"gen_length", r.gen_length}};
    for (const auto& [name, value] : r.scores) row[name] = Nullable(value);
    if (rule) {
      const auto s = r.Get(rule->first);
      row["decision"] = s ? json(Decide(*s, rule->second)) : json(nullptr);
    }
    os << row.dump() << '\n';
  }
  WriteFile(o.out, os.str());
  out << "scored " << reports.size() << " records with " << names.size()
      << " method(s); reference " << Fingerprint(ref) << '\n';
}

struct ThresholdOpts {
  std::string scores, policy = "youden", out, method, ref;
  std::optional<double> mu, zeta;
};

void RunThreshold(const ThresholdOpts& o, std::ostream& out) {
  const auto sf = ReadScores(o.scores);
  const std::string method = o.method.empty() ? sf.methods.front() : o.method;
  const auto data = Collect(sf, method);
  json config = {{"scores_fingerprint", sf.fingerprint}, {"method", method}};
  TestParams tp;
  if (o.mu || o.zeta) {
    if (!o.mu || !o.zeta || o.ref.empty()) {
      throw UsageError("--mu and --zeta need each other and --ref");
    }
    const auto ref = LoadReference(o.ref);
    tp = TestParams::FromTunables(
        *o.mu, *o.zeta, [&ref](double x) { return ref.Evaluate(x); });
    double tp_n = 0, fp_n = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < data.scores.size(); ++i) {
      const int d = Decide(data.scores[i], tp.threshold);
      if (data.labels[i] == 1) {
        ++pos;
        tp_n += d;
      } else {
        ++neg;
        fp_n += d;
      }
    }
    tp.tpr = tp_n / pos;
    tp.fpr = fp_n / neg;
    config["policy"] = "tunables";
    config["ref_fingerprint"] = Fingerprint(ref);
    config["mu"] = *o.mu;
    config["zeta"] = *o.zeta;
  } else if (o.policy == "youden") {
    tp = SelectThreshold(data.scores, data.labels, ThresholdPolicy::kYouden);
    config["policy"] = "youden";
  } else if (o.policy.rfind("fpr:", 0) == 0) {
    double alpha = 0.0;
    try {
      std::size_t used = 0;
      alpha = std::stod(o.policy.substr(4), &used);
      if (used != o.policy.size() - 4) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("bad policy '" + o.policy + "'");
    }
    tp = SelectThreshold(data.scores, data.labels,
                         ThresholdPolicy::kMaxTprAtFpr, alpha);
    config["policy"] = "fpr";
    config["alpha"] = alpha;
  } else {
    throw UsageError("unknown policy '" + o.policy +
                     "' (expected youden or fpr:<alpha>)");
  }
  json result = Header("threshold", config);
  result["method"] = method;
  result["threshold"] = tp.threshold;
  result["tpr"] = Nullable(tp.tpr);
  result["fpr"] = Nullable(tp.fpr);
  result["n"] = data.scores.size();
  result["skipped"] = data.skipped;
  WriteFile(o.out, result.dump() + "\n");
  out << "threshold " << method << " " << FormatDouble(tp.threshold) << '\n';
}

struct EvalOpts {
  std::string scores, method, out, input, basis, rank_matrix;
  int bootstrap = 1000;
  int permutations = 0;
  bool stratify = false, shape = false, autocorr = false;
  std::string bins = kDefaultBins;
};

std::vector<std::vector<double>> ReadMatrix(const std::string& text,
                                            std::vector<std::string>& names) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<std::string> cells;
    for (std::string c; ls >> c;) cells.push_back(c);
    if (cells.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (!first) throw ValidationError("rank matrix: non-numeric row");
      names = cells;
    } else {
      rows.push_back(std::move(row));
    }
    first = false;
  }
  return rows;
}

void RunEval(const EvalOpts& o, const Globals& g, std::ostream& out) {
  if (o.scores.empty() && o.rank_matrix.empty()) {
    throw UsageError("eval needs --scores or --rank-matrix");
  }
  if ((o.shape || o.autocorr) && (o.input.empty() || o.basis.empty())) {
    throw UsageError("--shape-test and --autocorr need --input and --basis");
  }
  if (o.bootstrap < 1) throw UsageError("--bootstrap must be >= 1");
  json config = {{"bootstrap", o.bootstrap}, {"seed", g.seed}};
  json report;
  std::optional<ScoreFile> sf;
  if (!o.scores.empty()) {
    sf = ReadScores(o.scores);
    config["scores_fingerprint"] = sf->fingerprint;
  }
  std::vector<std::string> methods;
  if (sf) methods = o.method.empty() ? sf->methods
                                     : std::vector<std::string>{o.method};
  config["methods"] = methods;
  if (o.stratify) config["length_bins"] = o.bins;

  json per_method = json::array();
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto data = Collect(*sf, methods[i]);
    const auto boot = BootstrapAuroc(data.scores, data.labels, o.bootstrap,
                                     DeriveSeed(g.seed, i), g.Workers());
    json entry = {
        {"method", methods[i]},
        {"direction", "higher"},
        {"n", data.scores.size()},
        {"positives", std::count(data.labels.begin(), data.labels.end(), 1)},
        {"skipped", data.skipped},
        {"auroc", boot.point},
        {"ci_lo", boot.lo},
        {"ci_hi", boot.hi},
        {"std", boot.std},
        {"redraws", boot.redraws}};
    if (o.stratify) {
      const auto bins = ParseLengthBins(o.bins);
      json table = json::array();
      for (const auto& b : StratifiedAuroc(data.scores, data.labels,
                                           data.lengths, bins)) {
        table.push_back({{"lo", b.bin.lo},
                         {"hi", b.bin.hi},
                         {"n", b.n},
                         {"positives", b.positives},
                         {"auroc", Nullable(b.auroc)}});
      }
      entry["stratified"] = table;
    }
    per_method.push_back(entry);
  }
  if (sf) report["methods"] = per_method;

  if (o.shape || o.autocorr) {
    const std::string text = ReadFile(o.input);
    config["records_fingerprint"] = FingerprintBytes(text);
    config["basis"] = o.basis;
    std::istringstream in(text);
    const auto records = ReadRecords(in, VocabInfo::Parse(o.basis));
    if (o.shape) {
      config["permutations"] = o.permutations;
      std::vector<std::vector<double>> a, b;
      std::vector<double> pooled_a, pooled_b;
      for (const auto& r : records) {
        if (!r.label) continue;
        auto& seqs = *r.label == 0 ? a : b;
        auto& pool = *r.label == 0 ? pooled_a : pooled_b;
        seqs.push_back(r.entropies);
        pool.insert(pool.end(), r.entropies.begin(), r.entropies.end());
      }
      if (a.empty() || b.empty()) {
        throw PreconditionError("shape test needs labelled records of both classes");
      }
      const auto raw = KsTwoSample(pooled_a, pooled_b);
      const auto centred = MeanCentredShapeTest(a, b);
      json shape = {
          {"raw", {{"D", raw.statistic}, {"p_value", Nullable(raw.p_value)},
                   {"n1", raw.n1}, {"n2", raw.n2}}},
          {"centred",
           {{"D", centred.ks.statistic},
            {"p_value", Nullable(centred.ks.p_value)},
            {"n1", centred.ks.n1},
            {"n2", centred.ks.n2},
            {"excluded_faithful", centred.excluded_a},
            {"excluded_hallucinated", centred.excluded_b}}}};
      if (pooled_a.size() >= 2 && pooled_b.size() >= 2) {
        shape["cohens_d"] = CohensD(pooled_a, pooled_b);
      }
      if (o.permutations > 0) {
        shape["raw"]["permutation_p_value"] = KsPermutationPValue(
            pooled_a, pooled_b, o.permutations, DeriveSeed(g.seed, 1u << 20));
      }
      report["shape_test"] = shape;
    }
    if (o.autocorr) {
      std::vector<double> rhos;
      std::int64_t white = 0, skipped = 0;
      for (const auto& r : records) {
        const auto& e = r.entropies;
        const bool constant =
            std::all_of(e.begin(), e.end(), [&](double v) { return v == e[0]; });
        if (e.size() < 3 || constant) {
          ++skipped;
          continue;
        }
        const auto d = AutocorrDiagnostics(e);
        rhos.push_back(d.rho1);
        white += d.white_noise ? 1 : 0;
      }
      json ac = {{"sequences", rhos.size()}, {"skipped", skipped}};
      if (!rhos.empty()) {
        std::sort(rhos.begin(), rhos.end());
        double mean = 0.0;
        for (double r : rhos) mean += r;
        mean /= static_cast<double>(rhos.size());
        const double med = SortedQuantile(rhos, 0.5);
        ac["median_rho1"] = med;
        ac["mean_rho1"] = mean;
        ac["neff_ratio_at_median"] = NeffRatio(med);
        ac["white_noise_fraction"] =
            static_cast<double>(white) / static_cast<double>(rhos.size());
      }
      report["autocorrelation"] = ac;
    }
  }

  if (!o.rank_matrix.empty()) {
    const std::string text = ReadFile(o.rank_matrix);
    config["rank_matrix_fingerprint"] = FingerprintBytes(text);
    std::vector<std::string> names;
    const auto matrix = ReadMatrix(text, names);
    const auto ra = FriedmanNemenyi(matrix);
    if (!names.empty() && names.size() != ra.avg_ranks.size()) {
      throw ValidationError("rank matrix: header width differs from rows");
    }
    json ranks = json::array();
    for (std::size_t k = 0; k < ra.avg_ranks.size(); ++k) {
      ranks.push_back({{"method", names.empty() ? std::to_string(k) : names[k]},
                       {"avg_rank", ra.avg_ranks[k]}});
    }
    report["rank_analysis"] = {{"experiments", matrix.size()},
                               {"avg_ranks", ranks},
                               {"chi2_f", ra.chi2_f},
                               {"chi2_p", ra.chi2_p},
                               {"iman_davenport_f", ra.iman_davenport_f},
                               {"iman_davenport_p", ra.iman_davenport_p},
                               {"q_alpha", ra.q_alpha},
                               {"critical_difference", ra.critical_difference}};
  }

  json doc = Header("eval", config);
  doc.update(report);
  const std::string body = doc.dump(2) + "\n";
  if (o.out.empty()) {
    out << body;
  } else {
    WriteFile(o.out, body);
    for (const auto& m : per_method) {
      out << m["method"].get<std::string>() << " auroc "
          << Fmt("%.4f", m["auroc"].get<double>()) << " ["
          << Fmt("%.4f", m["ci_lo"].get<double>()) << ", "
          << Fmt("%.4f", m["ci_hi"].get<double>()) << "]\n";
    }
  }
}

struct SynthOpts {
  std::string experiment, config, out;
  std::int64_t m = 0;
};

void RunSynth(const SynthOpts& o, const Globals& g, std::ostream& out) {
  json cj;
  try {
    cj = json::parse(ReadFile(o.config));
  } catch (const json::exception&) {
    throw ValidationError(o.config + ": malformed JSON");
  }
  auto cfg = synth::SynthConfig::FromJson(cj);
  if (g.seed_given) cfg.seed = g.seed;
  cfg.workers = g.Workers();

  std::vector<json> lines;
  std::vector<std::string> human;
  json head = Header("synth", cfg.ToJson());
  head["ces_header"]["experiment"] = o.experiment;
  lines.push_back(head);
  auto add = [&](const char* table, json row) {
    row["table"] = table;
    lines.push_back(std::move(row));
  };
  bool pass = true;
  json summary;

  if (o.experiment == "dkw") {
    for (const auto& r : synth::VerifyDkw(cfg)) {
      add("dkw", synth::ToJson(r));
      pass = pass && r.pass_worst_case && r.pass_length_averaged;
      human.push_back("dkw L=" + std::to_string(r.sequences) + " eps=" +
                      Fmt("%g", r.epsilon) + ": " +
                      std::to_string(r.violations) + "/" +
                      std::to_string(r.trials) + " violations, bound " +
                      Fmt("%.4g", r.worst_case_bound) + " (length-averaged " +
                      Fmt("%.3g", r.length_averaged_bound) + ")");
    }
  } else if (o.experiment == "decay") {
    const auto d = synth::VerifyErrorDecay(
        cfg, o.m > 0 ? std::optional<std::int64_t>(o.m) : std::nullopt);
    for (const auto& r : d.rows) {
      add("decay", synth::ToJson(r));
      human.push_back("decay m=" + std::to_string(r.m) + ": type I " +
                      Fmt("%.4g", r.type1) + ", type II " +
                      Fmt("%.4g", r.type2));
    }
    for (const auto& r : d.bounds) {
      add("bounds", synth::ToJson(r));
      pass = pass && r.pass_fpr && r.pass_tpr;
    }
    summary = {{"threshold", d.threshold}, {"mu0", d.mu0}, {"mu1", d.mu1},
               {"zeta0", d.zeta0}, {"zeta1", d.zeta1},
               {"slope_type1", d.slope_type1}, {"slope_type2", d.slope_type2}};
    human.push_back("decay slopes: type I " + Fmt("%.3g", d.slope_type1) +
                    ", type II " + Fmt("%.3g", d.slope_type2) + " per token");
  } else if (o.experiment == "contamination") {
    const auto c = synth::VerifyContamination(cfg);
    summary = {{"ks_f0_f1", c.ks_f0_f1}};
    for (const auto& r : c.rows) {
      add("contamination", synth::ToJson(r));
      pass = pass && r.pass();
      human.push_back("contamination gamma=" + Fmt("%g", r.gamma) +
                      ": auroc " + Fmt("%.4f", r.mean_auroc) + ", max d_KS " +
                      Fmt("%.4f", r.max_ks) + " <= budget " +
                      Fmt("%.4f", r.budget));
    }
  } else if (o.experiment == "noisy-judge") {
    for (const auto& r : synth::VerifyNoisyJudge(cfg)) {
      add("noisy_judge", synth::ToJson(r));
      human.push_back("noisy-judge p=" + Fmt("%g", r.flip_prob) +
                      ": supervised " + Fmt("%.4f", r.median_supervised) +
                      ", unsupervised " + Fmt("%.4f", r.unsupervised) +
                      ", gap " + Fmt("%+.4f", r.gap));
    }
  } else if (o.experiment == "ks-power") {
    const auto k = synth::KsPowerCurve(cfg);
    for (const auto& r : k.rows) {
      add("ks_power", synth::ToJson(r));
      human.push_back("ks-power n=" + std::to_string(r.n) + ": rejection " +
                      Fmt("%.3f", r.rejection_rate));
    }
    pass = k.monotone;
  } else if (o.experiment == "level") {
    const auto l = synth::VerifyLevel(cfg, o.m > 0 ? o.m : cfg.reference_m);
    summary = {{"alpha", l.alpha}, {"threshold", l.threshold},
               {"trials", l.trials}, {"fpr", l.fpr}};
    pass = l.pass;
    human.push_back("level alpha=" + Fmt("%g", l.alpha) + ": fpr " +
                    Fmt("%.4f", l.fpr));
  } else {
    throw UsageError("unknown experiment '" + o.experiment + "'");
  }
  summary["pass"] = pass;
  lines.push_back({{"summary", summary}});

  std::string body;
  for (const auto& l : lines) body += l.dump() + "\n";
  if (o.out.empty()) {
    out << body;
  } else {
    WriteFile(o.out, body);
    for (const auto& h : human) out << h << '\n';
    out << o.experiment << ": " << (pass ? "pass" : "FAIL") << '\n';
  }
}

void ReportError(std::ostream& err, ErrorKind kind, const std::string& msg) {
  err << json{{"error",
               {{"code", static_cast<int>(kind)},
                {"kind", ErrorKindName(kind)},
                {"message", msg}}}}
             .dump()
      << '\n';
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Calibrated entropy scoring for hallucination detection", "ces"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "root seed for all randomness")
      ->capture_default_str();
  app.add_option("--parallel", g.parallel,
                 "worker threads (overrides CES_PARALLEL)")
      ->check(CLI::Range(1, 1024));

  CalibrateOpts co;
  auto* cal = app.add_subcommand("calibrate", "build a reference ECDF");
  cal->add_option("--input", co.input, "record file")->required();
  cal->add_option("--mode", co.mode, "supervised|unsupervised")
      ->capture_default_str();
  cal->add_option("--basis", co.basis, "full:<d> or topk:<k>[:raw]")
      ->required();
  cal->add_option("--out", co.out, "reference file to write")->required();
  cal->add_option("--epsilon", co.epsilon)->capture_default_str();
  cal->add_option("--delta", co.delta)->capture_default_str();
  cal->add_option("--gamma", co.gamma, "assumed contamination fraction");

  ScoreOpts so;
  auto* sc = app.add_subcommand("score", "score records against a reference");
  sc->add_option("--ref", so.ref)->required();
  sc->add_option("--input", so.input)->required();
  sc->add_option("--methods", so.methods,
                 "ces,lne,ppl,len,ks1,combo:<stat>,<stat>,<agg>")
      ->capture_default_str();
  sc->add_option("--basis", so.basis, "input basis (default: the reference's)");
  sc->add_option("--threshold", so.threshold, "threshold file for decisions");
  sc->add_option("--out", so.out)->required();

  ThresholdOpts to;
  auto* th = app.add_subcommand("threshold", "pick a decision threshold");
  th->add_option("--scores", to.scores)->required();
  th->add_option("--policy", to.policy, "youden or fpr:<alpha>")
      ->capture_default_str();
  th->add_option("--method", to.method, "default: first method in the file");
  th->add_option("--mu", to.mu);
  th->add_option("--zeta", to.zeta);
  th->add_option("--ref", to.ref, "reference for --mu/--zeta");
  th->add_option("--out", to.out)->required();

  EvalOpts eo;
  auto* ev = app.add_subcommand("eval", "evaluate detector scores");
  ev->add_option("--scores", eo.scores);
  ev->add_option("--method", eo.method, "default: every method in the file");
  ev->add_option("--bootstrap", eo.bootstrap)->capture_default_str();
  ev->add_flag("--stratify-lengths", eo.stratify);
  ev->add_option("--length-bins", eo.bins)->capture_default_str();
  ev->add_flag("--shape-test", eo.shape);
  ev->add_flag("--autocorr", eo.autocorr);
  ev->add_option("--permutations", eo.permutations,
                 "permutation p-value draws for the shape test");
  ev->add_option("--input", eo.input, "records for --shape-test/--autocorr");
  ev->add_option("--basis", eo.basis);
  ev->add_option("--rank-matrix", eo.rank_matrix,
                 "experiments x methods matrix, optional header row");
  ev->add_option("--out", eo.out, "report file (default: stdout)");

  SynthOpts yo;
  auto* sy = app.add_subcommand("synth", "synthetic verification lab");
  sy->add_option("experiment", yo.experiment,
                 "dkw|decay|contamination|noisy-judge|ks-power|level")
      ->required();
  sy->add_option("--config", yo.config)->required();
  sy->add_option("--m", yo.m, "reference length (decay, level)");
  sy->add_option("--out", yo.out, "result file (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    g.seed_given = app.get_option("--seed")->count() > 0;
    if (*cal) RunCalibrate(co, out);
    if (*sc) RunScore(so, g, out);
    if (*th) RunThreshold(to, out);
    if (*ev) RunEval(eo, g, out);
    if (*sy) RunSynth(yo, g, out);
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as ParseError with exit code 0.
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    ReportError(err, ErrorKind::kUsage, e.what());
    return static_cast<int>(ErrorKind::kUsage);
  } catch (const Error& e) {
    ReportError(err, e.kind(), e.what());
    return static_cast<int>(e.kind());
  } catch (const nlohmann::json::exception& e) {
    ReportError(err, ErrorKind::kValidation, e.what());
    return static_cast<int>(ErrorKind::kValidation);
  } catch (const std::exception& e) {
    ReportError(err, ErrorKind::kValidation, e.what());
    return static_cast<int>(ErrorKind::kValidation);
  }
}

}  // namespace ces::cli
