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

#include "ces/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "ces/calibration.hpp"
#include "ces/entropy.hpp"
#include "ces/error.hpp"
#include "ces/evaluation.hpp"
#include "ces/inference.hpp"
#include "ces/parallel.hpp"
#include "ces/scoring.hpp"

namespace ces::synth {

using nlohmann::json;

namespace {

// Stream tags keep experiments from sharing random numbers.
enum Tag : std::uint64_t {
  kDkw = 1,
  kDecayPool,
  kDecayFit,
  kDecayProtocol,
  kDecayBound,
  kContamTest,
  kContamTrial,
  kJudgeData,
  kJudgeFlip,
  kKsPower,
  kLevel,
};

std::uint64_t Root(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0,
                   std::uint64_t b = 0) {
  return DeriveSeed(DeriveSeed(DeriveSeed(seed, tag), a), b);
}

class TruncNormal final : public Distribution {
 public:
  TruncNormal(double loc, double scale, double lo, double hi)
      : loc_(loc), scale_(scale), lo_(lo), hi_(hi), std_(0.0, 1.0) {
    if (!(scale > 0.0) || !(lo < hi)) {
      throw ValidationError("truncnorm needs scale > 0 and lo < hi");
    }
    pa_ = boost::math::cdf(std_, (lo - loc) / scale);
    pb_ = boost::math::cdf(std_, (hi - loc) / scale);
    if (!(pb_ - pa_ > 1e-12)) {
      throw ValidationError("truncnorm support carries no mass");
    }
  }
  double Sample(Rng& rng) const override {
    return Quantile(rng.OpenUniform());
  }
  double Cdf(double x) const override {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    const double p = boost::math::cdf(std_, (x - loc_) / scale_);
    return std::clamp((p - pa_) / (pb_ - pa_), 0.0, 1.0);
  }
  double Quantile(double p) const override {
    if (p <= 0.0) return lo_;
    if (p >= 1.0) return hi_;
    const double u = pa_ + p * (pb_ - pa_);
    const double x = loc_ + scale_ * boost::math::quantile(std_, u);
    return std::clamp(x, lo_, hi_);
  }
  double Mean() const override {
    const double a = (lo_ - loc_) / scale_;
    const double b = (hi_ - loc_) / scale_;
    return loc_ + scale_ *
                      (boost::math::pdf(std_, a) - boost::math::pdf(std_, b)) /
                      (pb_ - pa_);
  }
  double RightEndpoint() const override { return hi_; }
  double LeftEndpoint() const override { return lo_; }
  json Spec() const override {
    return {{"family", "truncnorm"}, {"loc", loc_}, {"scale", scale_},
            {"lo", lo_}, {"hi", hi_}};
  }

 private:
  double loc_, scale_, lo_, hi_;
  boost::math::normal_distribution<double> std_;
  double pa_ = 0.0, pb_ = 1.0;
};

class ScaledBetaDist final : public Distribution {
 public:
  ScaledBetaDist(double a, double b, double lo, double hi)
      : a_(a), b_(b), lo_(lo), hi_(hi), beta_(CheckShape(a), CheckShape(b)) {
    if (!(lo < hi)) throw ValidationError("beta needs lo < hi");
  }
  double Sample(Rng& rng) const override {
    return Quantile(rng.OpenUniform());
  }
  double Cdf(double x) const override {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    return boost::math::cdf(beta_, (x - lo_) / (hi_ - lo_));
  }
  double Quantile(double p) const override {
    if (p <= 0.0) return lo_;
    if (p >= 1.0) return hi_;
    return lo_ + (hi_ - lo_) * boost::math::quantile(beta_, p);
  }
  double Mean() const override { return lo_ + (hi_ - lo_) * a_ / (a_ + b_); }
  double RightEndpoint() const override { return hi_; }
  double LeftEndpoint() const override { return lo_; }
  json Spec() const override {
    return {{"family", "beta"}, {"a", a_}, {"b", b_}, {"lo", lo_}, {"hi", hi_}};
  }

 private:
  static double CheckShape(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ValidationError("beta shape parameters must be positive");
    }
    return s;
  }
  double a_, b_, lo_, hi_;
  boost::math::beta_distribution<double> beta_;
};

class UniformDist final : public Distribution {
 public:
  UniformDist(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo < hi)) throw ValidationError("uniform needs lo < hi");
  }
  double Sample(Rng& rng) const override {
    return lo_ + (hi_ - lo_) * rng.Uniform();
  }
  double Cdf(double x) const override {
    return std::clamp((x - lo_) / (hi_ - lo_), 0.0, 1.0);
  }
  double Quantile(double p) const override {
    return lo_ + (hi_ - lo_) * std::clamp(p, 0.0, 1.0);
  }
  double Mean() const override { return 0.5 * (lo_ + hi_); }
  double RightEndpoint() const override { return hi_; }
  double LeftEndpoint() const override { return lo_; }
  json Spec() const override {
    return {{"family", "uniform"}, {"lo", lo_}, {"hi", hi_}};
  }

 private:
  double lo_, hi_;
};

class PoolDist final : public Distribution {
 public:
  PoolDist(std::vector<double> values, json spec)
      : values_(std::move(values)), spec_(std::move(spec)) {
    if (values_.empty()) throw ValidationError("empty entropy pool");
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("pool values must be finite and nonnegative");
      }
    }
    std::sort(values_.begin(), values_.end());
    double sum = 0.0;
    for (double v : values_) sum += v;
    mean_ = sum / static_cast<double>(values_.size());
    if (spec_.is_null()) spec_ = {{"family", "pool"}};
    spec_["size"] = values_.size();
  }
  double Sample(Rng& rng) const override {
    return values_[rng.Below(values_.size())];
  }
  double Cdf(double x) const override {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) /
           static_cast<double>(values_.size());
  }
  double Quantile(double p) const override {
    if (p <= 0.0) return values_.front();
    const double n = static_cast<double>(values_.size());
    auto j = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
    j = std::clamp<std::size_t>(j, 1, values_.size());
    return values_[j - 1];
  }
  double Mean() const override { return mean_; }
  double RightEndpoint() const override { return values_.back(); }
  double LeftEndpoint() const override { return values_.front(); }
  std::span<const double> Atoms() const override { return values_; }
  json Spec() const override { return spec_; }

 private:
  std::vector<double> values_;
  json spec_;
  double mean_ = 0.0;
};

std::vector<double> ReadPoolFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open pool file '" + path + "'");
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ValidationError("pool file '" + path + "': bad value '" + token +
                            "'");
    }
  }
  return out;
}

struct SeqSummary {
  double mean = 0.0;
  double max = 0.0;
};

SeqSummary DrawSequence(const Distribution& f, Rng& rng, std::int64_t m) {
  double sum = 0.0;
  double max = -std::numeric_limits<double>::infinity();
  for (std::int64_t t = 0; t < m; ++t) {
    const double h = f.Sample(rng);
    sum += h;
    max = std::max(max, h);
  }
  return {sum / static_cast<double>(m), max};
}

double CesAgainst(const SeqSummary& s, const ReferenceCdf& ref) {
  return std::sqrt(ref.Evaluate(s.mean) * ref.Evaluate(s.max));
}

double CesAgainst(const SeqSummary& s, const Distribution& f) {
  return std::sqrt(f.Cdf(s.mean) * f.Cdf(s.max));
}

// Synthetic entropies live on [0, log_d] with a real-valued log_d, so the
// reference carries a placeholder basis.
VocabInfo LabVocab() { return VocabInfo::Full(2); }

double Slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

// log of a continuity-corrected rate, finite even at zero counts.
double LogRate(std::int64_t k, std::int64_t n) {
  return std::log((static_cast<double>(k) + 0.5) /
                  (static_cast<double>(n) + 1.0));
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return SortedQuantile(v, 0.5);
}

double SampleSd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

template <class T>
std::vector<T> GetList(const json& j, const char* key) {
  if (!j.is_array()) {
    throw ValidationError(std::string("config '") + key + "' must be a list");
  }
  return j.get<std::vector<T>>();
}

}  // namespace

std::shared_ptr<const Distribution> TruncatedNormal(double loc, double scale,
                                                    double lo, double hi) {
  return std::make_shared<TruncNormal>(loc, scale, lo, hi);
}

std::shared_ptr<const Distribution> ScaledBeta(double a, double b, double lo,
                                               double hi) {
  return std::make_shared<ScaledBetaDist>(a, b, lo, hi);
}

std::shared_ptr<const Distribution> Uniform(double lo, double hi) {
  return std::make_shared<UniformDist>(lo, hi);
}

std::shared_ptr<const Distribution> Pool(std::vector<double> values,
                                         json spec) {
  return std::make_shared<PoolDist>(std::move(values), std::move(spec));
}

std::shared_ptr<const Distribution> DistributionFromJson(const json& spec,
                                                         double log_d) {
  if (!spec.is_object() || !spec.contains("family")) {
    throw ValidationError("distribution spec needs a 'family'");
  }
  try {
    const auto family = spec.at("family").get<std::string>();
    const double lo = spec.value("lo", 0.0);
    const double hi = spec.value("hi", log_d);
    if (family == "truncnorm") {
      return TruncatedNormal(spec.at("loc").get<double>(),
                             spec.at("scale").get<double>(), lo, hi);
    }
    if (family == "beta") {
      return ScaledBeta(spec.at("a").get<double>(), spec.at("b").get<double>(),
                        lo, hi);
    }
    if (family == "uniform") return Uniform(lo, hi);
    if (family == "pool") {
      if (spec.contains("values")) {
        return Pool(spec.at("values").get<std::vector<double>>(),
                    {{"family", "pool"}});
      }
      if (spec.contains("path")) {
        const auto path = spec.at("path").get<std::string>();
        return Pool(ReadPoolFile(path), {{"family", "pool"}, {"path", path}});
      }
      throw ValidationError("pool spec needs 'values' or 'path'");
    }
    throw ValidationError("unknown distribution family '" + family + "'");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("distribution spec: ") + e.what());
  }
}

double KsDistance(const Distribution& f, const Distribution& g, double lo,
                  double hi, int grid) {
  double sup = 0.0;
  auto probe = [&](double x) {
    sup = std::max(sup, std::abs(f.Cdf(x) - g.Cdf(x)));
    const double left = std::nextafter(x, -std::numeric_limits<double>::infinity());
    sup = std::max(sup, std::abs(f.Cdf(left) - g.Cdf(left)));
  };
  for (int i = 0; i <= grid; ++i) {
    probe(lo + (hi - lo) * static_cast<double>(i) / grid);
  }
  for (double x : f.Atoms()) probe(x);
  for (double x : g.Atoms()) probe(x);
  return sup;
}

double EcdfDeviation(const ReferenceCdf& ecdf, const Distribution& f) {
  if (!f.Atoms().empty()) return KsDistanceSorted(ecdf.samples(), f.Atoms());
  return SupDeviation(ecdf, [&f](double x) { return f.Cdf(x); });
}

double BinomialSe(double p, std::int64_t n) {
  if (n < 1) throw PreconditionError("binomial SE needs n >= 1");
  const double q = std::clamp(p, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(n));
}

// ------------------------------------------------------------- config

void SynthConfig::Validate() const {
  if (!f0 || !f1) throw ValidationError("config needs both f0 and f1");
  if (!(log_d > 0.0) || !std::isfinite(log_d)) {
    throw ValidationError("log_d must be positive");
  }
  for (const auto* f : {f0.get(), f1.get()}) {
    if (f->LeftEndpoint() < 0.0 || f->RightEndpoint() > log_d + 1e-9) {
      throw ValidationError("distribution support must lie within [0, log_d]");
    }
  }
  if (trials_per_cell < 1) throw ValidationError("trials_per_cell must be >= 1");
  for (auto m : lengths) {
    if (m < 1) throw ValidationError("lengths must be positive");
  }
  for (const auto& c : dkw_cells) {
    if (c.sequences < 1 || !(c.epsilon > 0.0)) {
      throw ValidationError("dkw cells need L >= 1 and epsilon > 0");
    }
  }
  if (length_min < 1 || length_max < length_min) {
    throw ValidationError("need 1 <= length_min <= length_max");
  }
  if (!(reference_fraction > 0.0 && reference_fraction < 1.0)) {
    throw ValidationError("reference_fraction must lie in (0, 1)");
  }
  if (pool_size < 2 || reference_m < 1) {
    throw ValidationError("pool_size >= 2 and reference_m >= 1 required");
  }
  for (double f : mu_fractions) {
    if (!(f > 0.0 && f < 1.0)) {
      throw ValidationError("mu_fractions must lie in (0, 1)");
    }
  }
  for (double g : gammas) {
    if (!(g >= 0.0 && g < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
  }
  if (calibration_tokens < 1 || test_size < 1 || test_m < 1) {
    throw ValidationError("calibration_tokens, test_size, test_m must be >= 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ValidationError("delta must lie in (0, 1)");
  }
  for (double p : flip_probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("flip probabilities must lie in [0, 1]");
    }
  }
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  if (!(hallucination_rate > 0.0 && hallucination_rate < 1.0)) {
    throw ValidationError("hallucination_rate must lie in (0, 1)");
  }
  if (calibration_records < 2) {
    throw ValidationError("calibration_records must be >= 2");
  }
  for (auto n : subsample_sizes) {
    if (n < 2) throw ValidationError("subsample sizes must be >= 2");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0, 1)");
  }
}

SynthConfig SynthConfig::FromJson(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be an object");
  static const std::set<std::string> kKeys = {
      "f0", "f1", "log_d", "lengths", "trials_per_cell", "seed",
      "dkw_cells", "length_min", "length_max", "pool_size",
      "reference_fraction", "reference_m", "mu_fractions", "gammas",
      "calibration_tokens", "delta", "test_size", "test_m", "flip_probs",
      "repeats", "hallucination_rate", "calibration_records",
      "subsample_sizes", "alpha"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  SynthConfig c;
  try {
    c.log_d = j.value("log_d", c.log_d);
    if (!j.contains("f0") || !j.contains("f1")) {
      throw ValidationError("config needs both f0 and f1");
    }
    c.f0 = DistributionFromJson(j.at("f0"), c.log_d);
    c.f1 = DistributionFromJson(j.at("f1"), c.log_d);
    if (j.contains("lengths")) {
      c.lengths = GetList<std::int64_t>(j.at("lengths"), "lengths");
    }
    c.trials_per_cell = j.value("trials_per_cell", c.trials_per_cell);
    c.seed = j.value("seed", c.seed);
    if (j.contains("dkw_cells")) {
      c.dkw_cells.clear();
      for (const auto& cell : j.at("dkw_cells")) {
        c.dkw_cells.push_back(
            {cell.at("L").get<std::int64_t>(), cell.at("epsilon").get<double>()});
      }
    }
    c.length_min = j.value("length_min", c.length_min);
    c.length_max = j.value("length_max", c.length_max);
    c.pool_size = j.value("pool_size", c.pool_size);
    c.reference_fraction = j.value("reference_fraction", c.reference_fraction);
    c.reference_m = j.value("reference_m", c.reference_m);
    if (j.contains("mu_fractions")) {
      c.mu_fractions = GetList<double>(j.at("mu_fractions"), "mu_fractions");
    }
    if (j.contains("gammas")) c.gammas = GetList<double>(j.at("gammas"), "gammas");
    c.calibration_tokens = j.value("calibration_tokens", c.calibration_tokens);
    c.delta = j.value("delta", c.delta);
    c.test_size = j.value("test_size", c.test_size);
    c.test_m = j.value("test_m", c.test_m);
    if (j.contains("flip_probs")) {
      c.flip_probs = GetList<double>(j.at("flip_probs"), "flip_probs");
    }
    c.repeats = j.value("repeats", c.repeats);
    c.hallucination_rate = j.value("hallucination_rate", c.hallucination_rate);
    c.calibration_records =
        j.value("calibration_records", c.calibration_records);
    if (j.contains("subsample_sizes")) {
      c.subsample_sizes =
          GetList<std::int64_t>(j.at("subsample_sizes"), "subsample_sizes");
    }
    c.alpha = j.value("alpha", c.alpha);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

json SynthConfig::ToJson() const {
  json cells = json::array();
  for (const auto& c : dkw_cells) {
    cells.push_back({{"L", c.sequences}, {"epsilon", c.epsilon}});
  }
  return {{"f0", f0 ? f0->Spec() : json()},
          {"f1", f1 ? f1->Spec() : json()},
          {"log_d", log_d},
          {"lengths", lengths},
          {"trials_per_cell", trials_per_cell},
          {"seed", seed},
          {"dkw_cells", cells},
          {"length_min", length_min},
          {"length_max", length_max},
          {"pool_size", pool_size},
          {"reference_fraction", reference_fraction},
          {"reference_m", reference_m},
          {"mu_fractions", mu_fractions},
          {"gammas", gammas},
          {"calibration_tokens", calibration_tokens},
          {"delta", delta},
          {"test_size", test_size},
          {"test_m", test_m},
          {"flip_probs", flip_probs},
          {"repeats", repeats},
          {"hallucination_rate", hallucination_rate},
          {"calibration_records", calibration_records},
          {"subsample_sizes", subsample_sizes},
          {"alpha", alpha}};
}

// ---------------------------------------------------------------- DKW

std::vector<DkwRow> VerifyDkw(const SynthConfig& config) {
  config.Validate();
  const auto& f0 = *config.f0;
  const auto span =
      static_cast<std::uint64_t>(config.length_max - config.length_min + 1);
  std::vector<DkwRow> rows;
  for (std::size_t cell = 0; cell < config.dkw_cells.size(); ++cell) {
    const auto [L, eps] = config.dkw_cells[cell];
    const auto root = Root(config.seed, kDkw, cell);
    const auto n = static_cast<std::size_t>(config.trials_per_cell);
    std::vector<double> dev(n);
    ParallelFor(n, config.workers, [&](std::size_t t) {
      Rng rng(root, t);
      std::vector<std::int64_t> lengths(static_cast<std::size_t>(L));
      std::vector<double> samples;
      for (auto& m : lengths) {
        m = config.length_min + static_cast<std::int64_t>(rng.Below(span));
        for (std::int64_t k = 0; k < m; ++k) samples.push_back(f0.Sample(rng));
      }
      const ReferenceCdf ecdf(std::move(samples), std::move(lengths), L,
                              CalibrationMode::kUnsupervised, LabVocab());
      dev[t] = EcdfDeviation(ecdf, f0);
    });

    DkwRow row;
    row.sequences = L;
    row.epsilon = eps;
    row.trials = config.trials_per_cell;
    for (double d : dev) {
      if (d >= eps) ++row.violations;
      row.max_deviation = std::max(row.max_deviation, d);
    }
    row.violation_rate =
        static_cast<double>(row.violations) / static_cast<double>(row.trials);
    row.worst_case_bound = DkwTailBound(L, eps).worst_case;
    // Exact expectation over the length law Uniform{length_min..length_max}.
    double avg = 0.0;
    for (auto m = config.length_min; m <= config.length_max; ++m) {
      avg += std::exp(-2.0 * static_cast<double>(m) * eps * eps);
    }
    avg /= static_cast<double>(span);
    row.length_averaged_bound =
        std::min(1.0, 2.0 * std::pow(avg, static_cast<double>(L)));
    auto pass = [&](double bound) {
      return row.violation_rate <=
             bound + 3.0 * BinomialSe(bound, row.trials);
    };
    row.pass_worst_case = pass(row.worst_case_bound);
    row.pass_length_averaged = pass(row.length_averaged_bound);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------- error decay

namespace {

void CheckSeparation(const Distribution& f0, const Distribution& f1) {
  if (f0.Mean() > f1.Mean()) {
    throw PreconditionError("inverted means: mu0 > mu1");
  }
  if (!(f0.LeftEndpoint() < f1.RightEndpoint() &&
        f1.LeftEndpoint() < f0.RightEndpoint())) {
    throw PreconditionError("f0 and f1 supports do not overlap");
  }
}

struct BoundSetup {
  DistributionSummary dist;
  TestParams fpr_params;
  TestParams tpr_params;
  double f1_at_zeta = 0.0;
};

BoundSetup MakeBoundSetup(const SynthConfig& config, double mu_fraction) {
  const auto& f0 = *config.f0;
  const auto& f1 = *config.f1;
  BoundSetup s;
  s.dist = {f0.Mean(), f1.Mean(), f0.RightEndpoint(), f1.RightEndpoint(),
            config.log_d};
  if (!(s.dist.mu0 < s.dist.mu1)) {
    throw PreconditionError("bound check needs mu0 < mu1");
  }
  const double mu = s.dist.mu0 + mu_fraction * (s.dist.mu1 - s.dist.mu0);
  auto cdf0 = [&f0](double x) { return f0.Cdf(x); };
  // Any zeta beyond zeta0 gives F0(zeta) = 1; the TPR side takes the median
  // of F1, which keeps F1(zeta) < 1 as the TPR bound requires.
  s.fpr_params = TestParams::FromTunables(mu, s.dist.zeta0 + 1.0, cdf0);
  const double zeta_tpr = f1.Quantile(0.5);
  s.tpr_params = TestParams::FromTunables(mu, zeta_tpr, cdf0);
  s.f1_at_zeta = f1.Cdf(zeta_tpr);
  return s;
}

}  // namespace

std::vector<SynthTrialResult> BoundTrials(const SynthConfig& config,
                                            std::int64_t m,
                                            double mu_fraction, int cls) {
  config.Validate();
  const auto setup = MakeBoundSetup(config, mu_fraction);
  const auto& f0 = *config.f0;
  const auto& src = cls == 0 ? *config.f0 : *config.f1;
  double bound = 0.0;
  double threshold = 0.0;
  if (cls == 0) {
    bound = FprBound(setup.fpr_params, setup.dist, m);
    threshold = setup.fpr_params.threshold;
  } else {
    bound = TprBounds(setup.tpr_params, setup.dist, m, setup.f1_at_zeta,
                      [&f0](double x) { return f0.Cdf(x); },
                      [&f0](double p) { return f0.Quantile(p); })
                .best();
    threshold = setup.tpr_params.threshold;
  }
  const auto root = Root(config.seed, kDecayBound,
                         static_cast<std::uint64_t>(m),
                         static_cast<std::uint64_t>(cls));
  const auto n = static_cast<std::size_t>(config.trials_per_cell);
  std::vector<SynthTrialResult> out(n);
  ParallelFor(n, config.workers, [&](std::size_t t) {
    Rng rng(root, t);
    const double ces = CesAgainst(DrawSequence(src, rng, m), f0);
    // The TPR bound counts CES >= c.
    const int rejected = cls == 0 ? Decide(ces, threshold)
                                  : (ces >= threshold ? 1 : 0);
    out[t] = {m, cls, ces, rejected, bound};
  });
  return out;
}

DecayResult VerifyErrorDecay(const SynthConfig& config,
                             std::optional<std::int64_t> reference_m) {
  config.Validate();
  const auto& f0 = *config.f0;
  const auto& f1 = *config.f1;
  CheckSeparation(f0, f1);
  const std::int64_t ref_m = reference_m.value_or(config.reference_m);
  if (ref_m < 1) throw PreconditionError("reference_m must be >= 1");

  DecayResult result;
  result.mu0 = f0.Mean();
  result.mu1 = f1.Mean();
  result.zeta0 = f0.RightEndpoint();
  result.zeta1 = f1.RightEndpoint();

  // Faithful pool; the first reference_fraction builds the ECDF. For a
  // supplied pool the remainder is the class-0 sampling source so reference
  // and test tokens stay disjoint.
  std::vector<double> pool;
  std::shared_ptr<const Distribution> class0 = config.f0;
  {
    Rng rng(Root(config.seed, kDecayPool));
    if (!f0.Atoms().empty()) {
      pool.assign(f0.Atoms().begin(), f0.Atoms().end());
      for (std::size_t i = pool.size(); i > 1; --i) {
        std::swap(pool[i - 1], pool[rng.Below(i)]);
      }
    } else {
      pool.resize(static_cast<std::size_t>(config.pool_size));
      for (auto& v : pool) v = f0.Sample(rng);
    }
  }
  const auto n_ref = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.reference_fraction *
                                               static_cast<double>(pool.size()))));
  if (n_ref >= pool.size() && !f0.Atoms().empty()) {
    throw PreconditionError("pool too small to hold out a reference split");
  }
  std::vector<double> ref_samples(pool.begin(), pool.begin() + n_ref);
  if (!f0.Atoms().empty()) {
    class0 = Pool(std::vector<double>(pool.begin() + n_ref, pool.end()));
  }
  const auto ref = ReferenceCdf::FromSamples(std::move(ref_samples), LabVocab());

  const auto n = static_cast<std::size_t>(config.trials_per_cell);
  auto score_class = [&](std::uint64_t tag, std::int64_t m, int cls) {
    const auto root = Root(config.seed, tag, static_cast<std::uint64_t>(m),
                           static_cast<std::uint64_t>(cls));
    const auto& src = cls == 0 ? *class0 : f1;
    std::vector<double> scores(n);
    ParallelFor(n, config.workers, [&](std::size_t t) {
      Rng rng(root, t);
      scores[t] = CesAgainst(DrawSequence(src, rng, m), ref);
    });
    return scores;
  };

  {
    auto s0 = score_class(kDecayFit, ref_m, 0);
    auto s1 = score_class(kDecayFit, ref_m, 1);
    std::vector<double> scores = s0;
    scores.insert(scores.end(), s1.begin(), s1.end());
    std::vector<int> labels(s0.size(), 0);
    labels.resize(scores.size(), 1);
    result.threshold =
        SelectThreshold(scores, labels, ThresholdPolicy::kYouden).threshold;
  }

  std::vector<double> xs, y1, y2;
  for (auto m : config.lengths) {
    const auto s0 = score_class(kDecayProtocol, m, 0);
    const auto s1 = score_class(kDecayProtocol, m, 1);
    std::int64_t fp = 0, fn = 0;
    for (double s : s0) fp += Decide(s, result.threshold);
    for (double s : s1) fn += 1 - Decide(s, result.threshold);
    const auto trials = static_cast<std::int64_t>(n);
    result.rows.push_back({m, trials,
                           static_cast<double>(fp) / static_cast<double>(n),
                           static_cast<double>(fn) / static_cast<double>(n)});
    xs.push_back(static_cast<double>(m));
    y1.push_back(LogRate(fp, trials));
    y2.push_back(LogRate(fn, trials));
  }
  if (xs.size() >= 2) {
    result.slope_type1 = Slope(xs, y1);
    result.slope_type2 = Slope(xs, y2);
  }

  // Bound rows need a strict mean gap; with mu0 = mu1 there is no valid mu.
  if (result.mu0 < result.mu1) {
    for (auto m : config.lengths) {
      for (double frac : config.mu_fractions) {
        const auto setup = MakeBoundSetup(config, frac);
        const auto t0 = BoundTrials(config, m, frac, 0);
        const auto t1 = BoundTrials(config, m, frac, 1);
        BoundRow row;
        row.m = m;
        row.mu = *setup.fpr_params.mu;
        row.zeta_fpr = *setup.fpr_params.zeta;
        row.zeta_tpr = *setup.tpr_params.zeta;
        row.fpr_threshold = setup.fpr_params.threshold;
        row.tpr_threshold = setup.tpr_params.threshold;
        std::int64_t fp = 0, tp = 0;
        for (const auto& t : t0) fp += t.rejected;
        for (const auto& t : t1) tp += t.rejected;
        const auto trials = static_cast<std::int64_t>(n);
        row.fpr = static_cast<double>(fp) / static_cast<double>(n);
        row.tpr = static_cast<double>(tp) / static_cast<double>(n);
        row.fpr_bound = t0.front().bound;
        row.tpr_bound = t1.front().bound;
        row.pass_fpr =
            row.fpr <= row.fpr_bound + 3.0 * BinomialSe(row.fpr_bound, trials);
        row.pass_tpr =
            row.tpr >= row.tpr_bound - 3.0 * BinomialSe(row.tpr_bound, trials);
        result.bounds.push_back(row);
      }
    }
  }
  return result;
}

// -------------------------------------------------------- contamination

ContaminationResult VerifyContamination(const SynthConfig& config) {
  config.Validate();
  const auto& f0 = *config.f0;
  const auto& f1 = *config.f1;
  ContaminationResult result;
  result.ks_f0_f1 = KsDistance(f0, f1, 0.0, config.log_d);

  // Fixed test set shared by every trial and gamma.
  const auto per_class = static_cast<std::size_t>(config.test_size);
  std::vector<SeqSummary> test(2 * per_class);
  std::vector<int> labels(2 * per_class);
  {
    const auto root = Root(config.seed, kContamTest);
    ParallelFor(test.size(), config.workers, [&](std::size_t i) {
      Rng rng(root, i);
      const int cls = i < per_class ? 0 : 1;
      test[i] = DrawSequence(cls == 0 ? f0 : f1, rng, config.test_m);
      labels[i] = cls;
    });
  }

  const auto N = config.calibration_tokens;
  const auto G = config.gammas.size();
  const auto trials = static_cast<std::size_t>(config.trials_per_cell);
  struct Cell {
    double ks = 0.0;
    double clean_dev = 0.0;
    double auroc = 0.0;
  };
  std::vector<std::vector<Cell>> cells(trials, std::vector<Cell>(G));
  const auto root = Root(config.seed, kContamTrial);
  ParallelFor(trials, config.workers, [&](std::size_t t) {
    Rng rng(root, t);
    // Common random numbers across gamma: one clean and one contaminating
    // stream, truncated per gamma.
    std::vector<double> clean(static_cast<std::size_t>(N));
    std::vector<double> dirty(static_cast<std::size_t>(N));
    for (auto& v : clean) v = f0.Sample(rng);
    for (auto& v : dirty) v = f1.Sample(rng);
    std::vector<double> scores(test.size());
    for (std::size_t g = 0; g < G; ++g) {
      const auto k = static_cast<std::size_t>(
          std::llround(config.gammas[g] * static_cast<double>(N)));
      std::vector<double> kept(clean.begin(), clean.end() - k);
      const auto clean_ref = ReferenceCdf::FromSamples(kept, LabVocab());
      kept.insert(kept.end(), dirty.begin(), dirty.begin() + k);
      const auto ref = ReferenceCdf::FromSamples(std::move(kept), LabVocab());
      for (std::size_t i = 0; i < test.size(); ++i) {
        scores[i] = CesAgainst(test[i], ref);
      }
      cells[t][g] = {EcdfDeviation(ref, f0), EcdfDeviation(clean_ref, f0),
                     Auroc(scores, labels)};
    }
  });

  for (std::size_t g = 0; g < G; ++g) {
    ContaminationRow row;
    row.gamma = config.gammas[g];
    row.trials = config.trials_per_cell;
    const auto k = std::llround(row.gamma * static_cast<double>(N));
    row.epsilon = DkwRadius(std::max<std::int64_t>(1, N - k), config.delta);
    row.budget = ContaminationBudget(row.epsilon, row.gamma);
    double ks_sum = 0.0, auroc_sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& c = cells[t][g];
      row.max_ks = std::max(row.max_ks, c.ks);
      ks_sum += c.ks;
      auroc_sum += c.auroc;
      if (c.ks <= row.budget) ++row.within_budget;
      if (c.clean_dev <= row.epsilon) {
        ++row.clean_event;
        if (c.ks > row.budget) ++row.violations;
      }
    }
    row.mean_ks = ks_sum / static_cast<double>(trials);
    row.mean_auroc = auroc_sum / static_cast<double>(trials);
    result.rows.push_back(row);
  }
  return result;
}

// ---------------------------------------------------------- noisy judge

std::vector<NoisyJudgeRow> VerifyNoisyJudge(const SynthConfig& config) {
  config.Validate();
  const auto& f0 = *config.f0;
  const auto& f1 = *config.f1;
  const auto span =
      static_cast<std::uint64_t>(config.length_max - config.length_min + 1);

  // Calibration records with oracle labels, and a separate test set.
  Rng data(Root(config.seed, kJudgeData));
  auto draw_record = [&](int label) {
    const auto m =
        config.length_min + static_cast<std::int64_t>(data.Below(span));
    std::vector<double> seq(static_cast<std::size_t>(m));
    for (auto& h : seq) h = (label == 0 ? f0 : f1).Sample(data);
    return seq;
  };
  const auto n_cal = static_cast<std::size_t>(config.calibration_records);
  std::vector<std::vector<double>> cal(n_cal);
  std::vector<int> cal_labels(n_cal);
  for (std::size_t i = 0; i < n_cal; ++i) {
    cal_labels[i] = data.Bernoulli(config.hallucination_rate) ? 1 : 0;
    cal[i] = draw_record(cal_labels[i]);
  }
  if (std::count(cal_labels.begin(), cal_labels.end(), 0) == 0) {
    throw PreconditionError("calibration set has no faithful records");
  }
  const auto per_class = static_cast<std::size_t>(config.test_size);
  std::vector<SeqSummary> test;
  std::vector<int> test_labels;
  for (int cls : {0, 1}) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto seq = draw_record(cls);
      const auto s = Summarize(seq);
      test.push_back({s.mean, s.max});
      test_labels.push_back(cls);
    }
  }

  auto auroc_for = [&](const ReferenceCdf& ref) {
    std::vector<double> scores(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      scores[i] = CesAgainst(test[i], ref);
    }
    return Auroc(scores, test_labels);
  };
  const double unsup = auroc_for(CalibrateSequences(
      cal, {}, CalibrationMode::kUnsupervised, LabVocab()));

  std::vector<NoisyJudgeRow> rows;
  for (std::size_t p = 0; p < config.flip_probs.size(); ++p) {
    const double prob = config.flip_probs[p];
    const auto flips = static_cast<std::size_t>(
        std::llround(prob * static_cast<double>(n_cal)));
    const auto reps = static_cast<std::size_t>(config.repeats);
    std::vector<double> aurocs(reps), contamination(reps);
    const auto root = Root(config.seed, kJudgeFlip, p);
    ParallelFor(reps, config.workers, [&](std::size_t r) {
      Rng rng(root, r);
      // Flip exactly `flips` labels chosen by a partial shuffle.
      std::vector<std::size_t> idx(n_cal);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < flips; ++i) {
        std::swap(idx[i], idx[i + rng.Below(n_cal - i)]);
      }
      std::vector<int> noisy = cal_labels;
      for (std::size_t i = 0; i < flips; ++i) noisy[idx[i]] = 1 - noisy[idx[i]];
      const auto ref = CalibrateSequences(cal, noisy,
                                          CalibrationMode::kSupervised,
                                          LabVocab());
      aurocs[r] = auroc_for(ref);
      std::size_t kept = 0, bad = 0;
      for (std::size_t i = 0; i < n_cal; ++i) {
        if (noisy[i] == 0) {
          ++kept;
          bad += static_cast<std::size_t>(cal_labels[i]);
        }
      }
      contamination[r] = static_cast<double>(bad) / static_cast<double>(kept);
    });
    NoisyJudgeRow row;
    row.flip_prob = prob;
    row.repeats = config.repeats;
    row.median_supervised = Median(aurocs);
    row.unsupervised = unsup;
    row.gap = row.median_supervised - unsup;
    // Asymptotic SE of a sample median under approximate normality.
    row.gap_se = 1.2533141373155 * SampleSd(aurocs) /
                 std::sqrt(static_cast<double>(reps));
    row.mean_hallucinated_in_reference =
        std::accumulate(contamination.begin(), contamination.end(), 0.0) /
        static_cast<double>(reps);
    rows.push_back(row);
  }
  return rows;
}

// ------------------------------------------------------------ KS power

KsPowerResult KsPowerCurve(const SynthConfig& config) {
  config.Validate();
  const auto& f0 = *config.f0;
  const auto& f1 = *config.f1;
  KsPowerResult result;
  for (std::size_t c = 0; c < config.subsample_sizes.size(); ++c) {
    const auto n = config.subsample_sizes[c];
    const auto reps = static_cast<std::size_t>(config.repeats);
    std::vector<double> stat(reps);
    std::vector<int> reject(reps);
    const auto root =
        Root(config.seed, kKsPower, static_cast<std::uint64_t>(n));
    ParallelFor(reps, config.workers, [&](std::size_t r) {
      Rng rng(root, r);
      std::vector<double> a(static_cast<std::size_t>(n));
      std::vector<double> b(static_cast<std::size_t>(n));
      for (auto& v : a) v = f0.Sample(rng);
      for (auto& v : b) v = f1.Sample(rng);
      const auto ks = KsTwoSample(a, b);
      stat[r] = ks.statistic;
      reject[r] = ks.p_value && *ks.p_value < config.alpha ? 1 : 0;
    });
    KsPowerRow row;
    row.n = n;
    row.repeats = config.repeats;
    row.rejection_rate =
        static_cast<double>(std::accumulate(reject.begin(), reject.end(), 0)) /
        static_cast<double>(reps);
    row.mean_statistic = std::accumulate(stat.begin(), stat.end(), 0.0) /
                         static_cast<double>(reps);
    result.rows.push_back(row);
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    const auto& prev = result.rows[i - 1];
    const auto& cur = result.rows[i];
    const double se = std::sqrt(
        std::pow(BinomialSe(prev.rejection_rate, prev.repeats), 2) +
        std::pow(BinomialSe(cur.rejection_rate, cur.repeats), 2));
    // A zero-variance pair still allows one trial's worth of noise.
    const double slack = std::max(3.0 * se, 1.0 / static_cast<double>(cur.repeats));
    if (cur.rejection_rate < prev.rejection_rate - slack) result.monotone = false;
  }
  return result;
}

// -------------------------------------------------------------- level

LevelResult VerifyLevel(const SynthConfig& config, std::int64_t m) {
  config.Validate();
  if (m < 1) throw PreconditionError("sequence length must be >= 1");
  const auto& f0 = *config.f0;
  const auto& f1 = *config.f1;
  std::vector<double> pool(static_cast<std::size_t>(config.pool_size));
  {
    Rng rng(Root(config.seed, kLevel, 0));
    for (auto& v : pool) v = f0.Sample(rng);
  }
  const auto ref = ReferenceCdf::FromSamples(std::move(pool), LabVocab());
  const auto n = static_cast<std::size_t>(config.trials_per_cell);
  auto score = [&](const Distribution& f, std::uint64_t stream) {
    const auto root = Root(config.seed, kLevel, stream);
    std::vector<double> s(n);
    ParallelFor(n, config.workers, [&](std::size_t t) {
      Rng rng(root, t);
      s[t] = CesAgainst(DrawSequence(f, rng, m), ref);
    });
    return s;
  };
  auto fit = score(f0, 1);
  const auto fit1 = score(f1, 2);
  std::vector<int> labels(fit.size(), 0);
  fit.insert(fit.end(), fit1.begin(), fit1.end());
  labels.resize(fit.size(), 1);
  LevelResult out;
  out.alpha = config.alpha;
  out.threshold =
      SelectThreshold(fit, labels, ThresholdPolicy::kMaxTprAtFpr, config.alpha)
          .threshold;
  const auto fresh = score(f0, 3);
  std::int64_t fp = 0;
  for (double s : fresh) fp += Decide(s, out.threshold);
  out.trials = static_cast<std::int64_t>(n);
  out.fpr = static_cast<double>(fp) / static_cast<double>(n);
  // Both the fitted threshold and the fresh draw carry binomial noise.
  const double se = std::sqrt(2.0) * BinomialSe(config.alpha, out.trials);
  out.pass = std::abs(out.fpr - config.alpha) <= 3.0 * se;
  return out;
}

// ------------------------------------------------------------- output

json ToJson(const DkwRow& r) {
  return {{"L", r.sequences},
          {"epsilon", r.epsilon},
          {"trials", r.trials},
          {"violations", r.violations},
          {"violation_rate", r.violation_rate},
          {"worst_case_bound", r.worst_case_bound},
          {"length_averaged_bound", r.length_averaged_bound},
          {"max_deviation", r.max_deviation},
          {"pass_worst_case", r.pass_worst_case},
          {"pass_length_averaged", r.pass_length_averaged}};
}

json ToJson(const DecayRow& r) {
  return {{"m", r.m}, {"trials", r.trials}, {"type1", r.type1},
          {"type2", r.type2}};
}

json ToJson(const BoundRow& r) {
  return {{"m", r.m},
          {"mu", r.mu},
          {"zeta_fpr", r.zeta_fpr},
          {"zeta_tpr", r.zeta_tpr},
          {"fpr_threshold", r.fpr_threshold},
          {"tpr_threshold", r.tpr_threshold},
          {"fpr", r.fpr},
          {"fpr_bound", r.fpr_bound},
          {"tpr", r.tpr},
          {"tpr_bound", r.tpr_bound},
          {"pass_fpr", r.pass_fpr},
          {"pass_tpr", r.pass_tpr}};
}

json ToJson(const ContaminationRow& r) {
  return {{"gamma", r.gamma},
          {"trials", r.trials},
          {"epsilon", r.epsilon},
          {"budget", r.budget},
          {"max_ks", r.max_ks},
          {"mean_ks", r.mean_ks},
          {"within_budget", r.within_budget},
          {"clean_event", r.clean_event},
          {"violations", r.violations},
          {"mean_auroc", r.mean_auroc},
          {"pass", r.pass()}};
}

json ToJson(const NoisyJudgeRow& r) {
  return {{"flip_prob", r.flip_prob},
          {"repeats", r.repeats},
          {"median_supervised", r.median_supervised},
          {"unsupervised", r.unsupervised},
          {"gap", r.gap},
          {"gap_se", r.gap_se},
          {"mean_hallucinated_in_reference", r.mean_hallucinated_in_reference}};
}

json ToJson(const KsPowerRow& r) {
  return {{"n", r.n},
          {"repeats", r.repeats},
          {"rejection_rate", r.rejection_rate},
          {"mean_statistic", r.mean_statistic}};
}

}  // namespace ces::synth
